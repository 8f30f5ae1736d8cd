#include "gbsing/jet.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "gbsing/error.hpp"

namespace gbs {

namespace {

constexpr double kDivisionGuard = 1e-12;
constexpr double kOverflowLimit = 1e300;

void require_same_order(const Jet& a, const Jet& b) {
  if (a.order() != b.order()) {
    std::ostringstream os;
    os << "jet orders " << a.order() << " and " << b.order() << " differ";
    throw Error(ErrorKind::OrderMismatch, os.str());
  }
}

// Apply a scalar function with known derivatives d[k] = f^{(k)}(g0) to g.
Jet apply_series(const Jet& g, const std::vector<double>& derivs) {
  const int order = g.order();
  Jet delta = g;
  delta.coeff(0, 0) = 0.0;
  Jet result = Jet::constant(derivs[0], order);
  Jet power = Jet::constant(1.0, order);
  double factorial = 1.0;
  for (int k = 1; k <= order; ++k) {
    power *= delta;
    factorial *= k;
    const double scale = derivs[k] / factorial;
    if (scale != 0.0) result += power * scale;
  }
  return result;
}

}  // namespace

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Domain: return "DomainError";
    case ErrorKind::Overflow: return "OverflowError";
    case ErrorKind::OrderMismatch: return "OrderMismatch";
    case ErrorKind::OrderExceeded: return "OrderExceeded";
    case ErrorKind::Parse: return "ParseError";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::DegenerateFrame: return "DegenerateFrame";
    case ErrorKind::SingularPoint: return "SingularPoint";
    case ErrorKind::NotArclength: return "NotArclength";
    case ErrorKind::DegeneratePoint: return "DegeneratePoint";
    case ErrorKind::OpenCurve: return "OpenCurve";
    case ErrorKind::RankZero: return "RankZero";
    case ErrorKind::HigherDegeneracy: return "HigherDegeneracy";
    case ErrorKind::AtA3Point: return "AtA3Point";
    case ErrorKind::Inconclusive: return "Inconclusive";
    case ErrorKind::TailFitFailure: return "TailFitFailure";
    case ErrorKind::GluingError: return "GluingError";
    case ErrorKind::NoStabilization: return "NoStabilization";
    case ErrorKind::ImmersionFailure: return "ImmersionFailure";
    case ErrorKind::NotConvex: return "NotConvex";
    case ErrorKind::LinearSolveFailure: return "LinearSolveFailure";
    case ErrorKind::FrontConditionViolated: return "FrontConditionViolated";
    case ErrorKind::CriteriaMismatch: return "CriteriaMismatch";
    case ErrorKind::TriangleTouchesSigma: return "TriangleTouchesSigma";
    case ErrorKind::UnclassifiedSingularity: return "UnclassifiedSingularity";
    case ErrorKind::Io: return "IoError";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Error";
}

Jet::Jet(int order) : order_(order) {
  if (order < 0 || order > kMaxJetOrder) {
    throw Error(ErrorKind::OrderExceeded,
                "jet order " + std::to_string(order) + " outside [0, " +
                    std::to_string(kMaxJetOrder) + "]");
  }
}

Jet Jet::constant(double value, int order) {
  Jet j(order);
  j.c_[0] = value;
  return j;
}

Jet Jet::variable(int which, double base_value, int order) {
  Jet j(order);
  j.c_[0] = base_value;
  if (order >= 1) j.c_[which == 0 ? 1 : 2] = 1.0;
  return j;
}

double Jet::partial(int i, int k) const {
  if (i < 0 || k < 0 || i + k > order_) {
    std::ostringstream os;
    os << "partial (" << i << "," << k << ") exceeds jet order " << order_;
    throw Error(ErrorKind::OrderExceeded, os.str());
  }
  double scale = 1.0;
  for (int n = 2; n <= i; ++n) scale *= n;
  for (int n = 2; n <= k; ++n) scale *= n;
  return coeff(i, k) * scale;
}

Jet Jet::d_du() const {
  if (order_ == 0) throw Error(ErrorKind::OrderExceeded, "cannot differentiate an order-0 jet");
  Jet r(order_ - 1);
  for (int d = 0; d <= order_ - 1; ++d)
    for (int j = 0; j <= d; ++j) {
      const int i = d - j;
      r.coeff(i, j) = (i + 1) * coeff(i + 1, j);
    }
  return r;
}

Jet Jet::d_dv() const {
  if (order_ == 0) throw Error(ErrorKind::OrderExceeded, "cannot differentiate an order-0 jet");
  Jet r(order_ - 1);
  for (int d = 0; d <= order_ - 1; ++d)
    for (int j = 0; j <= d; ++j) {
      const int i = d - j;
      r.coeff(i, j) = (j + 1) * coeff(i, j + 1);
    }
  return r;
}

Jet Jet::truncated(int order) const {
  if (order > order_) {
    throw Error(ErrorKind::OrderExceeded, "cannot raise jet order " + std::to_string(order_) +
                                              " to " + std::to_string(order));
  }
  Jet r(order);
  for (int n = 0; n < jet_size(order); ++n) r.c_[n] = c_[n];
  return r;
}

Jet& Jet::operator+=(const Jet& o) {
  require_same_order(*this, o);
  for (int n = 0; n < size(); ++n) c_[n] += o.c_[n];
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  require_same_order(*this, o);
  for (int n = 0; n < size(); ++n) c_[n] -= o.c_[n];
  return *this;
}

Jet& Jet::operator*=(const Jet& o) {
  *this = *this * o;
  return *this;
}

Jet& Jet::operator/=(const Jet& o) {
  *this = *this / o;
  return *this;
}

Jet& Jet::operator*=(double s) {
  for (int n = 0; n < size(); ++n) c_[n] *= s;
  return *this;
}

Jet Jet::operator-() const {
  Jet r = *this;
  for (int n = 0; n < size(); ++n) r.c_[n] = -r.c_[n];
  return r;
}

double Jet::evaluate_offset(double du, double dv) const {
  double total = 0.0;
  double upow = 1.0;
  for (int i = 0; i <= order_; ++i) {
    double vpow = 1.0;
    for (int j = 0; i + j <= order_; ++j) {
      total += coeff(i, j) * upow * vpow;
      vpow *= dv;
    }
    upow *= du;
  }
  return total;
}

const Jet& Jet::check_finite() const {
  for (int n = 0; n < size(); ++n) {
    if (!std::isfinite(c_[n]) || std::abs(c_[n]) > kOverflowLimit) {
      throw Error(ErrorKind::Overflow, "jet coefficient magnitude exceeds 1e300");
    }
  }
  return *this;
}

Jet operator+(Jet a, const Jet& b) { return a += b; }
Jet operator-(Jet a, const Jet& b) { return a -= b; }

Jet operator*(const Jet& a, const Jet& b) {
  require_same_order(a, b);
  const int order = a.order();
  Jet r(order);
  // Skip zero blocks: many jets (constants, coordinates) are sparse by degree.
  for (int da = 0; da <= order; ++da) {
    for (int ja = 0; ja <= da; ++ja) {
      const double ca = a.coeff(da - ja, ja);
      if (ca == 0.0) continue;
      for (int db = 0; da + db <= order; ++db) {
        for (int jb = 0; jb <= db; ++jb) {
          r.coeff(da - ja + db - jb, ja + jb) += ca * b.coeff(db - jb, jb);
        }
      }
    }
  }
  return r;
}

Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }
Jet operator+(Jet a, double s) { return a += s; }
Jet operator+(double s, Jet a) { return a += s; }
Jet operator-(Jet a, double s) { return a -= s; }
Jet operator-(double s, const Jet& a) { return (-a) += s; }
Jet operator*(Jet a, double s) { return a *= s; }
Jet operator*(double s, Jet a) { return a *= s; }
Jet operator/(Jet a, double s) { return a /= s; }
Jet operator/(double s, const Jet& a) { return reciprocal(a) * s; }

Jet reciprocal(const Jet& a) {
  const double a0 = a.value();
  if (!(std::abs(a0) > kDivisionGuard)) {
    throw Error(ErrorKind::Domain, "division by a jet with value " + std::to_string(a0));
  }
  const int order = a.order();
  std::vector<double> d(order + 1);
  double inv = 1.0 / a0;
  double term = inv;
  for (int k = 0; k <= order; ++k) {
    d[k] = term;  // (-1)^k k! / a0^{k+1}
    term *= -(k + 1) * inv;
  }
  return apply_series(a, d);
}

Jet sqrt(const Jet& a) {
  const double a0 = a.value();
  if (!(a0 > kDivisionGuard)) {
    throw Error(ErrorKind::Domain, "sqrt of non-positive value " + std::to_string(a0));
  }
  return pow(a, 0.5);
}

Jet exp(const Jet& a) {
  const double e = std::exp(a.value());
  return apply_series(a, std::vector<double>(a.order() + 1, e)).check_finite();
}

Jet log(const Jet& a) {
  const double a0 = a.value();
  if (!(a0 > 0.0)) throw Error(ErrorKind::Domain, "log of non-positive value " + std::to_string(a0));
  const int order = a.order();
  std::vector<double> d(order + 1);
  d[0] = std::log(a0);
  double term = 1.0 / a0;  // (k-1)! (-1)^{k-1} / a0^k
  for (int k = 1; k <= order; ++k) {
    d[k] = term;
    term *= -static_cast<double>(k) / a0;
  }
  return apply_series(a, d);
}

Jet sin(const Jet& a) {
  const double s = std::sin(a.value());
  const double c = std::cos(a.value());
  const double cycle[4] = {s, c, -s, -c};
  std::vector<double> d(a.order() + 1);
  for (int k = 0; k <= a.order(); ++k) d[k] = cycle[k % 4];
  return apply_series(a, d);
}

Jet cos(const Jet& a) {
  const double s = std::sin(a.value());
  const double c = std::cos(a.value());
  const double cycle[4] = {c, -s, -c, s};
  std::vector<double> d(a.order() + 1);
  for (int k = 0; k <= a.order(); ++k) d[k] = cycle[k % 4];
  return apply_series(a, d);
}

Jet pow(const Jet& a, double r) {
  const int order = a.order();
  if (r == std::round(r) && std::abs(r) <= 64.0) {
    long n = std::lround(std::abs(r));
    Jet base = a;
    Jet result = Jet::constant(1.0, order);
    while (n > 0) {
      if (n & 1) result *= base;
      n >>= 1;
      if (n > 0) base *= base;
    }
    return r < 0 ? reciprocal(result) : result.check_finite();
  }
  const double a0 = a.value();
  if (!(a0 > kDivisionGuard)) {
    throw Error(ErrorKind::Domain,
                "non-integer power of non-positive value " + std::to_string(a0));
  }
  std::vector<double> d(order + 1);
  double falling = 1.0;
  for (int k = 0; k <= order; ++k) {
    d[k] = falling * std::pow(a0, r - k);
    falling *= (r - k);
  }
  return apply_series(a, d).check_finite();
}

Jet compose(const Jet& outer, const Jet& inner_x, const Jet& inner_y) {
  require_same_order(inner_x, inner_y);
  const int order = inner_x.order();
  if (outer.order() < order) {
    throw Error(ErrorKind::OrderMismatch, "outer jet order " + std::to_string(outer.order()) +
                                              " below inner order " + std::to_string(order));
  }
  Jet dx = inner_x;
  dx.coeff(0, 0) = 0.0;
  Jet dy = inner_y;
  dy.coeff(0, 0) = 0.0;
  std::vector<Jet> xp(order + 1), yp(order + 1);
  xp[0] = yp[0] = Jet::constant(1.0, order);
  for (int k = 1; k <= order; ++k) {
    xp[k] = xp[k - 1] * dx;
    yp[k] = yp[k - 1] * dy;
  }
  Jet result(order);
  for (int i = 0; i <= order; ++i)
    for (int j = 0; i + j <= order; ++j) {
      const double c = outer.coeff(i, j);
      if (c != 0.0) result += (xp[i] * yp[j]) * c;
    }
  return result;
}

Jet compose(const Jet& outer, const Jet& inner) {
  return compose(outer, inner, Jet::constant(0.0, inner.order()));
}

}  // namespace gbs
