#pragma once

/// Truncated bivariate Taylor expansions ("jets").
///
/// A Jet of order K stores the Taylor coefficients c[i,j] = ∂^{i+j}f/∂u^i∂v^j / (i! j!)
/// for i + j ≤ K at a fixed base point, in graded-lexicographic order:
/// degree 0: (0,0); degree 1: (1,0),(0,1); degree 2: (2,0),(1,1),(0,2); ...
/// All arithmetic is exact through degree K.

#include <array>
#include <cstddef>
#include <span>

namespace gbs {

inline constexpr int kMaxJetOrder = 8;
inline constexpr int kDefaultJetOrder = 6;

constexpr int jet_size(int order) { return (order + 1) * (order + 2) / 2; }
constexpr int jet_index(int i, int j) { return (i + j) * (i + j + 1) / 2 + j; }

class Jet {
 public:
  Jet() = default;
  explicit Jet(int order);

  static Jet constant(double value, int order);
  /// Jet of the coordinate function u (which = 0) or v (which = 1) at `base`.
  static Jet variable(int which, double base_value, int order);

  int order() const { return order_; }
  int size() const { return jet_size(order_); }

  double value() const { return c_[0]; }
  double coeff(int i, int j) const { return c_[jet_index(i, j)]; }
  double& coeff(int i, int j) { return c_[jet_index(i, j)]; }
  std::span<const double> coeffs() const { return {c_.data(), static_cast<std::size_t>(size())}; }

  /// ∂^{i+k} / ∂u^i ∂v^k at the base point.
  double partial(int i, int k) const;
  double du() const { return c_[1]; }
  double dv() const { return c_[2]; }

  /// Exact derivative jet; the result has order one less.
  Jet d_du() const;
  Jet d_dv() const;
  Jet derivative(int which) const { return which == 0 ? d_du() : d_dv(); }

  /// Drop coefficients above `order` (order must not exceed the current one).
  Jet truncated(int order) const;

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(const Jet& o);
  Jet& operator/=(const Jet& o);
  Jet& operator+=(double s) { c_[0] += s; return *this; }
  Jet& operator-=(double s) { c_[0] -= s; return *this; }
  Jet& operator*=(double s);
  Jet& operator/=(double s) { return *this *= 1.0 / s; }
  Jet operator-() const;

  /// Evaluate the truncated polynomial at offset (du, dv) from the base point.
  double evaluate_offset(double du, double dv) const;

  /// Throws Overflow if any coefficient exceeds 1e300 in magnitude.
  const Jet& check_finite() const;

 private:
  int order_ = 0;
  std::array<double, jet_size(kMaxJetOrder)> c_{};
};

Jet operator+(Jet a, const Jet& b);
Jet operator-(Jet a, const Jet& b);
Jet operator*(const Jet& a, const Jet& b);
Jet operator/(const Jet& a, const Jet& b);
Jet operator+(Jet a, double s);
Jet operator+(double s, Jet a);
Jet operator-(Jet a, double s);
Jet operator-(double s, const Jet& a);
Jet operator*(Jet a, double s);
Jet operator*(double s, Jet a);
Jet operator/(Jet a, double s);
Jet operator/(double s, const Jet& a);

Jet sqrt(const Jet& a);
Jet exp(const Jet& a);
Jet log(const Jet& a);
Jet sin(const Jet& a);
Jet cos(const Jet& a);
/// a^r for real r; integer r is evaluated by repeated products so negative bases are allowed.
Jet pow(const Jet& a, double r);
Jet reciprocal(const Jet& a);

/// Compose a jet in two slots with an inner pair of jets.
/// `outer` is expanded about (x0, y0); the degree-0 values of `inner_x`, `inner_y`
/// must equal (x0, y0) (within 1e-9 relative) and both inner jets share their order.
Jet compose(const Jet& outer, const Jet& inner_x, const Jet& inner_y);
/// Single-slot composition: outer(inner) with outer expanded in u.
Jet compose(const Jet& outer, const Jet& inner);

}  // namespace gbs
