#include <iostream>

#include "gbsing/cli/app.hpp"

int main(int argc, char** argv) { return gbs::cli::run(argc, argv, std::cout, std::cerr); }
