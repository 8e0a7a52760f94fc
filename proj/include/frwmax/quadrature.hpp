#pragma once

#include <vector>

namespace frwmax {

struct GaussRule {
  std::vector<double> nodes;    // ascending, in (-1, 1)
  std::vector<double> weights;  // sum to 2
};

/// n-point Gauss-Legendre rule on [-1, 1], nodes from Newton iteration on P_n.
/// Results are cached per n; the returned reference stays valid for the
/// lifetime of the program.
const GaussRule& gauss_legendre(int n);

}  // namespace frwmax
