#pragma once

#include <vector>

namespace lrkit {

struct GaussRule {
    std::vector<double> nodes;    ///< on [-1, 1]
    std::vector<double> weights;
};

/// n-point Gauss-Legendre rule (Newton iteration on the Legendre recurrence).
GaussRule gauss_legendre(int n);

/// Rule mapped to [a, b].
GaussRule gauss_legendre(int n, double a, double b);

}  // namespace lrkit
