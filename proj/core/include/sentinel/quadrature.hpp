#pragma once

#include <cstddef>
#include <vector>

namespace sentinel::quad {

/// Gauss-Legendre rule on [-1, 1].
struct GaussLegendreRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// n-point rule; nodes ascending. Exact for polynomials of degree <= 2n - 1.
GaussLegendreRule gauss_legendre(std::size_t n);

/// Integral of f over [a, b] with the given rule.
template <class F>
double integrate(F&& f, double a, double b, const GaussLegendreRule& rule) {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (b + a);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
    }
    return half * sum;
}

} // namespace sentinel::quad
