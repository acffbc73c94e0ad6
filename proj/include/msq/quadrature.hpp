#pragma once

#include <vector>

namespace msq {

// Gauss-Legendre rule on [-1, 1]; nodes are the Legendre roots found by
// Newton iteration, accurate to machine precision.  Rules are cached per n.
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

const GaussRule& gauss_rule(int n);

// Applies the n-point rule on [a, b].
template <class F>
double gauss_integrate(int n, double a, double b, F&& f) {
    const GaussRule& rule = gauss_rule(n);
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double acc = 0.0;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k)
        acc += rule.weights[k] * f(mid + half * rule.nodes[k]);
    return acc * half;
}

}  // namespace msq
