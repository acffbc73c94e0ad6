#include "msq/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "msq/error.hpp"

namespace msq {

namespace {

GaussRule make_rule(int n) {
    GaussRule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    // Roots come in +/- pairs; solve the upper half.
    for (int k = 0; k < (n + 1) / 2; ++k) {
        double x = std::cos(M_PI * (k + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            // Legendre recurrence up to degree n at x.
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= n; ++j) {
                double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / pp;
            x -= dx;
            if (std::fabs(dx) < 1e-15) break;
        }
        double w = 2.0 / ((1.0 - x * x) * pp * pp);
        rule.nodes[static_cast<std::size_t>(k)] = -x;
        rule.weights[static_cast<std::size_t>(k)] = w;
        rule.nodes[static_cast<std::size_t>(n - 1 - k)] = x;
        rule.weights[static_cast<std::size_t>(n - 1 - k)] = w;
    }
    return rule;
}

}  // namespace

const GaussRule& gauss_rule(int n) {
    if (n < 1 || n > 4096)
        fail(ErrorCode::InvalidArgument, "Gauss rule order out of range");
    static std::mutex mu;
    static std::map<int, GaussRule> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, make_rule(n)).first;
    return it->second;
}

}  // namespace msq
