#include "msq/pmf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "msq/error.hpp"
#include "msq/fmt.hpp"

namespace msq {

namespace {
constexpr double kProbTol = 1e-12;
constexpr double kMergeTol = 1e-12;
}  // namespace

Pmf::Pmf(std::vector<double> sizes, std::vector<double> probs) {
    if (sizes.empty() || sizes.size() != probs.size())
        fail(ErrorCode::InvalidArgument, "pmf needs matching nonempty size/probability lists");

    std::vector<std::size_t> order(sizes.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return sizes[a] < sizes[b]; });

    sizes_.reserve(sizes.size());
    probs_.reserve(sizes.size());
    for (std::size_t idx : order) {
        double x = sizes[idx];
        double p = probs[idx];
        if (!(x > 0.0) || !std::isfinite(x))
            fail(ErrorCode::NonpositiveSize, "pmf support point " + fmt_g(x, 17) + " is not strictly positive");
        if (!(p > 0.0) || !std::isfinite(p))
            fail(ErrorCode::ProbabilityMismatch, "pmf probability " + fmt_g(p, 17) + " is not strictly positive");
        if (!sizes_.empty() && x - sizes_.back() < kMergeTol) {
            probs_.back() += p;
        } else {
            sizes_.push_back(x);
            probs_.push_back(p);
        }
    }

    double total = std::accumulate(probs_.begin(), probs_.end(), 0.0);
    if (std::fabs(total - 1.0) > kProbTol)
        fail(ErrorCode::ProbabilityMismatch,
             "pmf probabilities sum to " + fmt_g(total, 17) + ", expected 1");
}

double Pmf::mean() const {
    double m = 0.0;
    for (std::size_t i = 0; i < sizes_.size(); ++i) m += sizes_[i] * probs_[i];
    return m;
}

double Pmf::second_moment() const {
    double m = 0.0;
    for (std::size_t i = 0; i < sizes_.size(); ++i) m += sizes_[i] * sizes_[i] * probs_[i];
    return m;
}

double Pmf::tail(double x) const {
    double t = 0.0;
    for (std::size_t i = 0; i < sizes_.size(); ++i)
        if (sizes_[i] > x) t += probs_[i];
    return t;
}

double Pmf::expected_min(double x) const {
    double e = 0.0;
    for (std::size_t i = 0; i < sizes_.size(); ++i)
        e += probs_[i] * std::min(sizes_[i], x);
    return e;
}

Pmf Pmf::conditioned(double age) const {
    if (age < 0.0 || !std::isfinite(age))
        fail(ErrorCode::InvalidState, "age must be a nonnegative real");
    if (age == 0.0) return *this;
    if (age >= max_size())
        fail(ErrorCode::AgeBeyondSupport,
             "age " + fmt_g(age, 17) + " is not below the largest support point " +
                 fmt_g(max_size(), 17));

    std::vector<double> sizes, probs;
    double survive = 0.0;
    for (std::size_t i = 0; i < sizes_.size(); ++i) {
        if (sizes_[i] > age) {
            sizes.push_back(sizes_[i] - age);
            probs.push_back(probs_[i]);
            survive += probs_[i];
        }
    }
    for (double& p : probs) p /= survive;
    return Pmf(std::move(sizes), std::move(probs));
}

}  // namespace msq
