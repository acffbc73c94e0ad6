#pragma once

#include <cstddef>
#include <vector>

namespace msq {

// Finite discrete size distribution on strictly positive support.
// Support points are kept sorted strictly increasing; probabilities are
// all positive and sum to 1 within 1e-12.
class Pmf {
public:
    // Pairs up sizes[i] with probs[i], sorts by size, merges support points
    // closer than 1e-12, and validates.
    Pmf(std::vector<double> sizes, std::vector<double> probs);

    static Pmf point(double size) { return Pmf({size}, {1.0}); }

    const std::vector<double>& sizes() const { return sizes_; }
    const std::vector<double>& probs() const { return probs_; }
    std::size_t support_size() const { return sizes_.size(); }
    double min_size() const { return sizes_.front(); }
    double max_size() const { return sizes_.back(); }

    double mean() const;
    double second_moment() const;

    // P(X > x)
    double tail(double x) const;

    // E[min(X, x)]
    double expected_min(double x) const;

    // Distribution of X - age given X > age.  An age exactly equal to a
    // support point counts as having survived past it.  Requires
    // 0 <= age < max_size().
    Pmf conditioned(double age) const;

    bool operator==(const Pmf&) const = default;

private:
    std::vector<double> sizes_;
    std::vector<double> probs_;
};

}  // namespace msq
