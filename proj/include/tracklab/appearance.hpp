#pragma once

#include <span>
#include <vector>

namespace tracklab {

/// Unit-norm re-ID embedding.
class Feature {
public:
    Feature() = default;

    // Throws std::invalid_argument for an empty or zero vector.
    static Feature normalized(std::span<const double> v);
    // Wraps a vector that is already unit norm (checked to 1e-6).
    static Feature from_unit(std::vector<double> v);

    std::span<const double> values() const { return values_; }
    std::size_t dim() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    bool empty() const { return values_.empty(); }

private:
    explicit Feature(std::vector<double> v) : values_(std::move(v)) {}
    std::vector<double> values_;
};

double dot(std::span<const double> a, std::span<const double> b);
double l2_norm(std::span<const double> v);

/// 1 - a.b for unit-norm a, b; in [0, 2].
double cosine_distance(const Feature& a, const Feature& b);

/// Smoothed tracklet appearance with its EMA factor.
struct AppearanceState {
    Feature smoothed;
    double alpha = 0.9;
};

/// smoothed' = normalize(alpha * smoothed + (1 - alpha) * feat)
AppearanceState ema_update(const AppearanceState& prev, const Feature& feat);

}  // namespace tracklab
