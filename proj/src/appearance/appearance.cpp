#include "tracklab/appearance.hpp"

#include <cmath>
#include <stdexcept>

namespace tracklab {

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double l2_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

Feature Feature::normalized(std::span<const double> v) {
    const double n = l2_norm(v);
    if (v.empty() || !(n > 0.0) || !std::isfinite(n)) {
        throw std::invalid_argument("Feature::normalized: zero or non-finite vector");
    }
    std::vector<double> out(v.begin(), v.end());
    for (double& x : out) x /= n;
    return Feature(std::move(out));
}

Feature Feature::from_unit(std::vector<double> v) {
    const double n = l2_norm(v);
    if (std::abs(n - 1.0) > 1e-6) throw std::invalid_argument("Feature::from_unit: not unit norm");
    return Feature(std::move(v));
}

double cosine_distance(const Feature& a, const Feature& b) {
    return 1.0 - dot(a.values(), b.values());
}

AppearanceState ema_update(const AppearanceState& prev, const Feature& feat) {
    const auto a = prev.smoothed.values();
    const auto f = feat.values();
    if (a.size() != f.size()) throw std::invalid_argument("ema_update: dimension mismatch");
    std::vector<double> mix(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        mix[i] = prev.alpha * a[i] + (1.0 - prev.alpha) * f[i];
    }
    // Antipodal inputs with alpha = 0.5 cancel exactly; keep the previous state then.
    if (!(l2_norm(mix) > 0.0)) return prev;
    return {Feature::normalized(mix), prev.alpha};
}

}  // namespace tracklab
