#include "tracklab/grid.hpp"

#include <algorithm>

namespace tracklab {

std::span<const double> FeatureGrid::cell(int gx, int gy) const {
    const int s = slot_[index(gx, gy)];
    if (s < 0) return {};
    return slot_data(static_cast<std::size_t>(s));
}

std::span<double> FeatureGrid::cell_mut(int gx, int gy) {
    int& s = slot_[index(gx, gy)];
    if (s < 0) {
        s = static_cast<int>(cells_.size());
        cells_.push_back(static_cast<int>(index(gx, gy)));
        data_.resize(data_.size() + dim_, 0.0);
    }
    return slot_data_mut(static_cast<std::size_t>(s));
}

bool FeatureGrid::equals(const FeatureGrid& o) const {
    if (!same_shape(o)) return false;
    auto is_zero = [](std::span<const double> v) {
        return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
    };
    for (int idx = 0; idx < width_ * height_; ++idx) {
        const int gx = idx % width_;
        const int gy = idx / width_;
        const auto a = cell(gx, gy);
        const auto b = o.cell(gx, gy);
        if (a.empty() && b.empty()) continue;
        if (a.empty()) {
            if (!is_zero(b)) return false;
        } else if (b.empty()) {
            if (!is_zero(a)) return false;
        } else if (!std::equal(a.begin(), a.end(), b.begin())) {
            return false;
        }
    }
    return true;
}

}  // namespace tracklab
