#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace tracklab {

/// Heatmap dimensions: width x height cells at `stride` pixels per cell.
struct GridShape {
    int width = 0;
    int height = 0;
    int stride = 4;
    int feat_dim = 512;

    int cells() const { return width * height; }
    bool contains(int gx, int gy) const { return gx >= 0 && gy >= 0 && gx < width && gy < height; }
    int index(int gx, int gy) const { return gy * width + gx; }
    bool operator==(const GridShape&) const = default;
};

/// Dense channel-last grid.
class DenseGrid {
public:
    DenseGrid() = default;
    DenseGrid(int width, int height, int channels)
        : width_(width), height_(height), channels_(channels),
          data_(static_cast<std::size_t>(width) * height * channels, 0.0) {}

    int width() const { return width_; }
    int height() const { return height_; }
    int channels() const { return channels_; }

    double& at(int gx, int gy, int ch = 0) { return data_[offset(gx, gy, ch)]; }
    double at(int gx, int gy, int ch = 0) const { return data_[offset(gx, gy, ch)]; }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }

    bool same_shape(const DenseGrid& o) const {
        return width_ == o.width_ && height_ == o.height_ && channels_ == o.channels_;
    }
    bool operator==(const DenseGrid&) const = default;

private:
    std::size_t offset(int gx, int gy, int ch) const {
        return (static_cast<std::size_t>(gy) * width_ + gx) * channels_ + ch;
    }

    int width_ = 0;
    int height_ = 0;
    int channels_ = 0;
    std::vector<double> data_;
};

/// D-channel grid where most cells are zero. Cells are allocated on first
/// write; an unallocated cell reads as an empty span (all zeros).
class FeatureGrid {
public:
    FeatureGrid() = default;
    FeatureGrid(int width, int height, int dim)
        : width_(width), height_(height), dim_(dim),
          slot_(static_cast<std::size_t>(width) * height, -1) {}

    int width() const { return width_; }
    int height() const { return height_; }
    int dim() const { return dim_; }

    bool allocated(int gx, int gy) const { return slot_[index(gx, gy)] >= 0; }
    std::span<const double> cell(int gx, int gy) const;
    std::span<double> cell_mut(int gx, int gy);  // allocates zeros if needed

    /// Linear cell indices (gy * width + gx) of the allocated cells, in allocation order.
    const std::vector<int>& allocated_cells() const { return cells_; }
    std::span<const double> slot_data(std::size_t slot) const {
        return {data_.data() + slot * dim_, static_cast<std::size_t>(dim_)};
    }
    std::span<double> slot_data_mut(std::size_t slot) {
        return {data_.data() + slot * dim_, static_cast<std::size_t>(dim_)};
    }

    bool same_shape(const FeatureGrid& o) const {
        return width_ == o.width_ && height_ == o.height_ && dim_ == o.dim_;
    }
    /// Value equality: unallocated cells equal allocated all-zero cells.
    bool equals(const FeatureGrid& o) const;

private:
    std::size_t index(int gx, int gy) const { return static_cast<std::size_t>(gy) * width_ + gx; }

    int width_ = 0;
    int height_ = 0;
    int dim_ = 0;
    std::vector<int> slot_;
    std::vector<int> cells_;
    std::vector<double> data_;
};

/// The four map groups shared by detector output and attacker deltas.
struct GridSet {
    GridShape shape;
    DenseGrid heat;  // 1 channel
    DenseGrid size;  // (w, h) in pixels
    DenseGrid off;   // (offx, offy) in cells
    FeatureGrid feat;

    GridSet() = default;
    explicit GridSet(GridShape s)
        : shape(s),
          heat(s.width, s.height, 1),
          size(s.width, s.height, 2),
          off(s.width, s.height, 2),
          feat(s.width, s.height, s.feat_dim) {}

    bool equals(const GridSet& o) const {
        return shape == o.shape && heat == o.heat && size == o.size && off == o.off &&
               feat.equals(o.feat);
    }
};

/// Detector output for one frame.
struct SensorMaps : GridSet {
    using GridSet::GridSet;
};

/// Additive attacker deltas for one frame; same shapes as SensorMaps.
struct Perturbation : GridSet {
    using GridSet::GridSet;
};

}  // namespace tracklab
