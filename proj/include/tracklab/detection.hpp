#pragma once

#include <optional>

#include "tracklab/appearance.hpp"
#include "tracklab/geometry.hpp"

namespace tracklab {

/// One detector output fed to the tracker.
struct Detection {
    BoxTLBR box;
    double score = 1.0;
    std::optional<Feature> feature;  // absent for motion-only trackers
    int gt_id = -1;                  // ground-truth identity when known
    int cell = -1;                   // heatmap peak index for decoded detections
};

}  // namespace tracklab
