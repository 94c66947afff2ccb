#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tracklab/appearance.hpp"
#include "tracklab/assignment.hpp"
#include "tracklab/detection.hpp"
#include "tracklab/motion.hpp"

namespace tracklab {

enum class TrackStatus { active, lost, removed };

struct Tracklet {
    int id = 0;
    MotionState motion;
    std::optional<AppearanceState> appearance;  // empty for the motion-only variant
    TrackStatus status = TrackStatus::active;
    bool confirmed = true;  // tracklets born after the first frame wait for a second match
    int start_frame = 0;
    int last_matched_frame = 0;
    int frames_since_update = 0;
    int hits = 0;  // frames with a matched detection, including the first
    BoxTLBR det_box;  // last matched detection
    double score = 0.0;
    int gt_id = -1;  // identity of the last matched detection

    BoxTLBR box() const { return motion.tlbr(); }
};

struct TrackletPool {
    std::vector<Tracklet> tracklets;  // removed tracklets are dropped
    int next_id = 1;
    int frame_index = 0;

    const Tracklet* find(int id) const;
    Tracklet* find(int id);
};

enum class TrackerVariant { fused, byte };

std::string to_string(TrackerVariant v);
// Throws std::invalid_argument for names other than "fused" and "byte".
TrackerVariant parse_variant(const std::string& name);

struct AssociationConfig {
    double lambda = 0.5;  // weight of the motion term in the fused cost
    int max_lost_age = 30;
    double det_high = 0.6;
    double det_low = 0.1;
    double fused_thresh = 0.8;    // fused stage, and first stage of the byte variant
    double iou_thresh = 0.5;      // second byte stage
    double newborn_thresh = 0.7;  // 1 - IoU for unconfirmed tracklets, both variants
    double alpha = 0.9;
    double gate = kChi2Gate4;
    KalmanParams kalman;
};

// Throws std::invalid_argument on an out-of-range field.
void validate(const AssociationConfig& cfg);

struct MatchReport {
    std::vector<std::pair<int, int>> matches;  // (tracklet id, detection index)
    std::vector<int> det_to_track;  // per detection: tracklet id or -1, new tracklets included
    std::vector<int> new_ids;
    std::vector<int> lost_ids;     // became lost this frame
    std::vector<int> removed_ids;

    int track_of(int det) const { return det_to_track[det]; }
    int det_of(int track_id) const;  // -1 when the tracklet was not matched
};

// Motion term: squared Mahalanobis distance, +inf beyond the gate.
CostMatrix motion_cost(const std::vector<const Tracklet*>& tracks, const std::vector<Detection>& dets,
                       const AssociationConfig& cfg);
// Cosine distance to the smoothed appearance. A side without a feature counts as orthogonal (1).
CostMatrix appearance_cost(const std::vector<const Tracklet*>& tracks, const std::vector<Detection>& dets);
// lambda * motion + (1 - lambda) * appearance, +inf where the motion gate fails.
CostMatrix fused_cost(const std::vector<const Tracklet*>& tracks, const std::vector<Detection>& dets,
                      const AssociationConfig& cfg);
// 1 - IoU between predicted boxes and detections.
CostMatrix iou_cost(const std::vector<const Tracklet*>& tracks, const std::vector<Detection>& dets);

// One frame of association. The pool is advanced in place.
MatchReport step_fused(TrackletPool& pool, const std::vector<Detection>& dets, const AssociationConfig& cfg);
MatchReport step_byte(TrackletPool& pool, const std::vector<Detection>& dets, const AssociationConfig& cfg);
MatchReport step(TrackerVariant v, TrackletPool& pool, const std::vector<Detection>& dets,
                 const AssociationConfig& cfg);

struct TrackEntry {
    int id = 0;
    BoxTLBR box;
    double score = 0.0;
    int gt_id = -1;
    int det_index = -1;
};

struct FrameTracks {
    int frame = 0;
    std::vector<TrackEntry> entries;  // tracklets matched this frame, by id

    const TrackEntry* find(int id) const;
};

using TrackHistory = std::vector<FrameTracks>;

/// Entries for the confirmed tracklets matched in the latest step.
FrameTracks snapshot(const TrackletPool& pool, const MatchReport& report);

TrackHistory run_video(const std::vector<std::vector<Detection>>& frames, const AssociationConfig& cfg,
                       TrackerVariant variant);

/// MOT-Challenge results: frame,id,x,y,w,h,score,-1,-1,-1
void write_mot_results(std::ostream& out, const TrackHistory& history);

}  // namespace tracklab
