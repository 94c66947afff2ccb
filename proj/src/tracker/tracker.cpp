#include "tracklab/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace tracklab {

const Tracklet* TrackletPool::find(int id) const {
    for (const Tracklet& t : tracklets) {
        if (t.id == id) return &t;
    }
    return nullptr;
}

Tracklet* TrackletPool::find(int id) {
    for (Tracklet& t : tracklets) {
        if (t.id == id) return &t;
    }
    return nullptr;
}

std::string to_string(TrackerVariant v) { return v == TrackerVariant::fused ? "fused" : "byte"; }

TrackerVariant parse_variant(const std::string& name) {
    if (name == "fused") return TrackerVariant::fused;
    if (name == "byte") return TrackerVariant::byte;
    throw std::invalid_argument("unknown tracker '" + name + "' (expected fused or byte)");
}

void validate(const AssociationConfig& cfg) {
    if (!(cfg.lambda >= 0.0 && cfg.lambda <= 1.0)) throw std::invalid_argument("lambda must lie in [0, 1]");
    if (!(cfg.alpha >= 0.0 && cfg.alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
    if (cfg.max_lost_age < 1) throw std::invalid_argument("max_lost_age must be >= 1");
    if (!(cfg.det_low < cfg.det_high)) throw std::invalid_argument("det_low must be below det_high");
    if (!(cfg.fused_thresh > 0.0) || !(cfg.iou_thresh > 0.0) || !(cfg.newborn_thresh > 0.0)) {
        throw std::invalid_argument("match thresholds must be positive");
    }
    if (!(cfg.kalman.std_weight_position > 0.0) || !(cfg.kalman.std_weight_velocity > 0.0)) {
        throw std::invalid_argument("Kalman noise weights must be positive");
    }
}

int MatchReport::det_of(int track_id) const {
    for (const auto& [id, det] : matches) {
        if (id == track_id) return det;
    }
    return -1;
}

CostMatrix motion_cost(const std::vector<const Tracklet*>& tracks, const std::vector<Detection>& dets,
                       const AssociationConfig& cfg) {
    CostMatrix cost(static_cast<int>(tracks.size()), static_cast<int>(dets.size()));
    for (int r = 0; r < cost.rows(); ++r) {
        const Mat4 s = innovation_cov(tracks[r]->motion, cfg.kalman);
        const Eigen::LLT<Mat4> llt(s);
        for (int c = 0; c < cost.cols(); ++c) {
            if (llt.info() != Eigen::Success || !dets[c].box.positive_area()) {
                cost(r, c) = kInfCost;
                continue;
            }
            const BoxXYAH z = tlbr_to_xyah(dets[c].box);
            const Vec8& m = tracks[r]->motion.mean;
            Vec4 innovation;
            innovation << z.cx - m(0), z.cy - m(1), z.a - m(2), z.h - m(3);
            const double d = llt.matrixL().solve(innovation).squaredNorm();
            cost(r, c) = d > cfg.gate ? kInfCost : d;
        }
    }
    return cost;
}

CostMatrix appearance_cost(const std::vector<const Tracklet*>& tracks, const std::vector<Detection>& dets) {
    CostMatrix cost(static_cast<int>(tracks.size()), static_cast<int>(dets.size()), 1.0);
    for (int r = 0; r < cost.rows(); ++r) {
        if (!tracks[r]->appearance) continue;
        for (int c = 0; c < cost.cols(); ++c) {
            if (dets[c].feature) cost(r, c) = cosine_distance(tracks[r]->appearance->smoothed, *dets[c].feature);
        }
    }
    return cost;
}

CostMatrix fused_cost(const std::vector<const Tracklet*>& tracks, const std::vector<Detection>& dets,
                      const AssociationConfig& cfg) {
    const CostMatrix box = motion_cost(tracks, dets, cfg);
    const CostMatrix feat = appearance_cost(tracks, dets);
    CostMatrix cost(box.rows(), box.cols());
    for (int r = 0; r < cost.rows(); ++r) {
        for (int c = 0; c < cost.cols(); ++c) {
            if (!std::isfinite(box(r, c))) {
                cost(r, c) = kInfCost;
            } else if (cfg.lambda == 1.0) {
                cost(r, c) = box(r, c);
            } else if (cfg.lambda == 0.0) {
                cost(r, c) = feat(r, c);
            } else {
                cost(r, c) = cfg.lambda * box(r, c) + (1.0 - cfg.lambda) * feat(r, c);
            }
        }
    }
    return cost;
}

CostMatrix iou_cost(const std::vector<const Tracklet*>& tracks, const std::vector<Detection>& dets) {
    CostMatrix cost(static_cast<int>(tracks.size()), static_cast<int>(dets.size()));
    for (int r = 0; r < cost.rows(); ++r) {
        const BoxTLBR pred = tracks[r]->box();
        for (int c = 0; c < cost.cols(); ++c) cost(r, c) = 1.0 - iou(pred, dets[c].box);
    }
    return cost;
}

namespace {

void begin_frame(TrackletPool& pool, const AssociationConfig& cfg) {
    ++pool.frame_index;
    for (Tracklet& t : pool.tracklets) t.motion = kf_predict(t.motion, cfg.kalman);
}

void apply_match(Tracklet& t, const Detection& d, int frame, const AssociationConfig& cfg) {
    t.motion = kf_update(t.motion, tlbr_to_xyah(d.box), cfg.kalman);
    if (d.feature) {
        if (t.appearance) {
            AppearanceState prev = *t.appearance;
            prev.alpha = cfg.alpha;
            t.appearance = ema_update(prev, *d.feature);
        } else {
            t.appearance = AppearanceState{*d.feature, cfg.alpha};
        }
    }
    t.status = TrackStatus::active;
    t.confirmed = true;
    t.frames_since_update = 0;
    t.last_matched_frame = frame;
    ++t.hits;
    t.det_box = d.box;
    t.score = d.score;
    t.gt_id = d.gt_id;
}

int spawn(TrackletPool& pool, const Detection& d, const AssociationConfig& cfg, bool with_appearance) {
    Tracklet t;
    t.id = pool.next_id++;
    t.motion = kf_init(tlbr_to_xyah(d.box), cfg.kalman);
    if (with_appearance && d.feature) t.appearance = AppearanceState{*d.feature, cfg.alpha};
    t.status = TrackStatus::active;
    t.confirmed = pool.frame_index == 1;
    t.start_frame = pool.frame_index;
    t.last_matched_frame = pool.frame_index;
    t.hits = 1;
    t.det_box = d.box;
    t.score = d.score;
    t.gt_id = d.gt_id;
    pool.tracklets.push_back(std::move(t));
    return pool.tracklets.back().id;
}

// Ages unmatched tracklets and drops those past the cache period. A newborn
// tracklet that misses its second frame is dropped at once.
void end_frame(TrackletPool& pool, const std::vector<char>& matched, const AssociationConfig& cfg,
               MatchReport& report) {
    for (std::size_t k = 0; k < matched.size(); ++k) {
        if (matched[k]) continue;
        Tracklet& t = pool.tracklets[k];
        ++t.frames_since_update;
        if (!t.confirmed) {
            t.status = TrackStatus::removed;
            report.removed_ids.push_back(t.id);
            continue;
        }
        if (t.status == TrackStatus::active) report.lost_ids.push_back(t.id);
        t.status = t.frames_since_update > cfg.max_lost_age ? TrackStatus::removed : TrackStatus::lost;
        if (t.status == TrackStatus::removed) report.removed_ids.push_back(t.id);
    }
    std::erase_if(pool.tracklets, [](const Tracklet& t) { return t.status == TrackStatus::removed; });
}

std::vector<const Tracklet*> pointers(const TrackletPool& pool, const std::vector<int>& idx) {
    std::vector<const Tracklet*> out;
    for (int k : idx) out.push_back(&pool.tracklets[k]);
    return out;
}

struct Rows {
    std::vector<int> confirmed;
    std::vector<int> newborn;
};

Rows split_rows(const TrackletPool& pool) {
    Rows r;
    for (int k = 0; k < static_cast<int>(pool.tracklets.size()); ++k) {
        (pool.tracklets[k].confirmed ? r.confirmed : r.newborn).push_back(k);
    }
    return r;
}

// Newborn tracklets only see the detections nobody else took, by overlap.
std::vector<int> match_newborn(TrackletPool& pool, const std::vector<int>& newborn, const std::vector<Detection>& dets,
                               const std::vector<int>& free_cols, const AssociationConfig& cfg,
                               const std::function<void(int, int)>& record) {
    std::vector<Detection> sub;
    for (int c : free_cols) sub.push_back(dets[c]);
    const Matching m = linear_assignment(iou_cost(pointers(pool, newborn), sub), cfg.newborn_thresh);
    for (const auto& [r, c] : m.matches) record(newborn[r], free_cols[c]);
    std::vector<int> rest;
    for (int c : m.unmatched_cols) rest.push_back(free_cols[c]);
    return rest;
}

}  // namespace

MatchReport step_fused(TrackletPool& pool, const std::vector<Detection>& dets, const AssociationConfig& cfg) {
    begin_frame(pool, cfg);
    MatchReport report;
    report.det_to_track.assign(dets.size(), -1);

    const std::size_t existing = pool.tracklets.size();
    std::vector<char> matched(existing, 0);
    auto record = [&](int row, int det) {
        Tracklet& t = pool.tracklets[row];
        apply_match(t, dets[det], pool.frame_index, cfg);
        matched[row] = 1;
        report.matches.emplace_back(t.id, det);
        report.det_to_track[det] = t.id;
    };

    const Rows rows = split_rows(pool);
    const Matching m = linear_assignment(fused_cost(pointers(pool, rows.confirmed), dets, cfg), cfg.fused_thresh);
    for (const auto& [r, c] : m.matches) record(rows.confirmed[r], c);
    const std::vector<int> rest = match_newborn(pool, rows.newborn, dets, m.unmatched_cols, cfg, record);
    std::sort(report.matches.begin(), report.matches.end());
    end_frame(pool, matched, cfg, report);
    for (int c : rest) {
        if (!dets[c].box.positive_area()) continue;
        const int id = spawn(pool, dets[c], cfg, true);
        report.new_ids.push_back(id);
        report.det_to_track[c] = id;
    }
    return report;
}

MatchReport step_byte(TrackletPool& pool, const std::vector<Detection>& dets, const AssociationConfig& cfg) {
    begin_frame(pool, cfg);
    MatchReport report;
    report.det_to_track.assign(dets.size(), -1);

    std::vector<int> high, low;
    for (int c = 0; c < static_cast<int>(dets.size()); ++c) {
        if (!dets[c].box.positive_area()) continue;
        if (dets[c].score >= cfg.det_high) {
            high.push_back(c);
        } else if (dets[c].score >= cfg.det_low) {
            low.push_back(c);
        }
    }
    auto subset = [&](const std::vector<int>& idx) {
        std::vector<Detection> out;
        for (int c : idx) out.push_back(dets[c]);
        return out;
    };

    const std::size_t existing = pool.tracklets.size();
    std::vector<char> matched(existing, 0);
    auto record = [&](int row, int det) {
        Tracklet& t = pool.tracklets[row];
        apply_match(t, dets[det], pool.frame_index, cfg);
        t.appearance.reset();
        matched[row] = 1;
        report.matches.emplace_back(t.id, det);
        report.det_to_track[det] = t.id;
    };

    const Rows rows = split_rows(pool);
    const Matching first = linear_assignment(iou_cost(pointers(pool, rows.confirmed), subset(high)), cfg.fused_thresh);

    // Second stage: still-unmatched tracklets that were active last frame, against low-score boxes.
    std::vector<int> rest;
    for (int r : first.unmatched_rows) {
        if (pool.tracklets[rows.confirmed[r]].status == TrackStatus::active) rest.push_back(rows.confirmed[r]);
    }
    const Matching second = linear_assignment(iou_cost(pointers(pool, rest), subset(low)), cfg.iou_thresh);

    for (const auto& [r, c] : first.matches) record(rows.confirmed[r], high[c]);
    for (const auto& [r, c] : second.matches) record(rest[r], low[c]);
    std::vector<int> free_high;
    for (int c : first.unmatched_cols) free_high.push_back(high[c]);
    const std::vector<int> fresh = match_newborn(pool, rows.newborn, dets, free_high, cfg, record);
    std::sort(report.matches.begin(), report.matches.end());
    end_frame(pool, matched, cfg, report);
    for (int c : fresh) {
        const int id = spawn(pool, dets[c], cfg, false);
        report.new_ids.push_back(id);
        report.det_to_track[c] = id;
    }
    return report;
}

MatchReport step(TrackerVariant v, TrackletPool& pool, const std::vector<Detection>& dets,
                 const AssociationConfig& cfg) {
    return v == TrackerVariant::fused ? step_fused(pool, dets, cfg) : step_byte(pool, dets, cfg);
}

const TrackEntry* FrameTracks::find(int id) const {
    for (const TrackEntry& e : entries) {
        if (e.id == id) return &e;
    }
    return nullptr;
}

FrameTracks snapshot(const TrackletPool& pool, const MatchReport& report) {
    FrameTracks out;
    out.frame = pool.frame_index;
    for (std::size_t c = 0; c < report.det_to_track.size(); ++c) {
        const int id = report.det_to_track[c];
        if (id < 0) continue;
        const Tracklet* t = pool.find(id);
        if (!t || !t->confirmed) continue;
        out.entries.push_back({id, t->box(), t->score, t->gt_id, static_cast<int>(c)});
    }
    std::sort(out.entries.begin(), out.entries.end(),
              [](const TrackEntry& a, const TrackEntry& b) { return a.id < b.id; });
    return out;
}

TrackHistory run_video(const std::vector<std::vector<Detection>>& frames, const AssociationConfig& cfg,
                       TrackerVariant variant) {
    validate(cfg);
    TrackletPool pool;
    TrackHistory history;
    history.reserve(frames.size());
    for (const auto& dets : frames) {
        const MatchReport r = step(variant, pool, dets, cfg);
        history.push_back(snapshot(pool, r));
    }
    return history;
}

void write_mot_results(std::ostream& out, const TrackHistory& history) {
    const auto flags = out.flags();
    const auto prec = out.precision();
    out << std::fixed << std::setprecision(2);
    for (const FrameTracks& f : history) {
        for (const TrackEntry& e : f.entries) {
            out << f.frame << ',' << e.id << ',' << e.box.x1 << ',' << e.box.y1 << ',' << e.box.width() << ','
                << e.box.height() << ',' << e.score << ",-1,-1,-1\n";
        }
    }
    out.flags(flags);
    out.precision(prec);
}

}  // namespace tracklab
