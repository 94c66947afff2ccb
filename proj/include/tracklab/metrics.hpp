#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tracklab/tracker.hpp"

namespace tracklab {

// Ids that persist more than thr_frame frames and, at a frame where they already
// have, overlap another tracked object with IoU > thr_iou.
std::vector<int> attackable_ids(const TrackHistory& history, int thr_frame, double thr_iou);

// Ids present in more than thr_frame frames.
std::vector<int> persistent_ids(const TrackHistory& history, int thr_frame);

std::vector<double> attackable_proportion_curve(const TrackHistory& history, int thr_frame,
                                                const std::vector<double>& iou_grid);

// Number of times a ground-truth identity changes its tracklet id between consecutive appearances.
int id_switches(const TrackHistory& history);

/// Most frequent ground-truth identity carried by `id` in the history (-1 when none).
int dominant_gt(const TrackHistory& history, int id);

struct Verdict {
    bool success = false;
    bool held_to_end = false;
};

// success: after last_attack_frame no detection of target_gt carries id_att, while the clean run
// still gives id_att to target_gt at least once in that window.
// held_to_end: success and the last appearance of id_att after the attack is on another identity.
// Without any attacked frame (last_attack_frame < 1) the verdict is always negative.
Verdict judge_success(const TrackHistory& clean, const TrackHistory& adversarial, int id_att, int target_gt,
                      int last_attack_frame);

struct AttackOutcome {
    int id = 0;
    bool success = false;
    int attacked_frames = 0;
    double total_l2 = 0.0;
    int switch_frame = -1;
    bool held_to_end = false;
};

inline const std::vector<int> kFrameCaps{1, 5, 10, 15, 20};

struct SuiteReport {
    std::string tracker;
    std::string attacker;
    std::string suite;
    int ids_att = 0;
    int successes = 0;
    int held = 0;
    double succ_pct = 0.0;
    std::optional<double> mean_frames;  // over successes only
    std::optional<double> mean_l2;
    std::vector<std::pair<int, double>> succ_at_cap;  // percent of ids_att
};

// Success within a cap means success using at most `cap` attacked frames.
SuiteReport aggregate(const std::vector<AttackOutcome>& outcomes, const std::vector<int>& caps = kFrameCaps);

void write_report_csv_header(std::ostream& out, const std::vector<int>& caps = kFrameCaps);
void write_report_csv_row(std::ostream& out, const SuiteReport& r);

}  // namespace tracklab
