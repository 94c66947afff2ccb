#include "tracklab/metrics.hpp"

#include <algorithm>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>

#include "tracklab/geometry.hpp"

namespace tracklab {

namespace {

std::map<int, int> presence(const TrackHistory& history) {
    std::map<int, int> count;
    for (const FrameTracks& f : history) {
        for (const TrackEntry& e : f.entries) ++count[e.id];
    }
    return count;
}

}  // namespace

std::vector<int> persistent_ids(const TrackHistory& history, int thr_frame) {
    std::vector<int> out;
    for (const auto& [id, n] : presence(history)) {
        if (n > thr_frame) out.push_back(id);
    }
    return out;
}

std::vector<int> attackable_ids(const TrackHistory& history, int thr_frame, double thr_iou) {
    std::map<int, int> seen;
    std::set<int> hit;
    for (const FrameTracks& f : history) {
        for (const TrackEntry& e : f.entries) ++seen[e.id];
        for (const TrackEntry& a : f.entries) {
            if (seen[a.id] <= thr_frame || hit.count(a.id)) continue;
            for (const TrackEntry& b : f.entries) {
                if (b.id != a.id && iou(a.box, b.box) > thr_iou) {
                    hit.insert(a.id);
                    break;
                }
            }
        }
    }
    return {hit.begin(), hit.end()};
}

std::vector<double> attackable_proportion_curve(const TrackHistory& history, int thr_frame,
                                                const std::vector<double>& iou_grid) {
    const double base = static_cast<double>(persistent_ids(history, thr_frame).size());
    std::vector<double> out;
    for (double thr : iou_grid) {
        out.push_back(base > 0 ? attackable_ids(history, thr_frame, thr).size() / base : 0.0);
    }
    return out;
}

int id_switches(const TrackHistory& history) {
    std::map<int, int> last;
    int n = 0;
    for (const FrameTracks& f : history) {
        for (const TrackEntry& e : f.entries) {
            if (e.gt_id < 0) continue;
            auto it = last.find(e.gt_id);
            if (it != last.end() && it->second != e.id) ++n;
            last[e.gt_id] = e.id;
        }
    }
    return n;
}

int dominant_gt(const TrackHistory& history, int id) {
    std::map<int, int> votes;
    for (const FrameTracks& f : history) {
        const TrackEntry* e = f.find(id);
        if (e && e->gt_id >= 0) ++votes[e->gt_id];
    }
    int best = -1;
    int best_n = 0;
    for (const auto& [gt, n] : votes) {
        if (n > best_n) {
            best = gt;
            best_n = n;
        }
    }
    return best;
}

Verdict judge_success(const TrackHistory& clean, const TrackHistory& adversarial, int id_att, int target_gt,
                      int last_attack_frame) {
    Verdict v;
    if (last_attack_frame < 1 || adversarial.empty()) return v;
    // Only a loss the clean run does not suffer on its own is credited to the attack.
    bool kept = false;
    for (const FrameTracks& f : clean) {
        if (f.frame <= last_attack_frame) continue;
        const TrackEntry* e = f.find(id_att);
        kept = kept || (e && e->gt_id == target_gt);
    }
    if (!kept) return v;
    int last_gt = -1;
    for (const FrameTracks& f : adversarial) {
        if (f.frame <= last_attack_frame) continue;
        const TrackEntry* e = f.find(id_att);
        if (!e) continue;
        if (e->gt_id == target_gt) return v;
        last_gt = e->gt_id;
    }
    v.success = true;
    v.held_to_end = last_gt >= 0;
    return v;
}

SuiteReport aggregate(const std::vector<AttackOutcome>& outcomes, const std::vector<int>& caps) {
    SuiteReport r;
    r.ids_att = static_cast<int>(outcomes.size());
    double frames = 0.0;
    double l2 = 0.0;
    for (const AttackOutcome& o : outcomes) {
        if (o.held_to_end) ++r.held;
        if (!o.success) continue;
        ++r.successes;
        frames += o.attacked_frames;
        l2 += o.total_l2;
    }
    if (r.ids_att > 0) r.succ_pct = 100.0 * r.successes / r.ids_att;
    if (r.successes > 0) {
        r.mean_frames = frames / r.successes;
        r.mean_l2 = l2 / r.successes;
    }
    for (int cap : caps) {
        const auto n = std::count_if(outcomes.begin(), outcomes.end(),
                                     [cap](const AttackOutcome& o) { return o.success && o.attacked_frames <= cap; });
        r.succ_at_cap.emplace_back(cap, r.ids_att > 0 ? 100.0 * n / r.ids_att : 0.0);
    }
    return r;
}

void write_report_csv_header(std::ostream& out, const std::vector<int>& caps) {
    out << "tracker,attacker,suite,ids_att,successes,succ_pct,mean_frames,mean_l2,held_to_end";
    for (int c : caps) out << ",succ_at_" << c;
    out << '\n';
}

void write_report_csv_row(std::ostream& out, const SuiteReport& r) {
    const auto flags = out.flags();
    out << std::fixed << std::setprecision(4);
    out << r.tracker << ',' << r.attacker << ',' << r.suite << ',' << r.ids_att << ',' << r.successes << ','
        << r.succ_pct << ',';
    if (r.mean_frames) {
        out << *r.mean_frames;
    } else {
        out << "NA";
    }
    out << ',';
    if (r.mean_l2) {
        out << *r.mean_l2;
    } else {
        out << "NA";
    }
    out << ',' << r.held;
    for (const auto& [cap, pct] : r.succ_at_cap) out << ',' << pct;
    out << '\n';
    out.flags(flags);
}

}  // namespace tracklab
