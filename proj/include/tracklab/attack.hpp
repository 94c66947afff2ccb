#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tracklab/tracker.hpp"
#include "tracklab/world.hpp"

namespace tracklab {

struct AttackSwitches {
    bool pp = true;  // PushPull feature loss
    bool cl = true;  // CenterLeaping heat loss and the size/offset regression
    bool fn = true;  // keep the noise of frames whose inner loop failed
};

enum class AttackerKind { none, trasw, ranat, detat, hijack };

std::string to_string(AttackerKind k);
// Throws std::invalid_argument listing the known attackers.
AttackerKind parse_attacker(const std::string& name);

struct AttackConfig {
    double thr_iou = 0.2;
    int thr_frame = 10;
    int thr_iter = 60;
    std::vector<int> schedule{10, 20, 30, 35, 40, 45, 50, 55};
    double gamma = 2.0;
    int max_frames = 20;
    AttackSwitches switches;
    double hijack_shift = 1.0;  // cells between the erased and the fabricated center
    double ranat_min_l2 = 2.0;
    double ranat_max_l2 = 8.0;
    std::uint64_t seed = 0;
};

// Throws std::invalid_argument for inconsistent settings, including PushPull on
// the motion-only tracker and a non-positive Hijack shift.
void validate(const AttackConfig& cfg, TrackerVariant variant, AttackerKind kind = AttackerKind::trasw);

struct NineBlock {
    static constexpr std::array<std::pair<int, int>, 9> offsets{
        {{-1, -1}, {0, -1}, {1, -1}, {-1, 0}, {0, 0}, {1, 0}, {-1, 1}, {0, 1}, {1, 1}}};
};

struct CellXY {
    int gx = 0;
    int gy = 0;
    bool operator==(const CellXY&) const = default;
};

/// Heated point walking from `start` toward `goal` (c_k) along an 8-connected
/// line, one cell per leap.
struct LeapState {
    CellXY start;
    CellXY goal;
    int steps = 0;
    CellXY pos;

    static LeapState begin(CellXY start, CellXY goal) { return {start, goal, 0, start}; }
};

LeapState advance_leap(const LeapState& s, int iter, const std::vector<int>& schedule);

// ---- losses ---------------------------------------------------------------

double pushpull_loss(const Feature& a_i, const Feature& a_j, const Feature& f_i, const Feature& f_j);

// Sum of the PushPull terms over the nine-block around each center. Cells that
// fall outside the grid or hold a zero feature contribute nothing.
double pp_nineblock(const Feature& a_i, const Feature& a_j, const FeatureGrid& featmap, CellXY c_i, CellXY c_j);

// Focal heating over the nine-blocks of `heat_points` and cooling over those of
// `cool_points`. Heat values are read as given; log arguments are clamped.
double centerleap_loss(const DenseGrid& heat, const std::vector<CellXY>& heat_points,
                       const std::vector<CellXY>& cool_points, double gamma);

inline constexpr double kLogEps = 1e-6;

struct RegTarget {
    CellXY cell;
    double w = 0.0;
    double h = 0.0;
    double offx = 0.0;
    double offy = 0.0;
};

/// Smooth-L1 of the size and offset channels at each target cell.
double reg_loss(const DenseGrid& sizemap, const DenseGrid& offmap, const std::vector<RegTarget>& targets);

struct PushPullTerm {
    Feature a_i;
    Feature a_j;
    CellXY c_i;
    CellXY c_j;
};

/// Everything the loss needs at one inner iteration.
struct Objective {
    std::optional<PushPullTerm> pp;
    std::vector<CellXY> heat;
    std::vector<CellXY> cool;
    std::vector<RegTarget> reg;
    double gamma = 2.0;
};

struct LossParts {
    double pp = 0.0;
    double cl = 0.0;
    double reg = 0.0;
    double total() const { return pp + cl + reg; }
};

LossParts loss_parts(const SensorMaps& maps, const Perturbation& pert, const Objective& obj);
double total_loss(const SensorMaps& maps, const Perturbation& pert, const Objective& obj);
// Analytic gradient of total_loss with respect to every perturbation entry. The
// heat clip passes gradients straight through.
Perturbation grad_total(const SensorMaps& maps, const Perturbation& pert, const Objective& obj);

// pert -= grad / ||grad||. Returns false and leaves pert unchanged when the gradient is zero.
bool gradient_step(Perturbation& pert, const Perturbation& grad);

// ---- inner loop -----------------------------------------------------------

/// Objective whose heated points may leap during the inner loop.
struct AttackPlan {
    Objective fixed;
    struct Leap {
        LeapState state;
        std::optional<RegTarget> reg;  // follows the leaping cell
    };
    std::vector<Leap> leaps;

    Objective objective() const;
    void advance(int iter, const std::vector<int>& schedule);
};

/// Decides whether the tracker already errs on a candidate frame: id_att is
/// associated with a detection that best overlaps some other clean object, or,
/// when `unmatched_counts` is set, with no detection at all.
struct MistakeCheck {
    const TrackletPool* prev = nullptr;  // adversarial pool before this frame
    TrackerVariant variant = TrackerVariant::fused;
    const AssociationConfig* assoc = nullptr;
    double det_threshold = 0.4;
    int id_att = 0;
    std::vector<Detection> clean;  // clean detections of this frame
    int target_det = -1;           // index in `clean` of the attacked object
    bool unmatched_counts = false;  // whether losing the tracklet is already a mistake

    bool operator()(const SensorMaps& perturbed) const;
};

struct NoiseResult {
    Perturbation pert;
    int iterations = 0;
    bool erred = false;    // the tracker made the intended mistake
    bool stalled = false;  // the gradient vanished before the loop ended
    double loss_first = 0.0;
    double loss_last = 0.0;
};

NoiseResult noise_generator(const SensorMaps& maps, AttackPlan plan, const MistakeCheck& check,
                            const AttackConfig& cfg);

// ---- attack loop helpers ---------------------------------------------------

// Active tracklet (other than id_att) whose box overlaps id_att's box most.
std::optional<int> find_max_iou(const TrackletPool& pool, int id_att);
bool check_fit(const TrackletPool& orig, const TrackletPool& adv, int id_att);

// ---- runs -------------------------------------------------------------------

/// Clean video in sensor space.
struct Scene {
    GridShape shape;
    std::vector<FrameTruth> truth;
    std::vector<SensorMaps> maps;
};

Scene make_scene(const ScenarioSpec& spec);
Scene make_scene(const std::vector<FrameTruth>& truth, const GridShape& shape);

/// Detector threshold used by each tracker variant.
double decode_threshold(TrackerVariant v, const AssociationConfig& assoc);

std::vector<Detection> detect(const SensorMaps& maps, const FrameTruth& truth, double threshold);

TrackHistory clean_history(const Scene& scene, TrackerVariant v, const AssociationConfig& assoc);

struct PairDistances {
    double feat_own = -1.0;  // d_feat(tracklet id_att, its object); -1 when undefined
    double feat_scr = -1.0;  // d_feat(tracklet id_att, screener object)
    double box_own = -1.0;   // squared Mahalanobis distance
    double box_scr = -1.0;
};

struct FrameRecord {
    int frame = 0;
    bool exist_ok = false;
    bool fit_ok = false;
    bool iou_ok = false;
    int id_scr = -1;
    double iou = 0.0;
    double thr_iou = 0.0;  // threshold in force at this frame
    bool attempted = false;
    bool attacked = false;  // nonzero noise applied
    int iterations = 0;
    bool erred = false;
    bool stalled = false;
    double loss_first = 0.0;
    double loss_last = 0.0;
    double pert_l2 = 0.0;
    PairDistances original;
    PairDistances adversarial;
};

struct AttackTrace {
    AttackerKind attacker = AttackerKind::trasw;
    TrackerVariant tracker = TrackerVariant::fused;
    int id_att = 0;
    int target_gt = -1;
    std::vector<FrameRecord> frames;
    std::vector<int> attacked_frames;
    double total_l2 = 0.0;
    int switch_frame = -1;  // first attacked frame after which the target never returns
    bool success = false;
    bool held_to_end = false;
    TrackHistory clean;
    TrackHistory adversarial;
    std::vector<std::pair<int, Perturbation>> noise;  // kept only when requested

    int attacked_count() const { return static_cast<int>(attacked_frames.size()); }
};

struct RunOptions {
    bool keep_noise = false;
};

// Throws std::invalid_argument when id_att never appears in the clean run.
AttackTrace run_attack(AttackerKind kind, const Scene& scene, int id_att, TrackerVariant variant,
                       const AssociationConfig& assoc, const AttackConfig& cfg, const RunOptions& opts = {});

AttackTrace run_trasw(const Scene& scene, int id_att, TrackerVariant variant, const AssociationConfig& assoc,
                      const AttackConfig& cfg, const RunOptions& opts = {});
AttackTrace run_ranat(const Scene& scene, int id_att, TrackerVariant variant, const AssociationConfig& assoc,
                      const AttackConfig& cfg, const RunOptions& opts = {});
AttackTrace run_detat(const Scene& scene, int id_att, TrackerVariant variant, const AssociationConfig& assoc,
                      const AttackConfig& cfg, const RunOptions& opts = {});
AttackTrace run_hijack(const Scene& scene, int id_att, TrackerVariant variant, const AssociationConfig& assoc,
                       const AttackConfig& cfg, const RunOptions& opts = {});

}  // namespace tracklab
