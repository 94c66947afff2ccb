#include "tracklab/attack.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <random>
#include <stdexcept>

#include "tracklab/kernels.hpp"
#include "tracklab/metrics.hpp"

namespace tracklab {

std::string to_string(AttackerKind k) {
    switch (k) {
        case AttackerKind::none: return "none";
        case AttackerKind::trasw: return "trasw";
        case AttackerKind::ranat: return "ranat";
        case AttackerKind::detat: return "detat";
        case AttackerKind::hijack: return "hijack";
    }
    return "none";
}

AttackerKind parse_attacker(const std::string& name) {
    for (AttackerKind k : {AttackerKind::none, AttackerKind::trasw, AttackerKind::ranat, AttackerKind::detat,
                           AttackerKind::hijack}) {
        if (to_string(k) == name) return k;
    }
    throw std::invalid_argument("unknown attacker '" + name + "' (known: none, trasw, ranat, detat, hijack)");
}

void validate(const AttackConfig& cfg, TrackerVariant variant, AttackerKind kind) {
    if (!(cfg.thr_iou >= 0.0 && cfg.thr_iou <= 1.0)) throw std::invalid_argument("thr_iou must lie in [0, 1]");
    if (cfg.thr_frame < 0) throw std::invalid_argument("thr_frame must be >= 0");
    if (cfg.thr_iter < 0) throw std::invalid_argument("thr_iter must be >= 0");
    if (cfg.max_frames < 0) throw std::invalid_argument("max_frames must be >= 0");
    if (!(cfg.gamma >= 1.0)) throw std::invalid_argument("gamma must be >= 1");
    for (std::size_t i = 0; i < cfg.schedule.size(); ++i) {
        if (cfg.schedule[i] < 1 || (i > 0 && cfg.schedule[i] <= cfg.schedule[i - 1])) {
            throw std::invalid_argument("leap schedule must be positive and strictly increasing");
        }
    }
    if (variant == TrackerVariant::byte && cfg.switches.pp && kind == AttackerKind::trasw) {
        throw std::invalid_argument("PushPull needs re-ID features; the byte tracker has none (disable pp)");
    }
    if (kind == AttackerKind::hijack && !(cfg.hijack_shift > 0.0)) {
        throw std::invalid_argument("hijack_shift must be positive");
    }
    if (kind == AttackerKind::ranat && !(cfg.ranat_min_l2 > 0.0 && cfg.ranat_min_l2 <= cfg.ranat_max_l2)) {
        throw std::invalid_argument("RanAt noise bounds must satisfy 0 < min <= max");
    }
}

LeapState advance_leap(const LeapState& s, int iter, const std::vector<int>& schedule) {
    if (s.pos == s.goal || !std::binary_search(schedule.begin(), schedule.end(), iter)) return s;
    LeapState out = s;
    const int dx = s.goal.gx - s.start.gx;
    const int dy = s.goal.gy - s.start.gy;
    const int n = std::max(std::abs(dx), std::abs(dy));
    out.steps = std::min(n, s.steps + 1);
    const double t = static_cast<double>(out.steps) / n;
    out.pos = {s.start.gx + static_cast<int>(std::lround(t * dx)), s.start.gy + static_cast<int>(std::lround(t * dy))};
    return out;
}

// ---------------------------------------------------------------------------
// Losses

namespace {

double clip01(double v) { return std::clamp(v, 0.0, 1.0); }

double heat_term(double m, double gamma) {
    const double mc = std::clamp(m, kLogEps, 1.0 - kLogEps);
    return -std::pow(1.0 - m, gamma) * std::log(mc);
}

double heat_term_grad(double m, double gamma) {
    const double mc = std::clamp(m, kLogEps, 1.0 - kLogEps);
    double g = gamma * std::pow(1.0 - m, gamma - 1.0) * std::log(mc);
    if (m > kLogEps && m < 1.0 - kLogEps) g -= std::pow(1.0 - m, gamma) / mc;
    return g;
}

double cool_term(double m, double gamma) {
    const double mc = std::clamp(m, kLogEps, 1.0 - kLogEps);
    return -std::pow(m, gamma) * std::log(1.0 - mc);
}

double cool_term_grad(double m, double gamma) {
    const double mc = std::clamp(m, kLogEps, 1.0 - kLogEps);
    double g = -gamma * std::pow(m, gamma - 1.0) * std::log(1.0 - mc);
    if (m > kLogEps && m < 1.0 - kLogEps) g += std::pow(m, gamma) / (1.0 - mc);
    return g;
}

// Feature at a cell after perturbation (empty when both sides are unallocated).
std::vector<double> perturbed_feature(const FeatureGrid& base, const FeatureGrid& delta, int gx, int gy) {
    const auto b = base.cell(gx, gy);
    const auto d = delta.cell(gx, gy);
    if (b.empty() && d.empty()) return {};
    std::vector<double> f(static_cast<std::size_t>(base.dim()), 0.0);
    for (std::size_t i = 0; i < b.size(); ++i) f[i] += b[i];
    for (std::size_t i = 0; i < d.size(); ++i) f[i] += d[i];
    return f;
}

double heat_at(const SensorMaps& maps, const Perturbation& pert, int gx, int gy) {
    return clip01(maps.heat.at(gx, gy) + pert.heat.at(gx, gy));
}

// Each cell of the nine-block around c that lies on the grid.
template <typename F>
void for_block(const GridShape& shape, CellXY c, F&& fn) {
    for (const auto& [dx, dy] : NineBlock::offsets) {
        const int gx = c.gx + dx;
        const int gy = c.gy + dy;
        if (shape.contains(gx, gy)) fn(gx, gy);
    }
}

// pp cell term: sign * (a_i - a_j) . u with u the unit feature; sign +1 on the
// attack block, -1 on the screener block.
struct PpCell {
    int gx;
    int gy;
    double sign;
};

std::vector<PpCell> pp_cells(const GridShape& shape, const PushPullTerm& pp) {
    std::vector<PpCell> cells;
    for_block(shape, pp.c_i, [&](int gx, int gy) { cells.push_back({gx, gy, 1.0}); });
    for_block(shape, pp.c_j, [&](int gx, int gy) { cells.push_back({gx, gy, -1.0}); });
    return cells;
}

}  // namespace

double pushpull_loss(const Feature& a_i, const Feature& a_j, const Feature& f_i, const Feature& f_j) {
    return (cosine_distance(a_i, f_j) - cosine_distance(a_i, f_i)) +
           (cosine_distance(a_j, f_i) - cosine_distance(a_j, f_j));
}

double pp_nineblock(const Feature& a_i, const Feature& a_j, const FeatureGrid& featmap, CellXY c_i, CellXY c_j) {
    const GridShape shape{featmap.width(), featmap.height(), 1, featmap.dim()};
    double loss = 0.0;
    auto side = [&](CellXY c, const Feature& own, const Feature& other) {
        for_block(shape, c, [&](int gx, int gy) {
            const auto f = featmap.cell(gx, gy);
            if (f.empty() || !(l2_norm(f) > 0.0)) return;
            const Feature u = Feature::normalized(f);
            // Terms of the pair loss that read this feature.
            loss += cosine_distance(other, u) - cosine_distance(own, u);
        });
    };
    side(c_i, a_i, a_j);
    side(c_j, a_j, a_i);
    return loss;
}

double centerleap_loss(const DenseGrid& heat, const std::vector<CellXY>& heat_points,
                       const std::vector<CellXY>& cool_points, double gamma) {
    const GridShape shape{heat.width(), heat.height(), 1, 1};
    double loss = 0.0;
    for (CellXY c : heat_points) for_block(shape, c, [&](int gx, int gy) { loss += heat_term(heat.at(gx, gy), gamma); });
    for (CellXY c : cool_points) for_block(shape, c, [&](int gx, int gy) { loss += cool_term(heat.at(gx, gy), gamma); });
    return loss;
}

double reg_loss(const DenseGrid& sizemap, const DenseGrid& offmap, const std::vector<RegTarget>& targets) {
    double loss = 0.0;
    for (const RegTarget& t : targets) {
        const int gx = t.cell.gx;
        const int gy = t.cell.gy;
        if (gx < 0 || gy < 0 || gx >= sizemap.width() || gy >= sizemap.height()) continue;
        loss += smooth_l1(sizemap.at(gx, gy, 0), t.w) + smooth_l1(sizemap.at(gx, gy, 1), t.h);
        loss += smooth_l1(offmap.at(gx, gy, 0), t.offx) + smooth_l1(offmap.at(gx, gy, 1), t.offy);
    }
    return loss;
}

LossParts loss_parts(const SensorMaps& maps, const Perturbation& pert, const Objective& obj) {
    LossParts parts;
    const GridShape& shape = maps.shape;
    if (obj.pp) {
        for (const PpCell& c : pp_cells(shape, *obj.pp)) {
            const std::vector<double> f = perturbed_feature(maps.feat, pert.feat, c.gx, c.gy);
            if (f.empty()) continue;
            const double n = l2_norm(f);
            if (!(n > 0.0)) continue;
            const double ai = dot(obj.pp->a_i.values(), f) / n;
            const double aj = dot(obj.pp->a_j.values(), f) / n;
            parts.pp += c.sign * (ai - aj);
        }
    }
    for (CellXY c : obj.heat) {
        for_block(shape, c, [&](int gx, int gy) { parts.cl += heat_term(heat_at(maps, pert, gx, gy), obj.gamma); });
    }
    for (CellXY c : obj.cool) {
        for_block(shape, c, [&](int gx, int gy) { parts.cl += cool_term(heat_at(maps, pert, gx, gy), obj.gamma); });
    }
    for (const RegTarget& t : obj.reg) {
        if (!shape.contains(t.cell.gx, t.cell.gy)) continue;
        const int gx = t.cell.gx;
        const int gy = t.cell.gy;
        parts.reg += smooth_l1(maps.size.at(gx, gy, 0) + pert.size.at(gx, gy, 0), t.w);
        parts.reg += smooth_l1(maps.size.at(gx, gy, 1) + pert.size.at(gx, gy, 1), t.h);
        parts.reg += smooth_l1(maps.off.at(gx, gy, 0) + pert.off.at(gx, gy, 0), t.offx);
        parts.reg += smooth_l1(maps.off.at(gx, gy, 1) + pert.off.at(gx, gy, 1), t.offy);
    }
    return parts;
}

double total_loss(const SensorMaps& maps, const Perturbation& pert, const Objective& obj) {
    return loss_parts(maps, pert, obj).total();
}

Perturbation grad_total(const SensorMaps& maps, const Perturbation& pert, const Objective& obj) {
    const GridShape& shape = maps.shape;
    Perturbation g(shape);
    if (obj.pp) {
        const auto ai = obj.pp->a_i.values();
        const auto aj = obj.pp->a_j.values();
        for (const PpCell& c : pp_cells(shape, *obj.pp)) {
            const std::vector<double> f = perturbed_feature(maps.feat, pert.feat, c.gx, c.gy);
            if (f.empty()) continue;
            const double n = l2_norm(f);
            if (!(n > 0.0)) continue;
            // d/df of (b . f/|f|) = (b - (b.u) u) / |f|, b = sign (a_i - a_j)
            double bu = 0.0;
            for (std::size_t k = 0; k < f.size(); ++k) bu += c.sign * (ai[k] - aj[k]) * f[k] / n;
            auto dst = g.feat.cell_mut(c.gx, c.gy);
            for (std::size_t k = 0; k < f.size(); ++k) {
                const double b = c.sign * (ai[k] - aj[k]);
                dst[k] += (b - bu * f[k] / n) / n;
            }
        }
    }
    for (CellXY c : obj.heat) {
        for_block(shape, c, [&](int gx, int gy) {
            g.heat.at(gx, gy) += heat_term_grad(heat_at(maps, pert, gx, gy), obj.gamma);
        });
    }
    for (CellXY c : obj.cool) {
        for_block(shape, c, [&](int gx, int gy) {
            g.heat.at(gx, gy) += cool_term_grad(heat_at(maps, pert, gx, gy), obj.gamma);
        });
    }
    for (const RegTarget& t : obj.reg) {
        if (!shape.contains(t.cell.gx, t.cell.gy)) continue;
        const int gx = t.cell.gx;
        const int gy = t.cell.gy;
        g.size.at(gx, gy, 0) += smooth_l1_grad(maps.size.at(gx, gy, 0) + pert.size.at(gx, gy, 0), t.w);
        g.size.at(gx, gy, 1) += smooth_l1_grad(maps.size.at(gx, gy, 1) + pert.size.at(gx, gy, 1), t.h);
        g.off.at(gx, gy, 0) += smooth_l1_grad(maps.off.at(gx, gy, 0) + pert.off.at(gx, gy, 0), t.offx);
        g.off.at(gx, gy, 1) += smooth_l1_grad(maps.off.at(gx, gy, 1) + pert.off.at(gx, gy, 1), t.offy);
    }
    return g;
}

bool gradient_step(Perturbation& pert, const Perturbation& grad) {
    const double norm = pert_l2(grad);
    if (!(norm > 0.0) || !std::isfinite(norm)) return false;
    const double a = -1.0 / norm;
    kernels::axpy(a, grad.heat.data(), pert.heat.data());
    kernels::axpy(a, grad.size.data(), pert.size.data());
    kernels::axpy(a, grad.off.data(), pert.off.data());
    const auto& cells = grad.feat.allocated_cells();
    for (std::size_t slot = 0; slot < cells.size(); ++slot) {
        const int gx = cells[slot] % grad.shape.width;
        const int gy = cells[slot] / grad.shape.width;
        kernels::axpy(a, grad.feat.slot_data(slot), pert.feat.cell_mut(gx, gy));
    }
    return true;
}

// ---------------------------------------------------------------------------
// Inner loop

Objective AttackPlan::objective() const {
    Objective obj = fixed;
    for (const Leap& l : leaps) {
        obj.heat.push_back(l.state.pos);
        if (l.reg) {
            RegTarget r = *l.reg;
            r.cell = l.state.pos;
            obj.reg.push_back(r);
        }
    }
    return obj;
}

void AttackPlan::advance(int iter, const std::vector<int>& schedule) {
    for (Leap& l : leaps) l.state = advance_leap(l.state, iter, schedule);
}

bool MistakeCheck::operator()(const SensorMaps& perturbed) const {
    const std::vector<Detection> dets = decode(perturbed, det_threshold);
    TrackletPool scratch = *prev;
    const MatchReport report = step(variant, scratch, dets, *assoc);
    const int d = report.det_of(id_att);
    if (d < 0) return unmatched_counts;
    int best = -1;
    double best_iou = 0.0;
    for (std::size_t c = 0; c < clean.size(); ++c) {
        const double v = iou(dets[d].box, clean[c].box);
        if (v > best_iou) {
            best_iou = v;
            best = static_cast<int>(c);
        }
    }
    return best >= 0 && best != target_det;
}

NoiseResult noise_generator(const SensorMaps& maps, AttackPlan plan, const MistakeCheck& check,
                            const AttackConfig& cfg) {
    NoiseResult r{Perturbation(maps.shape)};
    if (cfg.thr_iter <= 0) return r;
    if (check(maps)) {
        r.erred = true;
        return r;
    }
    Objective obj = plan.objective();
    r.loss_first = total_loss(maps, r.pert, obj);
    for (int it = 1; it <= cfg.thr_iter; ++it) {
        const Perturbation g = grad_total(maps, r.pert, obj);
        if (!gradient_step(r.pert, g)) {
            r.stalled = true;
            break;
        }
        r.iterations = it;
        plan.advance(it, cfg.schedule);
        obj = plan.objective();
        if (check(apply_perturbation(maps, r.pert))) {
            r.erred = true;
            break;
        }
    }
    r.loss_last = total_loss(maps, r.pert, obj);
    return r;
}

// ---------------------------------------------------------------------------
// Outer loop: gate each frame, then run the inner noise loop.

std::optional<int> find_max_iou(const TrackletPool& pool, int id_att) {
    const Tracklet* a = pool.find(id_att);
    if (!a) return std::nullopt;
    const BoxTLBR box = a->box();
    std::optional<int> best;
    double best_iou = 0.0;
    for (const Tracklet& t : pool.tracklets) {
        if (t.id == id_att || t.status != TrackStatus::active || !t.confirmed) continue;
        const double v = iou(box, t.box());
        if (v > best_iou) {
            best_iou = v;
            best = t.id;
        }
    }
    return best;
}

bool check_fit(const TrackletPool& orig, const TrackletPool& adv, int id_att) {
    const Tracklet* a = orig.find(id_att);
    const Tracklet* b = adv.find(id_att);
    if (!a || !b) return false;
    return iou(a->box(), b->box()) > 0.5;
}

Scene make_scene(const std::vector<FrameTruth>& truth, const GridShape& shape) {
    Scene s;
    s.shape = shape;
    s.truth = truth;
    s.maps.reserve(truth.size());
    for (const FrameTruth& f : truth) s.maps.push_back(render_maps(f, shape));
    return s;
}

Scene make_scene(const ScenarioSpec& spec) { return make_scene(gen_scenario(spec), spec.grid_shape()); }

double decode_threshold(TrackerVariant v, const AssociationConfig& assoc) {
    return v == TrackerVariant::byte ? assoc.det_low : 0.4;
}

std::vector<Detection> detect(const SensorMaps& maps, const FrameTruth& truth, double threshold) {
    std::vector<Detection> dets = decode(maps, threshold);
    attribute_gt(dets, truth);
    return dets;
}

TrackHistory clean_history(const Scene& scene, TrackerVariant v, const AssociationConfig& assoc) {
    std::vector<std::vector<Detection>> frames;
    const double thr = decode_threshold(v, assoc);
    for (std::size_t t = 0; t < scene.maps.size(); ++t) frames.push_back(detect(scene.maps[t], scene.truth[t], thr));
    TrackHistory h = run_video(frames, assoc, v);
    for (std::size_t t = 0; t < h.size(); ++t) h[t].frame = scene.truth[t].frame;
    return h;
}

namespace {

CellXY cell_of_index(int idx, const GridShape& shape) { return {idx % shape.width, idx / shape.width}; }

CellXY cell_of_point(Point2 p, const GridShape& shape) {
    const int gx = static_cast<int>(std::floor(p.x / shape.stride));
    const int gy = static_cast<int>(std::floor(p.y / shape.stride));
    return {std::clamp(gx, 0, shape.width - 1), std::clamp(gy, 0, shape.height - 1)};
}

double frac_offset(double v, int stride) {
    const double g = v / stride;
    return g - std::floor(g);
}

PairDistances pair_distances(const TrackletPool& prev, int id_att, const std::vector<Detection>& dets, int gt_own,
                             int gt_scr, const AssociationConfig& assoc) {
    PairDistances d;
    const Tracklet* t = prev.find(id_att);
    if (!t) return d;
    const MotionState pred = kf_predict(t->motion, assoc.kalman);
    for (const Detection& det : dets) {
        if (det.gt_id < 0 || (det.gt_id != gt_own && det.gt_id != gt_scr)) continue;
        const bool own = det.gt_id == gt_own;
        double feat = -1.0;
        if (t->appearance && det.feature) feat = cosine_distance(t->appearance->smoothed, *det.feature);
        const double box = mahalanobis(pred, tlbr_to_xyah(det.box), assoc.kalman).value_or(-1.0);
        (own ? d.feat_own : d.feat_scr) = feat;
        (own ? d.box_own : d.box_scr) = box;
    }
    return d;
}

// The ground-truth identity that overlaps the target most over the video.
int partner_gt(const Scene& scene, int target_gt) {
    int best = -1;
    double best_iou = 0.0;
    for (const FrameTruth& f : scene.truth) {
        const AgentTruth* me = nullptr;
        for (const AgentTruth& a : f.agents) {
            if (a.gt_id == target_gt) me = &a;
        }
        if (!me) continue;
        for (const AgentTruth& a : f.agents) {
            if (a.gt_id == target_gt) continue;
            const double v = iou(me->box, a.box);
            if (v > best_iou) {
                best_iou = v;
                best = a.gt_id;
            }
        }
    }
    return best;
}

struct FrameInputs {
    const SensorMaps& maps;
    const std::vector<Detection>& clean;
    const TrackletPool& orig;
    const TrackletPool& adv_prev;
    const MatchReport& orig_report;
    int id_att;
    int id_scr;
};

// Noise for one gated frame; a zero perturbation means the frame is left clean.
struct FrameNoise {
    Perturbation pert;
    int iterations = 0;
    bool erred = false;
    bool stalled = false;
    double loss_first = 0.0;
    double loss_last = 0.0;
};

class Attacker {
public:
    Attacker(AttackerKind kind, TrackerVariant variant, const AssociationConfig& assoc, const AttackConfig& cfg)
        : kind_(kind), variant_(variant), assoc_(assoc), cfg_(cfg), rng_(cfg.seed * 2654435761ULL + 97) {}

    FrameNoise generate(const FrameInputs& in) {
        FrameNoise out{Perturbation(in.maps.shape)};
        const int det_i = in.orig_report.det_of(in.id_att);
        const int det_j = in.orig_report.det_of(in.id_scr);
        if (det_i < 0 || in.clean[det_i].cell < 0) return out;
        if (kind_ == AttackerKind::ranat) {
            out.pert = random_noise(in.maps);
            return out;
        }
        const std::optional<AttackPlan> plan = make_plan(in, det_i, det_j);
        if (!plan) return out;
        MistakeCheck check;
        check.prev = &in.adv_prev;
        check.variant = variant_;
        check.assoc = &assoc_;
        check.det_threshold = decode_threshold(variant_, assoc_);
        check.id_att = in.id_att;
        check.clean = in.clean;
        check.target_det = det_i;
        check.unmatched_counts = kind_ == AttackerKind::detat;
        NoiseResult r = noise_generator(in.maps, *plan, check, cfg_);
        out.iterations = r.iterations;
        out.erred = r.erred;
        out.stalled = r.stalled;
        out.loss_first = r.loss_first;
        out.loss_last = r.loss_last;
        if (r.erred || cfg_.switches.fn) out.pert = std::move(r.pert);
        return out;
    }

private:
    std::optional<AttackPlan> make_plan(const FrameInputs& in, int det_i, int det_j) {
        const GridShape& shape = in.maps.shape;
        const CellXY c_i = cell_of_index(in.clean[det_i].cell, shape);
        AttackPlan plan;
        plan.fixed.gamma = cfg_.gamma;
        if (kind_ == AttackerKind::detat) {
            // Nine-blocks tiled over the object's footprint, leaving other objects' centers alone.
            const BoxTLBR& box = in.clean[det_i].box;
            const int reach = std::max(1, static_cast<int>(std::lround(std::min(box.width(), box.height()) /
                                                                        (2.0 * shape.stride))));
            for (int oy = -reach; oy <= reach; oy += 3) {
                for (int ox = -reach; ox <= reach; ox += 3) {
                    const CellXY p{c_i.gx + ox, c_i.gy + oy};
                    if (!shape.contains(p.gx, p.gy)) continue;
                    bool clash = false;
                    for (std::size_t k = 0; k < in.clean.size(); ++k) {
                        if (static_cast<int>(k) == det_i || in.clean[k].cell < 0) continue;
                        const CellXY o = cell_of_index(in.clean[k].cell, shape);
                        clash = clash || (std::abs(o.gx - p.gx) <= 1 && std::abs(o.gy - p.gy) <= 1);
                    }
                    if (!clash) plan.fixed.cool.push_back(p);
                }
            }
            if (plan.fixed.cool.empty()) plan.fixed.cool.push_back(c_i);
            return plan;
        }
        const Tracklet* ti = in.adv_prev.find(in.id_att);
        const Tracklet* tj = in.adv_prev.find(in.id_scr);
        if (!ti || !tj) return std::nullopt;
        const MotionState pi = kf_predict(ti->motion, assoc_.kalman);
        const MotionState pj = kf_predict(tj->motion, assoc_.kalman);

        if (kind_ == AttackerKind::hijack) {
            const Point2 a = center(pi.tlbr());
            const Point2 b = center(pj.tlbr());
            const double dx = b.x - a.x;
            const double dy = b.y - a.y;
            const double n = std::hypot(dx, dy);
            if (!(n > 0.0)) return std::nullopt;
            const CellXY h{c_i.gx + static_cast<int>(std::lround(cfg_.hijack_shift * dx / n)),
                           c_i.gy + static_cast<int>(std::lround(cfg_.hijack_shift * dy / n))};
            if (!shape.contains(h.gx, h.gy) || h == c_i) return std::nullopt;
            const BoxTLBR& box = in.clean[det_i].box;
            const Point2 c = center(box);
            plan.fixed.cool.push_back(c_i);
            plan.fixed.heat.push_back(h);
            plan.fixed.reg.push_back({h, box.width(), box.height(), frac_offset(c.x, shape.stride),
                                      frac_offset(c.y, shape.stride)});
            return plan;
        }

        // TraSw
        if (det_j < 0 || in.clean[det_j].cell < 0) return std::nullopt;
        const CellXY c_j = cell_of_index(in.clean[det_j].cell, shape);
        if (cfg_.switches.pp && ti->appearance && tj->appearance) {
            plan.fixed.pp = PushPullTerm{ti->appearance->smoothed, tj->appearance->smoothed, c_i, c_j};
        }
        if (cfg_.switches.cl) {
            plan.fixed.cool = {c_i, c_j};
            auto leap = [&](const MotionState& opposing, CellXY goal) {
                const BoxTLBR b = opposing.tlbr();
                const Point2 c = center(b);
                AttackPlan::Leap l;
                l.state = LeapState::begin(cell_of_point(c, shape), goal);
                l.reg = RegTarget{{}, b.width(), b.height(), frac_offset(c.x, shape.stride),
                                  frac_offset(c.y, shape.stride)};
                return l;
            };
            plan.leaps.push_back(leap(pj, c_i));
            plan.leaps.push_back(leap(pi, c_j));
        }
        return plan;
    }

    Perturbation random_noise(const SensorMaps& maps) {
        Perturbation p(maps.shape);
        std::normal_distribution<double> n(0.0, 1.0);
        for (double& v : p.heat.data()) v = n(rng_);
        for (double& v : p.size.data()) v = n(rng_);
        for (double& v : p.off.data()) v = n(rng_);
        for (int idx : maps.feat.allocated_cells()) {
            for (double& v : p.feat.cell_mut(idx % maps.shape.width, idx / maps.shape.width)) v = n(rng_);
        }
        const double norm = pert_l2(p);
        std::uniform_real_distribution<double> u(cfg_.ranat_min_l2, cfg_.ranat_max_l2);
        const double target = u(rng_);
        const double scale = target / norm;
        for (double& v : p.heat.data()) v *= scale;
        for (double& v : p.size.data()) v *= scale;
        for (double& v : p.off.data()) v *= scale;
        const auto& cells = p.feat.allocated_cells();
        for (std::size_t s = 0; s < cells.size(); ++s) {
            for (double& v : p.feat.slot_data_mut(s)) v *= scale;
        }
        return p;
    }

    AttackerKind kind_;
    TrackerVariant variant_;
    AssociationConfig assoc_;
    AttackConfig cfg_;
    std::mt19937_64 rng_;
};

}  // namespace

AttackTrace run_attack(AttackerKind kind, const Scene& scene, int id_att, TrackerVariant variant,
                       const AssociationConfig& assoc, const AttackConfig& cfg, const RunOptions& opts) {
    validate(assoc);
    validate(cfg, variant, kind);
    AttackTrace tr;
    tr.attacker = kind;
    tr.tracker = variant;
    tr.id_att = id_att;

    const double thr_det = decode_threshold(variant, assoc);
    Attacker attacker(kind, variant, assoc, cfg);
    TrackletPool orig;
    TrackletPool adv;
    double thr_iou = cfg.thr_iou;
    int gt_own = -1;
    int gt_scr = -1;
    bool seen = false;

    for (std::size_t t = 0; t < scene.maps.size(); ++t) {
        const SensorMaps& maps = scene.maps[t];
        const FrameTruth& truth = scene.truth[t];
        const std::vector<Detection> clean = detect(maps, truth, thr_det);

        FrameRecord rec;
        rec.frame = truth.frame;
        rec.thr_iou = thr_iou;
        if (gt_own >= 0) {
            rec.original = pair_distances(orig, id_att, clean, gt_own, gt_scr, assoc);
            rec.adversarial = pair_distances(adv, id_att, clean, gt_own, gt_scr, assoc);
        }

        const MatchReport orig_report = step(variant, orig, clean, assoc);
        const TrackletPool adv_prev = adv;
        MatchReport adv_report = step(variant, adv, clean, assoc);
        std::vector<Detection> adv_dets = clean;

        const Tracklet* ta = orig.find(id_att);
        if (ta && ta->frames_since_update == 0) {
            seen = true;
            if (gt_own < 0 && ta->gt_id >= 0) {
                gt_own = ta->gt_id;
                gt_scr = partner_gt(scene, gt_own);
            }
        }
        const bool attack_on = kind != AttackerKind::none && tr.attacked_count() < cfg.max_frames;
        rec.exist_ok = ta && ta->status == TrackStatus::active && ta->hits > cfg.thr_frame;
        rec.fit_ok = check_fit(orig, adv, id_att);
        if (attack_on && rec.exist_ok && rec.fit_ok) {
            const std::optional<int> scr = find_max_iou(orig, id_att);
            if (scr) {
                rec.id_scr = *scr;
                rec.iou = iou(ta->box(), orig.find(*scr)->box());
            }
            rec.iou_ok = scr && rec.iou > thr_iou;
            if (rec.iou_ok) {
                rec.attempted = true;
                FrameNoise noise = attacker.generate({maps, clean, orig, adv_prev, orig_report, id_att, *scr});
                thr_iou = 0.0;
                rec.iterations = noise.iterations;
                rec.erred = noise.erred;
                rec.stalled = noise.stalled;
                rec.loss_first = noise.loss_first;
                rec.loss_last = noise.loss_last;
                rec.pert_l2 = pert_l2(noise.pert);
                if (rec.pert_l2 > 0.0) {
                    rec.attacked = true;
                    adv = adv_prev;
                    adv_dets = detect(apply_perturbation(maps, noise.pert), truth, thr_det);
                    adv_report = step(variant, adv, adv_dets, assoc);
                    tr.attacked_frames.push_back(truth.frame);
                    tr.total_l2 += rec.pert_l2;
                    if (opts.keep_noise) tr.noise.emplace_back(truth.frame, std::move(noise.pert));
                }
            }
        }
        FrameTracks fo = snapshot(orig, orig_report);
        FrameTracks fa = snapshot(adv, adv_report);
        fo.frame = fa.frame = truth.frame;
        tr.clean.push_back(std::move(fo));
        tr.adversarial.push_back(std::move(fa));
        tr.frames.push_back(rec);
    }
    if (!seen) throw std::invalid_argument("id " + std::to_string(id_att) + " never appears in the clean run");

    tr.target_gt = dominant_gt(tr.clean, id_att);
    const int last = tr.attacked_frames.empty() ? -1 : tr.attacked_frames.back();
    const Verdict v = judge_success(tr.clean, tr.adversarial, id_att, tr.target_gt, last);
    tr.success = v.success;
    tr.held_to_end = v.held_to_end;
    if (tr.success) {
        int last_own = -1;
        for (const FrameTracks& f : tr.adversarial) {
            const TrackEntry* e = f.find(id_att);
            if (e && e->gt_id == tr.target_gt) last_own = f.frame;
        }
        for (int f : tr.attacked_frames) {
            if (f >= last_own) {
                tr.switch_frame = f;
                break;
            }
        }
    }
    return tr;
}

AttackTrace run_trasw(const Scene& scene, int id_att, TrackerVariant variant, const AssociationConfig& assoc,
                      const AttackConfig& cfg, const RunOptions& opts) {
    return run_attack(AttackerKind::trasw, scene, id_att, variant, assoc, cfg, opts);
}

AttackTrace run_ranat(const Scene& scene, int id_att, TrackerVariant variant, const AssociationConfig& assoc,
                      const AttackConfig& cfg, const RunOptions& opts) {
    return run_attack(AttackerKind::ranat, scene, id_att, variant, assoc, cfg, opts);
}

AttackTrace run_detat(const Scene& scene, int id_att, TrackerVariant variant, const AssociationConfig& assoc,
                      const AttackConfig& cfg, const RunOptions& opts) {
    return run_attack(AttackerKind::detat, scene, id_att, variant, assoc, cfg, opts);
}

AttackTrace run_hijack(const Scene& scene, int id_att, TrackerVariant variant, const AssociationConfig& assoc,
                       const AttackConfig& cfg, const RunOptions& opts) {
    return run_attack(AttackerKind::hijack, scene, id_att, variant, assoc, cfg, opts);
}

}  // namespace tracklab
