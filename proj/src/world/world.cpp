#include "tracklab/world.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "tracklab/assignment.hpp"
#include "tracklab/kernels.hpp"

namespace tracklab {

namespace {

std::string agent_label(const AgentSpec& a) { return "agent " + std::to_string(a.id); }

Feature random_unit(std::mt19937_64& rng, int dim) {
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<double> v(static_cast<std::size_t>(dim));
    for (double& x : v) x = n(rng);
    return Feature::normalized(v);
}

// Rotates `e` by `angle` toward a random direction orthogonal to it.
Feature rotate_random(const Feature& e, double angle, std::mt19937_64& rng) {
    if (angle == 0.0) return e;
    std::normal_distribution<double> n(0.0, 1.0);
    const auto ev = e.values();
    std::vector<double> u(ev.size());
    for (double& x : u) x = n(rng);
    const double proj = dot(u, ev);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] -= proj * ev[i];
    const double un = l2_norm(u);
    if (!(un > 0.0)) return e;
    std::vector<double> out(ev.size());
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = c * ev[i] + s * u[i] / un;
    return Feature::normalized(out);
}

// Unit embeddings whose pairwise cosine is close to `similarity` in high dimension.
std::vector<Feature> identity_embeddings(std::mt19937_64& rng, int count, int dim, double similarity) {
    const Feature shared = random_unit(rng, dim);
    std::vector<Feature> out;
    for (int k = 0; k < count; ++k) {
        const Feature own = random_unit(rng, dim);
        std::vector<double> v(static_cast<std::size_t>(dim));
        for (int i = 0; i < dim; ++i) {
            v[i] = std::sqrt(similarity) * shared[i] + std::sqrt(1.0 - similarity) * own[i];
        }
        out.push_back(Feature::normalized(v));
    }
    return out;
}

bool box_inside(const BoxTLBR& b, int w, int h) {
    return b.x1 >= 0.0 && b.y1 >= 0.0 && b.x2 <= w && b.y2 <= h;
}

}  // namespace

void validate(const ScenarioSpec& spec) {
    if (spec.stride < 1) throw ScenarioError("stride must be >= 1");
    if (spec.image_width <= 0 || spec.image_height <= 0) throw ScenarioError("image size must be positive");
    if (spec.image_width % spec.stride != 0 || spec.image_height % spec.stride != 0) {
        throw ScenarioError("stride must divide the image size");
    }
    if (spec.num_frames < 1) throw ScenarioError("num_frames must be >= 1");
    if (spec.feature_dim < 1) throw ScenarioError("feature_dim must be >= 1");
    if (spec.obs_noise_px < 0.0 || spec.feat_noise_rad < 0.0) throw ScenarioError("noise must be >= 0");
    std::set<int> ids;
    for (const AgentSpec& a : spec.agents) {
        if (!ids.insert(a.id).second) throw ScenarioError("duplicate " + agent_label(a));
        if (!(a.width > 0.0) || !(a.height > 0.0)) throw ScenarioError(agent_label(a) + ": box size must be positive");
        if (static_cast<int>(a.embedding.dim()) != spec.feature_dim) {
            throw ScenarioError(agent_label(a) + ": embedding dimension differs from feature_dim");
        }
        if (std::abs(l2_norm(a.embedding.values()) - 1.0) > 1e-9) {
            throw ScenarioError(agent_label(a) + ": embedding is not unit norm");
        }
        if (a.first_frame < 1 || a.last_frame > spec.num_frames || a.first_frame > a.last_frame) {
            throw ScenarioError(agent_label(a) + ": presence interval outside the video");
        }
        if (a.waypoints.empty()) throw ScenarioError(agent_label(a) + ": no waypoints");
        for (std::size_t i = 0; i < a.waypoints.size(); ++i) {
            const Waypoint& w = a.waypoints[i];
            if (i > 0 && w.frame <= a.waypoints[i - 1].frame) {
                throw ScenarioError(agent_label(a) + ": waypoint frames must increase");
            }
            const BoxTLBR b = box_from_center({w.x, w.y}, {a.width, a.height});
            if (!box_inside(b, spec.image_width, spec.image_height)) {
                throw ScenarioError(agent_label(a) + ": box leaves the image at frame " + std::to_string(w.frame));
            }
        }
    }
}

Point2 agent_position(const AgentSpec& agent, int frame) {
    const auto& wps = agent.waypoints;
    if (frame <= wps.front().frame) return {wps.front().x, wps.front().y};
    if (frame >= wps.back().frame) return {wps.back().x, wps.back().y};
    for (std::size_t i = 1; i < wps.size(); ++i) {
        if (frame <= wps[i].frame) {
            const Waypoint& a = wps[i - 1];
            const Waypoint& b = wps[i];
            const double t = static_cast<double>(frame - a.frame) / (b.frame - a.frame);
            return {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
        }
    }
    return {wps.back().x, wps.back().y};
}

std::vector<FrameTruth> gen_scenario(const ScenarioSpec& spec) {
    validate(spec);
    for (std::size_t i = 0; i < spec.agents.size(); ++i) {
        const AgentSpec& a = spec.agents[i];
        const BoxTLBR spawn = box_from_center(agent_position(a, a.first_frame), {a.width, a.height});
        for (std::size_t j = 0; j < spec.agents.size(); ++j) {
            const AgentSpec& b = spec.agents[j];
            if (i == j || a.first_frame < b.first_frame || a.first_frame > b.last_frame) continue;
            const BoxTLBR other = box_from_center(agent_position(b, a.first_frame), {b.width, b.height});
            if (iou(spawn, other) > 0.0) {
                throw ScenarioError(agent_label(a) + " spawns overlapping " + agent_label(b) + " at frame " +
                                    std::to_string(a.first_frame));
            }
        }
    }

    std::mt19937_64 rng(spec.seed ^ 0x9e3779b97f4a7c15ULL);
    std::normal_distribution<double> jitter(0.0, 1.0);
    std::vector<FrameTruth> frames;
    frames.reserve(static_cast<std::size_t>(spec.num_frames));
    for (int f = 1; f <= spec.num_frames; ++f) {
        FrameTruth ft;
        ft.frame = f;
        for (const AgentSpec& a : spec.agents) {
            if (f < a.first_frame || f > a.last_frame) continue;
            Point2 c = agent_position(a, f);
            if (spec.obs_noise_px > 0.0) {
                c.x += spec.obs_noise_px * jitter(rng);
                c.y += spec.obs_noise_px * jitter(rng);
            }
            // Keep the jittered box inside the image.
            c.x = std::clamp(c.x, a.width / 2.0, spec.image_width - a.width / 2.0);
            c.y = std::clamp(c.y, a.height / 2.0, spec.image_height - a.height / 2.0);
            double angle = 0.0;
            if (spec.feat_noise_rad > 0.0) angle = std::abs(spec.feat_noise_rad * jitter(rng));
            ft.agents.push_back({a.id, box_from_center(c, {a.width, a.height}), rotate_random(a.embedding, angle, rng)});
        }
        frames.push_back(std::move(ft));
    }
    return frames;
}

// ---------------------------------------------------------------------------
// Templates

namespace {

ScenarioSpec crossing_template(std::uint64_t seed, int dim) {
    std::mt19937_64 rng(seed * 7919 + 17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto uni = [&](double lo, double hi) { return lo + (hi - lo) * u(rng); };

    ScenarioSpec s;
    s.name = "crossing";
    s.image_width = 320;
    s.image_height = 192;
    s.stride = 4;
    s.num_frames = 40;
    s.feature_dim = dim;
    s.obs_noise_px = 0.5;
    s.feat_noise_rad = 0.6;
    s.seed = seed;

    // Both walk the same way. The rear one closes in quickly, then overtakes slowly with a small lateral offset.
    const int meet = 20;
    const int settle = 14;
    const Point2 cross{160.0 + uni(-12.0, 12.0), 96.0 + uni(-6.0, 6.0)};
    const double width = std::round(uni(28.0, 34.0));
    const double heading = u(rng) < 0.5 ? -1.0 : 1.0;
    const double slow = uni(0.6, 0.9);
    const double rel = uni(0.4, 0.8);
    const double gap = uni(3.0, 6.0);
    const double side = (u(rng) < 0.5 ? -1.0 : 1.0) * uni(9.0, 12.0);
    const std::vector<Feature> emb = identity_embeddings(rng, 2, dim, 0.5);
    for (int k = 0; k < 2; ++k) {
        const double vy = uni(-0.2, 0.2);
        const double dy = (k == 0 ? 0.5 : -0.5) * side;
        auto at = [&](int f) {
            double x = cross.x + heading * slow * (f - meet);
            if (k == 0) {
                const double closing = (width + gap + rel * (settle - meet)) * (settle - f) / (settle - 1);
                const double lead = f >= settle ? rel * (f - meet) : rel * (settle - meet) - closing;
                x += heading * lead;
            }
            return Waypoint{f, x, cross.y + dy + vy * (f - meet)};
        };
        AgentSpec a;
        a.id = k + 1;
        a.embedding = emb[k];
        a.width = width;
        a.height = std::round(width * 2.5);
        a.first_frame = 1;
        a.last_frame = s.num_frames;
        a.waypoints = k == 0 ? std::vector<Waypoint>{at(1), at(settle), at(s.num_frames)}
                             : std::vector<Waypoint>{at(1), at(s.num_frames)};
        s.agents.push_back(std::move(a));
    }
    return s;
}

ScenarioSpec random_walk_template(const std::string& name, std::uint64_t seed, int count, int dim) {
    std::mt19937_64 rng(seed * 104729 + static_cast<std::uint64_t>(count) * 31 + 5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto uni = [&](double lo, double hi) { return lo + (hi - lo) * u(rng); };

    ScenarioSpec s;
    s.name = name;
    s.image_width = 480;
    s.image_height = 288;
    s.stride = 4;
    s.num_frames = 60;
    s.feature_dim = dim;
    s.obs_noise_px = 0.5;
    s.feat_noise_rad = 0.6;
    s.seed = seed;

    const std::vector<Feature> emb = identity_embeddings(rng, count, dim, 0.5);
    std::vector<BoxTLBR> spawned;
    for (int k = 0; k < count; ++k) {
        AgentSpec a;
        a.id = k + 1;
        a.embedding = emb[k];
        a.width = std::round(uni(24.0, 34.0));
        a.height = std::round(a.width * 2.5);
        a.first_frame = 1;
        a.last_frame = s.num_frames;
        const double mx = a.width / 2.0 + 2.0;
        const double my = a.height / 2.0 + 2.0;
        Point2 start;
        bool placed = false;
        for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
            start = {uni(mx, s.image_width - mx), uni(my, s.image_height - my)};
            const BoxTLBR b = box_from_center(start, {a.width, a.height});
            placed = std::none_of(spawned.begin(), spawned.end(), [&](const BoxTLBR& o) { return iou(b, o) > 0.0; });
        }
        if (!placed) throw ScenarioError(name + ": cannot place " + std::to_string(count) + " agents without overlap");
        spawned.push_back(box_from_center(start, {a.width, a.height}));
        // Pedestrian-speed walk whose heading and speed drift at every leg, clipped to the image.
        double speed = uni(0.4, 1.2);
        double heading = uni(0.0, 2.0 * std::numbers::pi);
        const int leg = 10;
        const double turn = 0.5;
        a.waypoints = {{1, start.x, start.y}};
        Point2 p = start;
        for (int f = 1; f < s.num_frames;) {
            const int next = std::min(s.num_frames, f + leg);
            p.x = std::clamp(p.x + std::cos(heading) * speed * (next - f), mx, s.image_width - mx);
            p.y = std::clamp(p.y + 0.5 * std::sin(heading) * speed * (next - f), my, s.image_height - my);
            a.waypoints.push_back({next, p.x, p.y});
            heading += uni(-turn, turn);
            speed = std::clamp(speed * uni(0.7, 1.3), 0.3, 1.5);
            f = next;
        }
        s.agents.push_back(std::move(a));
    }
    return s;
}

}  // namespace

const std::vector<std::string>& template_names() {
    static const std::vector<std::string> names{"crossing", "crowded", "sparse"};
    return names;
}

ScenarioSpec make_template(const TemplateOptions& opts) {
    if (opts.feature_dim < 1) throw ScenarioError("feature_dim must be >= 1");
    if (opts.name == "crossing") return crossing_template(opts.seed, opts.feature_dim);
    if (opts.name == "crowded") {
        return random_walk_template("crowded", opts.seed, opts.agents > 0 ? opts.agents : 12, opts.feature_dim);
    }
    if (opts.name == "sparse") {
        return random_walk_template("sparse", opts.seed, opts.agents > 0 ? opts.agents : 3, opts.feature_dim);
    }
    std::string known;
    for (const auto& n : template_names()) known += (known.empty() ? "" : ", ") + n;
    throw ScenarioError("unknown template '" + opts.name + "' (known: " + known + ")");
}

// ---------------------------------------------------------------------------
// Surrogate detector

double heat_sigma(double w, double h, int stride) {
    return std::max(1.0, std::min(w, h) / (6.0 * stride));
}

SensorMaps render_maps(const FrameTruth& truth, const GridShape& shape) {
    SensorMaps maps(shape);
    struct Placed {
        GridCell cell;
        Point2 grid_center;
        const AgentTruth* agent;
    };
    std::vector<Placed> placed;
    std::vector<kernels::HeatBlob> blobs;
    for (const AgentTruth& a : truth.agents) {
        const Point2 c = center(a.box);
        GridCell cell = to_grid(std::max(0.0, c.x), std::max(0.0, c.y), shape.stride);
        if (cell.gx >= shape.width || cell.gy >= shape.height) {
            throw ScenarioError("render_maps: agent " + std::to_string(a.gt_id) + " center outside the image");
        }
        placed.push_back({cell, {c.x / shape.stride, c.y / shape.stride}, &a});
        const Size2 sz = box_size(a.box);
        blobs.push_back({cell.gx, cell.gy, heat_sigma(sz.w, sz.h, shape.stride)});
    }
    kernels::render_heat(blobs, maps.heat);

    // Size, offset and feature cover the whole Gaussian support, like dense network heads.
    // Nearest center wins a contested cell, ties go to the earlier agent.
    std::vector<int> owner(static_cast<std::size_t>(shape.cells()), -1);
    std::vector<double> owner_d2(static_cast<std::size_t>(shape.cells()), 0.0);
    for (std::size_t k = 0; k < placed.size(); ++k) {
        const Placed& p = placed[k];
        const int r = std::max(1, static_cast<int>(std::ceil(3.0 * blobs[k].sigma)));
        for (int dy = -r; dy <= r; ++dy) {
            for (int dx = -r; dx <= r; ++dx) {
                const int gx = p.cell.gx + dx;
                const int gy = p.cell.gy + dy;
                if (!shape.contains(gx, gy)) continue;
                const double ex = gx + 0.5 - p.grid_center.x;
                const double ey = gy + 0.5 - p.grid_center.y;
                const double d2 = ex * ex + ey * ey;
                const int idx = shape.index(gx, gy);
                if (owner[idx] < 0 || d2 < owner_d2[idx]) {
                    owner[idx] = static_cast<int>(k);
                    owner_d2[idx] = d2;
                }
            }
        }
    }

    for (int idx = 0; idx < shape.cells(); ++idx) {
        if (owner[idx] < 0) continue;
        const Placed& p = placed[owner[idx]];
        const int gx = idx % shape.width;
        const int gy = idx / shape.width;
        const Size2 sz = box_size(p.agent->box);
        maps.size.at(gx, gy, 0) = sz.w;
        maps.size.at(gx, gy, 1) = sz.h;
        maps.off.at(gx, gy, 0) = p.cell.offx;
        maps.off.at(gx, gy, 1) = p.cell.offy;
        if (!p.agent->feature.empty()) {
            if (static_cast<int>(p.agent->feature.dim()) != shape.feat_dim) {
                throw ScenarioError("render_maps: feature dimension differs from the grid");
            }
            const auto src = p.agent->feature.values();
            auto dst = maps.feat.cell_mut(gx, gy);
            std::copy(src.begin(), src.end(), dst.begin());
        }
    }
    return maps;
}

SensorMaps apply_perturbation(const SensorMaps& maps, const Perturbation& pert) {
    if (!(maps.shape == pert.shape) || !maps.heat.same_shape(pert.heat) || !maps.size.same_shape(pert.size) ||
        !maps.off.same_shape(pert.off) || !maps.feat.same_shape(pert.feat)) {
        throw std::invalid_argument("apply_perturbation: shape mismatch");
    }
    SensorMaps out = maps;
    {
        auto h = out.heat.data();
        const auto d = pert.heat.data();
        for (std::size_t i = 0; i < h.size(); ++i) h[i] = std::clamp(h[i] + d[i], 0.0, 1.0);
    }
    kernels::axpy(1.0, pert.size.data(), out.size.data());
    kernels::axpy(1.0, pert.off.data(), out.off.data());
    const auto& cells = pert.feat.allocated_cells();
    for (std::size_t slot = 0; slot < cells.size(); ++slot) {
        const int gx = cells[slot] % pert.shape.width;
        const int gy = cells[slot] / pert.shape.width;
        const auto d = pert.feat.slot_data(slot);
        auto dst = out.feat.cell_mut(gx, gy);
        for (std::size_t i = 0; i < d.size(); ++i) dst[i] += d[i];
    }
    return out;
}

std::vector<Detection> decode(const SensorMaps& maps, double det_threshold) {
    std::vector<Detection> out;
    const int stride = maps.shape.stride;
    for (int idx : kernels::find_peaks(maps.heat, det_threshold)) {
        const int gx = idx % maps.shape.width;
        const int gy = idx / maps.shape.width;
        const double w = maps.size.at(gx, gy, 0);
        const double h = maps.size.at(gx, gy, 1);
        if (!(w > 0.0) || !(h > 0.0) || !std::isfinite(w) || !std::isfinite(h)) continue;
        const Point2 c{(gx + maps.off.at(gx, gy, 0)) * stride, (gy + maps.off.at(gx, gy, 1)) * stride};
        Detection d;
        d.box = box_from_center(c, {w, h});
        d.score = maps.heat.at(gx, gy);
        d.cell = idx;
        const auto f = maps.feat.cell(gx, gy);
        if (!f.empty() && l2_norm(f) > 0.0) d.feature = Feature::normalized(f);
        out.push_back(std::move(d));
    }
    return out;
}

double pert_l2(const GridSet& pert) {
    double s = kernels::sum_squares(pert.heat.data()) + kernels::sum_squares(pert.size.data()) +
               kernels::sum_squares(pert.off.data());
    const auto& cells = pert.feat.allocated_cells();
    for (std::size_t slot = 0; slot < cells.size(); ++slot) s += kernels::sum_squares(pert.feat.slot_data(slot));
    return std::sqrt(s);
}

void attribute_gt(std::vector<Detection>& dets, const FrameTruth& truth, double min_iou) {
    CostMatrix cost(static_cast<int>(dets.size()), static_cast<int>(truth.agents.size()));
    for (int r = 0; r < cost.rows(); ++r) {
        dets[r].gt_id = -1;
        for (int c = 0; c < cost.cols(); ++c) cost(r, c) = 1.0 - iou(dets[r].box, truth.agents[c].box);
    }
    const Matching m = linear_assignment(cost, 1.0 - min_iou);
    for (const auto& [r, c] : m.matches) dets[r].gt_id = truth.agents[c].gt_id;
}

// ---------------------------------------------------------------------------
// MOT-Challenge detections

namespace {

double parse_field(const std::string& field, int line) {
    const char* begin = field.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    while (end && (*end == ' ' || *end == '\t' || *end == '\r')) ++end;
    if (end == begin || (end && *end != '\0') || !std::isfinite(v)) {
        throw MotParseError("line " + std::to_string(line) + ": non-numeric field '" + field + "'", line);
    }
    return v;
}

}  // namespace

std::vector<DetFrame> parse_mot_det(std::istream& in) {
    std::map<int, std::vector<Detection>> frames;
    std::string text;
    int line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::vector<std::string> fields;
        std::stringstream ss(text);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() < 7) {
            throw MotParseError("line " + std::to_string(line) + ": expected at least 7 fields", line);
        }
        double v[7];
        for (int i = 0; i < 7; ++i) v[i] = parse_field(fields[i], line);
        const int frame = static_cast<int>(v[0]);
        if (frame != v[0] || frame < 1) {
            throw MotParseError("line " + std::to_string(line) + ": frame must be a positive integer", line);
        }
        if (!(v[4] > 0.0) || !(v[5] > 0.0)) {
            throw MotParseError("line " + std::to_string(line) + ": box size must be positive", line);
        }
        Detection d;
        d.box = tlwh_to_tlbr(v[2], v[3], v[4], v[5]);
        d.score = v[6];
        d.gt_id = static_cast<int>(v[1]) >= 0 ? static_cast<int>(v[1]) : -1;
        frames[frame].push_back(std::move(d));
    }
    std::vector<DetFrame> out;
    for (auto& [frame, dets] : frames) out.push_back({frame, std::move(dets)});
    return out;
}

std::vector<DetFrame> load_mot_det(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open detection file " + path.string());
    return parse_mot_det(in);
}

Feature replay_embedding(int gt_id, int dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed * 1000003ULL + static_cast<std::uint64_t>(gt_id) * 7919ULL + 1);
    return random_unit(rng, dim);
}

void assign_replay_features(std::vector<DetFrame>& stream, int dim, std::uint64_t seed) {
    std::map<int, Feature> cache;
    for (DetFrame& f : stream) {
        for (Detection& d : f.detections) {
            if (d.gt_id < 0) continue;
            auto it = cache.find(d.gt_id);
            if (it == cache.end()) it = cache.emplace(d.gt_id, replay_embedding(d.gt_id, dim, seed)).first;
            d.feature = it->second;
        }
    }
}

std::vector<FrameTruth> replay_truth(const std::vector<DetFrame>& stream, int image_width, int image_height,
                                     int dim, std::uint64_t seed) {
    std::vector<FrameTruth> out;
    if (stream.empty()) return out;
    std::map<int, Feature> cache;
    int next_anon = 1000000;
    const int last = stream.back().frame;
    std::size_t pos = 0;
    for (int f = 1; f <= last; ++f) {
        FrameTruth ft;
        ft.frame = f;
        if (pos < stream.size() && stream[pos].frame == f) {
            for (const Detection& d : stream[pos].detections) {
                const Point2 c = center(d.box);
                if (c.x < 0.0 || c.y < 0.0 || c.x >= image_width || c.y >= image_height) continue;
                const int id = d.gt_id >= 0 ? d.gt_id : next_anon++;
                AgentTruth a{id, d.box, {}};
                if (d.gt_id >= 0) {
                    auto it = cache.find(id);
                    if (it == cache.end()) it = cache.emplace(id, replay_embedding(id, dim, seed)).first;
                    a.feature = it->second;
                }
                ft.agents.push_back(std::move(a));
            }
            ++pos;
        }
        out.push_back(std::move(ft));
    }
    return out;
}

}  // namespace tracklab
