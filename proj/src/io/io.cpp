#include "tracklab/io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "tracklab/kernels.hpp"

namespace tracklab::io {

namespace {

template <typename T>
T field(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) throw ScenarioError(where + ": missing field '" + key + "'");
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ScenarioError(where + ": field '" + key + "' has the wrong type");
    }
}

json history_entry(const TrackEntry& e) {
    return {{"id", e.id},
            {"box", {e.box.x1, e.box.y1, e.box.x2, e.box.y2}},
            {"score", e.score},
            {"gt", e.gt_id}};
}

json distances(const PairDistances& d) {
    auto opt = [](double v) { return v < 0.0 ? json(nullptr) : json(v); };
    return {{"feat_own", opt(d.feat_own)}, {"feat_scr", opt(d.feat_scr)}, {"box_own", opt(d.box_own)},
            {"box_scr", opt(d.box_scr)}};
}

}  // namespace

json scenario_to_json(const ScenarioSpec& spec) {
    json agents = json::array();
    for (const AgentSpec& a : spec.agents) {
        json wps = json::array();
        for (const Waypoint& w : a.waypoints) wps.push_back({w.frame, w.x, w.y});
        agents.push_back({{"id", a.id},
                          {"width", a.width},
                          {"height", a.height},
                          {"first_frame", a.first_frame},
                          {"last_frame", a.last_frame},
                          {"waypoints", wps},
                          {"embedding", std::vector<double>(a.embedding.values().begin(), a.embedding.values().end())}});
    }
    return {{"format", kScenarioFormat},
            {"version", ScenarioSpec::kVersion},
            {"name", spec.name},
            {"image_width", spec.image_width},
            {"image_height", spec.image_height},
            {"stride", spec.stride},
            {"num_frames", spec.num_frames},
            {"feature_dim", spec.feature_dim},
            {"obs_noise_px", spec.obs_noise_px},
            {"feat_noise_rad", spec.feat_noise_rad},
            {"seed", spec.seed},
            {"agents", agents}};
}

ScenarioSpec scenario_from_json(const json& doc) {
    const std::string where = "scenario";
    if (field<std::string>(doc, "format", where) != kScenarioFormat) {
        throw ScenarioError(where + ": format must be '" + std::string(kScenarioFormat) + "'");
    }
    const int version = field<int>(doc, "version", where);
    if (version != ScenarioSpec::kVersion) {
        throw ScenarioError(where + ": unsupported version " + std::to_string(version));
    }
    ScenarioSpec s;
    s.name = field<std::string>(doc, "name", where);
    s.image_width = field<int>(doc, "image_width", where);
    s.image_height = field<int>(doc, "image_height", where);
    s.stride = field<int>(doc, "stride", where);
    s.num_frames = field<int>(doc, "num_frames", where);
    s.feature_dim = field<int>(doc, "feature_dim", where);
    s.obs_noise_px = field<double>(doc, "obs_noise_px", where);
    s.feat_noise_rad = field<double>(doc, "feat_noise_rad", where);
    s.seed = field<std::uint64_t>(doc, "seed", where);
    const json agents = field<json>(doc, "agents", where);
    if (!agents.is_array()) throw ScenarioError(where + ": agents must be an array");
    for (std::size_t k = 0; k < agents.size(); ++k) {
        const json& j = agents[k];
        const std::string at = "agents[" + std::to_string(k) + "]";
        AgentSpec a;
        a.id = field<int>(j, "id", at);
        a.width = field<double>(j, "width", at);
        a.height = field<double>(j, "height", at);
        a.first_frame = field<int>(j, "first_frame", at);
        a.last_frame = field<int>(j, "last_frame", at);
        for (const json& w : field<json>(j, "waypoints", at)) {
            if (!w.is_array() || w.size() != 3) throw ScenarioError(at + ": waypoint must be [frame, x, y]");
            a.waypoints.push_back({w[0].get<int>(), w[1].get<double>(), w[2].get<double>()});
        }
        const auto emb = field<std::vector<double>>(j, "embedding", at);
        try {
            a.embedding = Feature::from_unit(emb);
        } catch (const std::invalid_argument&) {
            throw ScenarioError(at + ": embedding must be a unit vector");
        }
        s.agents.push_back(std::move(a));
    }
    validate(s);
    return s;
}

void save_scenario(const std::filesystem::path& path, const ScenarioSpec& spec) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << scenario_to_json(spec).dump(2) << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

ScenarioSpec load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ScenarioError(path.string() + ": " + e.what());
    }
    return scenario_from_json(doc);
}

json to_json(const AssociationConfig& c) {
    return {{"lambda", c.lambda},
            {"alpha", c.alpha},
            {"max_lost_age", c.max_lost_age},
            {"det_high", c.det_high},
            {"det_low", c.det_low},
            {"fused_thresh", c.fused_thresh},
            {"iou_thresh", c.iou_thresh},
            {"newborn_thresh", c.newborn_thresh},
            {"gate", c.gate},
            {"kalman", {{"std_weight_position", c.kalman.std_weight_position},
                        {"std_weight_velocity", c.kalman.std_weight_velocity}}}};
}

json to_json(const AttackConfig& c) {
    return {{"thr_iou", c.thr_iou},
            {"thr_frame", c.thr_frame},
            {"thr_iter", c.thr_iter},
            {"schedule", c.schedule},
            {"gamma", c.gamma},
            {"max_frames", c.max_frames},
            {"switches", {{"pp", c.switches.pp}, {"cl", c.switches.cl}, {"fn", c.switches.fn}}},
            {"hijack_shift", c.hijack_shift},
            {"ranat_l2", {c.ranat_min_l2, c.ranat_max_l2}},
            {"seed", c.seed}};
}

json to_json(const FrameRecord& r) {
    return {{"frame", r.frame},
            {"gates", {{"exist", r.exist_ok}, {"fit", r.fit_ok}, {"iou", r.iou_ok}}},
            {"id_scr", r.id_scr},
            {"iou", r.iou},
            {"thr_iou", r.thr_iou},
            {"attempted", r.attempted},
            {"attacked", r.attacked},
            {"iterations", r.iterations},
            {"erred", r.erred},
            {"stalled", r.stalled},
            {"loss_first", r.loss_first},
            {"loss_last", r.loss_last},
            {"pert_l2", r.pert_l2},
            {"original", distances(r.original)},
            {"adversarial", distances(r.adversarial)}};
}

json to_json(const TrackHistory& history) {
    json frames = json::array();
    for (const FrameTracks& f : history) {
        json entries = json::array();
        for (const TrackEntry& e : f.entries) entries.push_back(history_entry(e));
        frames.push_back({{"frame", f.frame}, {"tracks", entries}});
    }
    return frames;
}

json to_json(const AttackTrace& t, bool with_histories) {
    json frames = json::array();
    for (const FrameRecord& r : t.frames) frames.push_back(to_json(r));
    json doc = {{"attacker", to_string(t.attacker)},
                {"tracker", to_string(t.tracker)},
                {"id_att", t.id_att},
                {"target_gt", t.target_gt},
                {"success", t.success},
                {"held_to_end", t.held_to_end},
                {"attacked_frames", t.attacked_frames},
                {"num_attacked", t.attacked_count()},
                {"total_l2", t.total_l2},
                {"switch_frame", t.switch_frame},
                {"frames", frames}};
    if (with_histories) {
        doc["clean"] = to_json(t.clean);
        doc["adversarial"] = to_json(t.adversarial);
    }
    return doc;
}

json to_json(const SuiteReport& r) {
    json caps = json::object();
    for (const auto& [cap, pct] : r.succ_at_cap) caps[std::to_string(cap)] = pct;
    return {{"tracker", r.tracker},
            {"attacker", r.attacker},
            {"suite", r.suite},
            {"ids_att", r.ids_att},
            {"successes", r.successes},
            {"succ_pct", r.succ_pct},
            {"mean_frames", r.mean_frames ? json(*r.mean_frames) : json(nullptr)},
            {"mean_l2", r.mean_l2 ? json(*r.mean_l2) : json(nullptr)},
            {"held_to_end", r.held},
            {"succ_at_cap", caps}};
}

// ---------------------------------------------------------------------------

GridDump summarize(const GridSet& g) {
    GridDump d;
    d.width = g.shape.width;
    d.height = g.shape.height;
    d.channels = {"heat", "size_w", "size_h", "off_x", "off_y", "feat_l2", "l2"};
    const std::size_t nc = d.channels.size();
    d.data.assign(static_cast<std::size_t>(d.width) * d.height * nc, 0.0);
    for (int gy = 0; gy < d.height; ++gy) {
        for (int gx = 0; gx < d.width; ++gx) {
            double* px = d.data.data() + (static_cast<std::size_t>(gy) * d.width + gx) * nc;
            px[0] = g.heat.at(gx, gy);
            px[1] = g.size.at(gx, gy, 0);
            px[2] = g.size.at(gx, gy, 1);
            px[3] = g.off.at(gx, gy, 0);
            px[4] = g.off.at(gx, gy, 1);
            const double feat_sq = g.feat.allocated(gx, gy) ? kernels::sum_squares(g.feat.cell(gx, gy)) : 0.0;
            px[5] = std::sqrt(feat_sq);
            double sq = feat_sq;
            for (int c = 0; c < 5; ++c) sq += px[c] * px[c];
            px[6] = std::sqrt(sq);
        }
    }
    d.header = {{"width", d.width},  {"height", d.height},       {"stride", g.shape.stride},
                {"channels", d.channels}, {"dtype", "f64le"}, {"layout", "hwc"}};
    return d;
}

void write_grid(std::ostream& out, const GridDump& dump) {
    json header = dump.header;
    header["width"] = dump.width;
    header["height"] = dump.height;
    header["channels"] = dump.channels;
    const std::string text = header.dump();
    out.write(kGridMagic, 8);
    const auto len = static_cast<std::uint32_t>(text.size());
    unsigned char len_le[4];
    for (int i = 0; i < 4; ++i) len_le[i] = static_cast<unsigned char>((len >> (8 * i)) & 0xFF);
    out.write(reinterpret_cast<const char*>(len_le), 4);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (double v : dump.data) {
        std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
        unsigned char b[8];
        for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xFF);
        out.write(reinterpret_cast<const char*>(b), 8);
    }
    if (!out) throw IoError("grid write failed");
}

GridDump read_grid(std::istream& in) {
    char magic[8];
    if (!in.read(magic, 8) || std::memcmp(magic, kGridMagic, 8) != 0) throw IoError("not a grid dump");
    unsigned char len_le[4];
    if (!in.read(reinterpret_cast<char*>(len_le), 4)) throw IoError("truncated grid header");
    std::uint32_t len = 0;
    for (int i = 0; i < 4; ++i) len |= static_cast<std::uint32_t>(len_le[i]) << (8 * i);
    std::string text(len, '\0');
    if (!in.read(text.data(), len)) throw IoError("truncated grid header");
    GridDump d;
    try {
        d.header = json::parse(text);
        d.width = d.header.at("width").get<int>();
        d.height = d.header.at("height").get<int>();
        d.channels = d.header.at("channels").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw IoError(std::string("bad grid header: ") + e.what());
    }
    d.data.resize(static_cast<std::size_t>(d.width) * d.height * d.channels.size());
    for (double& v : d.data) {
        unsigned char b[8];
        if (!in.read(reinterpret_cast<char*>(b), 8)) throw IoError("truncated grid data");
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
        v = std::bit_cast<double>(bits);
    }
    return d;
}

void write_grid_file(const std::filesystem::path& path, const GridDump& dump) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    write_grid(out, dump);
}

}  // namespace tracklab::io
