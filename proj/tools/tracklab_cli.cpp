#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tracklab/attack.hpp"
#include "tracklab/io.hpp"
#include "tracklab/metrics.hpp"
#include "tracklab/suite.hpp"
#include "tracklab/world.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fs = std::filesystem;
using namespace tracklab;
using tracklab::io::json;

namespace {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SourceOptions {
    std::string scenario;
    std::string tmpl;
    std::string mot_det;
    std::uint64_t seed = 0;
    int agents = -1;
    int feature_dim = 512;
    int image_width = 0;
    int image_height = 0;
};

struct TrackOptions {
    std::string tracker = "fused";
    std::optional<double> lambda;
    std::optional<double> alpha;
};

struct AttackOptions {
    std::string attacker = "trasw";
    std::optional<double> thr_iou;
    std::optional<int> thr_frame;
    std::optional<int> thr_iter;
    std::optional<int> max_frames;
    std::vector<std::string> ablate;
    std::vector<std::string> switches;
};

void add_source(CLI::App* cmd, SourceOptions& s) {
    auto* sc = cmd->add_option("--scenario", s.scenario, "scenario JSON file");
    auto* tp = cmd->add_option("--template", s.tmpl, "built-in scenario template");
    auto* md = cmd->add_option("--mot-det", s.mot_det, "MOT-Challenge det.txt to replay");
    sc->excludes(tp)->excludes(md);
    tp->excludes(md);
    cmd->add_option("--seed", s.seed, "template seed")->capture_default_str();
    cmd->add_option("--agents", s.agents, "agent count for crowded/sparse templates");
    cmd->add_option("--feature-dim", s.feature_dim, "embedding dimension")->capture_default_str();
    cmd->add_option("--image-width", s.image_width, "replay image width (default: from the boxes)");
    cmd->add_option("--image-height", s.image_height, "replay image height (default: from the boxes)");
}

void add_tracker(CLI::App* cmd, TrackOptions& t) {
    cmd->add_option("--tracker", t.tracker, "fused | byte")->capture_default_str();
    cmd->add_option("--lambda", t.lambda, "motion weight of the fused cost");
    cmd->add_option("--alpha", t.alpha, "appearance EMA factor");
}

void add_attack(CLI::App* cmd, AttackOptions& a) {
    cmd->add_option("--thr-iou", a.thr_iou, "IoU gate for the first attacked frame");
    cmd->add_option("--thr-frame", a.thr_frame, "frames a tracklet must exist before it is attacked");
    cmd->add_option("--thr-iter", a.thr_iter, "inner-loop iterations per frame");
    cmd->add_option("--max-frames", a.max_frames, "attacked-frame budget");
    cmd->add_option("--ablate", a.ablate, "drop components: no-pp, no-cl, no-fn")->delimiter(',');
    cmd->add_option("--switches", a.switches, "explicit component set, e.g. pp,cl,fn")->delimiter(',');
}

AssociationConfig resolve_assoc(const TrackOptions& t) {
    AssociationConfig c;
    if (t.lambda) c.lambda = *t.lambda;
    if (t.alpha) c.alpha = *t.alpha;
    try {
        validate(c);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return c;
}

TrackerVariant resolve_variant(const std::string& name) {
    try {
        return parse_variant(name);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

AttackerKind resolve_attacker(const std::string& name) {
    try {
        return parse_attacker(name);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

void apply_ablation(AttackSwitches& sw, const std::string& name) {
    if (name == "no-pp") {
        sw.pp = false;
    } else if (name == "no-cl") {
        sw.cl = false;
    } else if (name == "no-fn") {
        sw.fn = false;
    } else if (name != "full") {
        throw ConfigError("unknown ablation '" + name + "' (expected no-pp, no-cl or no-fn)");
    }
}

// PushPull needs appearance, so the motion-only tracker defaults to CenterLeaping
// without it. Asking for it explicitly is a configuration error.
AttackConfig resolve_attack(const AttackOptions& a, TrackerVariant variant, AttackerKind kind) {
    AttackConfig c;
    if (a.thr_iou) c.thr_iou = *a.thr_iou;
    if (a.thr_frame) c.thr_frame = *a.thr_frame;
    if (a.thr_iter) c.thr_iter = *a.thr_iter;
    if (a.max_frames) c.max_frames = *a.max_frames;
    if (!a.switches.empty()) {
        c.switches = {false, false, false};
        for (const std::string& s : a.switches) {
            if (s == "pp") {
                c.switches.pp = true;
            } else if (s == "cl") {
                c.switches.cl = true;
            } else if (s == "fn") {
                c.switches.fn = true;
            } else {
                throw ConfigError("unknown switch '" + s + "' (expected pp, cl or fn)");
            }
        }
    } else if (variant == TrackerVariant::byte) {
        c.switches.pp = false;
    }
    for (const std::string& s : a.ablate) apply_ablation(c.switches, s);
    try {
        validate(c, variant, kind);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return c;
}

struct Loaded {
    std::optional<ScenarioSpec> spec;
    std::vector<DetFrame> replay;  // set for MOT det input
    GridShape shape;
    json provenance;
};

Loaded load_source(const SourceOptions& s) {
    Loaded out;
    if (!s.mot_det.empty()) {
        try {
            out.replay = load_mot_det(s.mot_det);
        } catch (const MotParseError& e) {
            throw io::IoError(s.mot_det + ":" + std::to_string(e.line()) + ": " + e.what());
        }
        int w = s.image_width;
        int h = s.image_height;
        if (w <= 0 || h <= 0) {
            double mx = 1.0;
            double my = 1.0;
            for (const DetFrame& f : out.replay) {
                for (const Detection& d : f.detections) {
                    mx = std::max(mx, d.box.x2);
                    my = std::max(my, d.box.y2);
                }
            }
            if (w <= 0) w = static_cast<int>(std::ceil(mx / 4.0)) * 4;
            if (h <= 0) h = static_cast<int>(std::ceil(my / 4.0)) * 4;
        }
        out.shape = {w / 4, h / 4, 4, s.feature_dim};
        out.provenance = {{"mot_det", s.mot_det}, {"image_width", w}, {"image_height", h}, {"seed", s.seed}};
        return out;
    }
    if (!s.scenario.empty()) {
        out.spec = io::load_scenario(s.scenario);
        out.provenance = {{"scenario", s.scenario}};
    } else {
        TemplateOptions t;
        t.name = s.tmpl.empty() ? "crossing" : s.tmpl;
        t.seed = s.seed;
        t.agents = s.agents;
        t.feature_dim = s.feature_dim;
        out.spec = make_template(t);
        out.provenance = {{"template", t.name}, {"seed", t.seed}, {"agents", t.agents}};
    }
    out.shape = out.spec->grid_shape();
    return out;
}

Scene scene_of(const Loaded& src, std::uint64_t seed) {
    if (src.spec) return make_scene(*src.spec);
    return make_scene(replay_truth(src.replay, src.shape.width * src.shape.stride,
                                   src.shape.height * src.shape.stride, src.shape.feat_dim, seed),
                      src.shape);
}

fs::path prepare_out(const std::string& dir) {
    fs::path p(dir);
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) throw io::IoError("cannot create " + dir + ": " + ec.message());
    return p;
}

void write_json(const fs::path& path, const json& doc) {
    std::ofstream out(path);
    if (!out) throw io::IoError("cannot write " + path.string());
    out << doc.dump(2) << '\n';
}

void write_distance_csv(const fs::path& path, const AttackTrace& t) {
    std::ofstream out(path);
    if (!out) throw io::IoError("cannot write " + path.string());
    out << "frame,id,id_scr,attacked,orig_feat_own,orig_feat_scr,orig_box_own,orig_box_scr,"
           "adv_feat_own,adv_feat_scr,adv_box_own,adv_box_scr\n";
    auto val = [](double v) { return v < 0.0 ? std::string("NA") : std::to_string(v); };
    for (const FrameRecord& r : t.frames) {
        out << r.frame << ',' << t.id_att << ',' << r.id_scr << ',' << (r.attacked ? 1 : 0) << ','
            << val(r.original.feat_own) << ',' << val(r.original.feat_scr) << ',' << val(r.original.box_own) << ','
            << val(r.original.box_scr) << ',' << val(r.adversarial.feat_own) << ','
            << val(r.adversarial.feat_scr) << ',' << val(r.adversarial.box_own) << ','
            << val(r.adversarial.box_scr) << '\n';
    }
}

int worker_count(int flag) {
    if (flag > 0) return flag;
    if (const char* env = std::getenv("TRACKLAB_WORKERS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return 1;
}

// ---- gen --------------------------------------------------------------------

int cmd_gen(const SourceOptions& s, const std::string& out) {
    const Loaded src = load_source(s);
    if (!src.spec) throw ConfigError("gen needs --template or --scenario");
    const std::string text = io::scenario_to_json(*src.spec).dump(2) + "\n";
    if (out.empty() || out == "-") {
        std::cout << text;
        return 0;
    }
    std::ofstream f(out, std::ios::binary);
    if (!f) throw io::IoError("cannot write " + out);
    f << text;
    std::cerr << "wrote " << out << " (" << src.spec->agents.size() << " agents, " << src.spec->num_frames
              << " frames)\n";
    return 0;
}

// ---- track ------------------------------------------------------------------

int cmd_track(const SourceOptions& s, const TrackOptions& t, const AttackOptions& a, const std::string& out_dir) {
    const AssociationConfig assoc = resolve_assoc(t);
    const TrackerVariant variant = resolve_variant(t.tracker);
    const Loaded src = load_source(s);
    const fs::path out = prepare_out(out_dir);

    TrackHistory history;
    std::optional<Scene> scene;
    if (src.spec) {
        scene = scene_of(src, s.seed);
        history = clean_history(*scene, variant, assoc);
    } else {
        std::vector<DetFrame> stream = src.replay;
        if (variant == TrackerVariant::fused) assign_replay_features(stream, src.shape.feat_dim, s.seed);
        std::vector<std::vector<Detection>> frames;
        std::vector<int> numbers;
        for (const DetFrame& f : stream) {
            frames.push_back(f.detections);
            numbers.push_back(f.frame);
        }
        history = run_video(frames, assoc, variant);
        for (std::size_t i = 0; i < history.size(); ++i) history[i].frame = numbers[i];
    }

    {
        std::ofstream f(out / "tracks.txt");
        if (!f) throw io::IoError("cannot write tracks.txt");
        write_mot_results(f, history);
    }
    AttackConfig acfg;
    if (a.thr_iou) acfg.thr_iou = *a.thr_iou;
    if (a.thr_frame) acfg.thr_frame = *a.thr_frame;
    const std::vector<int> ids = attackable_ids(history, acfg.thr_frame, acfg.thr_iou);
    std::ofstream pairs(out / "pairs.csv");
    if (!pairs) throw io::IoError("cannot write pairs.csv");
    pairs << "frame,id,id_scr,feat_own,feat_scr,box_own,box_scr\n";
    if (scene) {
        auto val = [](double v) { return v < 0.0 ? std::string("NA") : std::to_string(v); };
        for (int id : ids) {
            const AttackTrace tr = run_attack(AttackerKind::none, *scene, id, variant, assoc, acfg);
            for (const FrameRecord& r : tr.frames) {
                pairs << r.frame << ',' << id << ',' << r.id_scr << ',' << val(r.original.feat_own) << ','
                      << val(r.original.feat_scr) << ',' << val(r.original.box_own) << ','
                      << val(r.original.box_scr) << '\n';
            }
        }
    }
    std::map<int, int> seen;
    for (const FrameTracks& f : history) {
        for (const TrackEntry& e : f.entries) ++seen[e.id];
    }
    const int switches = id_switches(history);
    write_json(out / "config.json", {{"command", "track"},
                                     {"source", src.provenance},
                                     {"tracker", to_string(variant)},
                                     {"association", io::to_json(assoc)},
                                     {"ids", seen.size()},
                                     {"id_switches", switches},
                                     {"attackable", ids}});
    std::cout << "ids " << seen.size() << " switches " << switches << " attackable " << ids.size() << '\n';
    return 0;
}

// ---- attack -----------------------------------------------------------------

int cmd_attack(const SourceOptions& s, const TrackOptions& t, const AttackOptions& a, const std::string& out_dir,
               const std::vector<int>& id_list, bool all_ids, bool dump_noise) {
    const AssociationConfig assoc = resolve_assoc(t);
    const TrackerVariant variant = resolve_variant(t.tracker);
    const AttackerKind kind = resolve_attacker(a.attacker);
    AttackConfig cfg = resolve_attack(a, variant, kind);
    cfg.seed = s.seed;
    const Loaded src = load_source(s);
    const fs::path out = prepare_out(out_dir);
    const Scene scene = scene_of(src, s.seed);
    const TrackHistory clean = clean_history(scene, variant, assoc);
    const std::vector<int> attackable = attackable_ids(clean, cfg.thr_frame, cfg.thr_iou);

    std::vector<int> targets = id_list;
    if (targets.empty()) {
        if (all_ids) {
            targets = attackable;
        } else if (!attackable.empty()) {
            targets = {attackable.front()};
        }
    }
    if (targets.empty()) std::cout << "no attackable ids\n";

    std::vector<AttackOutcome> outcomes;
    json per_id = json::array();
    for (int id : targets) {
        const bool ok = std::find(attackable.begin(), attackable.end(), id) != attackable.end();
        if (!ok) {
            std::cout << "id " << id << ": not attackable\n";
            per_id.push_back({{"id", id}, {"error", "not attackable"}});
            continue;
        }
        AttackTrace tr;
        try {
            tr = run_attack(kind, scene, id, variant, assoc, cfg, {dump_noise});
        } catch (const std::invalid_argument& e) {
            std::cout << "id " << id << ": " << e.what() << '\n';
            per_id.push_back({{"id", id}, {"error", e.what()}});
            continue;
        }
        outcomes.push_back(outcome_of(tr));
        json doc = io::to_json(tr, true);
        doc["config"] = {{"source", src.provenance},
                         {"association", io::to_json(assoc)},
                         {"attack", io::to_json(cfg)}};
        const std::string stem = "id" + std::to_string(id);
        write_json(out / ("trace_" + stem + ".json"), doc);
        write_distance_csv(out / ("distances_" + stem + ".csv"), tr);
        if (dump_noise) {
            for (const auto& [frame, pert] : tr.noise) {
                io::GridDump d = io::summarize(pert);
                d.header["frame"] = frame;
                d.header["id_att"] = id;
                io::write_grid_file(out / ("noise_" + stem + "_f" + std::to_string(frame) + ".tlgrid"), d);
            }
        }
        per_id.push_back({{"id", id}, {"success", tr.success}, {"held_to_end", tr.held_to_end},
                          {"attacked_frames", tr.attacked_count()}, {"total_l2", tr.total_l2}});
        std::cout << "id " << id << ": success=" << (tr.success ? "true" : "false")
                  << " attacked_frames=" << tr.attacked_count()
                  << " held_to_end=" << (tr.held_to_end ? "true" : "false") << " l2=" << std::fixed
                  << std::setprecision(3) << tr.total_l2 << std::defaultfloat << '\n';
    }
    SuiteReport report = aggregate(outcomes);
    report.tracker = to_string(variant);
    report.attacker = to_string(kind);
    report.suite = src.spec ? src.spec->name : "replay";
    json rep = io::to_json(report);
    rep["ids"] = per_id;
    rep["config"] = {{"source", src.provenance}, {"association", io::to_json(assoc)}, {"attack", io::to_json(cfg)}};
    write_json(out / "report.json", rep);
    std::ofstream csv(out / "report.csv");
    write_report_csv_header(csv);
    write_report_csv_row(csv, report);
    return 0;
}

// ---- sweep ------------------------------------------------------------------

struct SweepOptions {
    std::vector<std::string> templates{"crossing"};
    std::vector<std::string> trackers{"fused", "byte"};
    std::vector<std::string> attackers{"trasw", "ranat", "detat", "hijack"};
    std::vector<std::string> ablations{"full"};
    std::vector<int> budgets{20};
    int seeds = 50;
    std::uint64_t first_seed = 0;
    int agents = -1;
    int workers = 0;
    bool force = false;
};

struct Cell {
    std::string name;
    SuiteSpec spec;
    json config;
};

int cmd_sweep(const SweepOptions& o, const TrackOptions& t, const AttackOptions& a, const std::string& out_dir) {
    const AssociationConfig assoc = resolve_assoc(t);
    std::vector<Cell> cells;
    for (const std::string& tmpl : o.templates) {
        for (const std::string& tn : o.trackers) {
            const TrackerVariant variant = resolve_variant(tn);
            for (const std::string& an : o.attackers) {
                const AttackerKind kind = resolve_attacker(an);
                for (const std::string& abl : o.ablations) {
                    for (int budget : o.budgets) {
                        AttackOptions ca = a;
                        ca.max_frames = budget;
                        if (abl != "full") ca.ablate.push_back(abl);
                        Cell c;
                        c.spec.template_name = tmpl;
                        c.spec.seeds = seed_range(o.first_seed, o.seeds);
                        c.spec.agents = o.agents;
                        c.spec.variant = variant;
                        c.spec.attacker = kind;
                        c.spec.assoc = assoc;
                        c.spec.attack = resolve_attack(ca, variant, kind);
                        c.name = tmpl + "_" + tn + "_" + an + "_" + abl + "_b" + std::to_string(budget);
                        c.config = {{"template", tmpl},
                                    {"tracker", tn},
                                    {"attacker", an},
                                    {"ablation", abl},
                                    {"budget", budget},
                                    {"seeds", {o.first_seed, o.seeds}},
                                    {"agents", o.agents},
                                    {"association", io::to_json(assoc)},
                                    {"attack", io::to_json(c.spec.attack)}};
                        cells.push_back(std::move(c));
                    }
                }
            }
        }
    }
    const fs::path out = prepare_out(out_dir);
    const fs::path cell_dir = prepare_out((out / "cells").string());
    const int workers = worker_count(o.workers);

    std::vector<json> results(cells.size());
    std::vector<int> todo;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const fs::path f = cell_dir / (cells[i].name + ".json");
        if (!o.force && fs::exists(f)) {
            try {
                std::ifstream in(f);
                json done = json::parse(in);
                if (done.at("config") == cells[i].config) {
                    results[i] = std::move(done);
                    continue;
                }
            } catch (const std::exception&) {
            }
        }
        todo.push_back(static_cast<int>(i));
    }
    std::cerr << "sweep: " << cells.size() << " cells, " << cells.size() - todo.size() << " already done, "
              << workers << " workers\n";

    std::string failure;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(workers)
#endif
    for (int k = 0; k < static_cast<int>(todo.size()); ++k) {
        const Cell& c = cells[todo[k]];
        try {
            const SuiteRun run = run_suite(c.spec, 1);
            json outcomes = json::array();
            for (const AttackOutcome& oc : run.outcomes) {
                outcomes.push_back({{"id", oc.id}, {"success", oc.success}, {"attacked_frames", oc.attacked_frames},
                                    {"total_l2", oc.total_l2}, {"held_to_end", oc.held_to_end}});
            }
            json doc = {{"config", c.config}, {"report", io::to_json(run.report)}, {"outcomes", outcomes}};
            write_json(cell_dir / (c.name + ".json"), doc);
            results[todo[k]] = std::move(doc);
#ifdef _OPENMP
#pragma omp critical(tracklab_sweep_log)
#endif
            std::cerr << "  " << c.name << ": succ " << run.report.succ_pct << "%\n";
        } catch (const std::exception& e) {
#ifdef _OPENMP
#pragma omp critical(tracklab_sweep_log)
#endif
            failure = c.name + ": " + e.what();
        }
    }
    if (!failure.empty()) throw std::runtime_error(failure);

    json combined = json::array();
    std::ofstream csv(out / "report.csv");
    csv << "budget,ablation,";
    write_report_csv_header(csv);
    std::ofstream budget(out / "budget_table.csv");
    budget << "template,tracker,attacker,ablation,budget";
    for (int cap : kFrameCaps) budget << ",succ_at_" << cap;
    budget << '\n';
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const json& r = results[i].at("report");
        const json& c = results[i].at("config");
        combined.push_back(results[i]);
        SuiteReport rep;
        rep.tracker = r.at("tracker");
        rep.attacker = r.at("attacker");
        rep.suite = r.at("suite");
        rep.ids_att = r.at("ids_att");
        rep.successes = r.at("successes");
        rep.succ_pct = r.at("succ_pct");
        rep.held = r.at("held_to_end");
        if (!r.at("mean_frames").is_null()) rep.mean_frames = r.at("mean_frames").get<double>();
        if (!r.at("mean_l2").is_null()) rep.mean_l2 = r.at("mean_l2").get<double>();
        for (int cap : kFrameCaps) rep.succ_at_cap.emplace_back(cap, r.at("succ_at_cap").at(std::to_string(cap)));
        csv << c.at("budget").get<int>() << ',' << c.at("ablation").get<std::string>() << ',';
        write_report_csv_row(csv, rep);
        budget << rep.suite << ',' << rep.tracker << ',' << rep.attacker << ',' << c.at("ablation").get<std::string>()
               << ',' << c.at("budget").get<int>();
        for (const auto& [cap, pct] : rep.succ_at_cap) budget << ',' << pct;
        budget << '\n';
    }
    write_json(out / "report.json", {{"cells", combined}});
    std::cout << "sweep: " << cells.size() << " cells written to " << out.string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tracklab: multi-object tracking association and tracklet-switch attack lab"};
    app.require_subcommand(1);

    SourceOptions src;
    TrackOptions trk;
    AttackOptions atk;
    std::string out_dir = "out";
    std::string gen_out;

    auto* gen = app.add_subcommand("gen", "write a scenario JSON");
    add_source(gen, src);
    gen->add_option("--out", gen_out, "output file (default: stdout)");

    auto* track = app.add_subcommand("track", "track a scenario without attack");
    add_source(track, src);
    add_tracker(track, trk);
    track->add_option("--thr-iou", atk.thr_iou, "IoU threshold for the attackable-id listing");
    track->add_option("--thr-frame", atk.thr_frame, "persistence threshold for the attackable-id listing");
    track->add_option("--out", out_dir, "output directory")->capture_default_str();

    std::vector<int> ids;
    bool all_ids = false;
    bool dump_noise = false;
    auto* attack = app.add_subcommand("attack", "attack one scenario");
    add_source(attack, src);
    add_tracker(attack, trk);
    add_attack(attack, atk);
    attack->add_option("--attacker", atk.attacker, "trasw | ranat | detat | hijack | none")->capture_default_str();
    attack->add_option("--id", ids, "tracklet ids to attack (default: the first attackable id)")->delimiter(',');
    attack->add_flag("--all-ids", all_ids, "attack every attackable id");
    attack->add_flag("--dump-noise", dump_noise, "write per-frame noise magnitude grids");
    attack->add_option("--out", out_dir, "output directory")->capture_default_str();

    SweepOptions sw;
    auto* sweep = app.add_subcommand("sweep", "run a grid of seeded attack suites");
    add_tracker(sweep, trk);
    add_attack(sweep, atk);
    sweep->remove_option(sweep->get_option("--tracker"));
    sweep->remove_option(sweep->get_option("--max-frames"));
    sweep->remove_option(sweep->get_option("--ablate"));
    sweep->add_option("--template", sw.templates, "templates")->delimiter(',')->capture_default_str();
    sweep->add_option("--tracker", sw.trackers, "tracker variants")->delimiter(',')->capture_default_str();
    sweep->add_option("--attacker", sw.attackers, "attackers")->delimiter(',')->capture_default_str();
    sweep->add_option("--ablate", sw.ablations, "ablations: full, no-pp, no-cl, no-fn")->delimiter(',');
    sweep->add_option("--max-frames", sw.budgets, "attacked-frame budgets")->delimiter(',');
    sweep->add_option("--seeds", sw.seeds, "scenarios per cell")->capture_default_str();
    sweep->add_option("--seed", sw.first_seed, "first seed")->capture_default_str();
    sweep->add_option("--agents", sw.agents, "agent count for crowded/sparse templates");
    sweep->add_option("--workers", sw.workers, "parallel cells (default: TRACKLAB_WORKERS or 1)");
    sweep->add_flag("--force", sw.force, "recompute cells that already have results");
    sweep->add_option("--out", out_dir, "output directory")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*gen) return cmd_gen(src, gen_out);
        if (*track) return cmd_track(src, trk, atk, out_dir);
        if (*attack) return cmd_attack(src, trk, atk, out_dir, ids, all_ids, dump_noise);
        if (*sweep) return cmd_sweep(sw, trk, atk, out_dir);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const ScenarioError& e) {
        std::cerr << "scenario error: " << e.what() << '\n';
        return 2;
    } catch (const io::IoError& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
