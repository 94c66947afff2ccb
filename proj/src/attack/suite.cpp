#include "tracklab/suite.hpp"

#include <algorithm>
#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace tracklab {

std::vector<std::uint64_t> seed_range(std::uint64_t first, int count) {
    std::vector<std::uint64_t> out;
    for (int i = 0; i < count; ++i) out.push_back(first + static_cast<std::uint64_t>(i));
    return out;
}

AttackOutcome outcome_of(const AttackTrace& trace) {
    AttackOutcome o;
    o.id = trace.id_att;
    o.success = trace.success;
    o.attacked_frames = trace.attacked_count();
    o.total_l2 = trace.total_l2;
    o.switch_frame = trace.switch_frame;
    o.held_to_end = trace.held_to_end;
    return o;
}

SuiteRun run_suite(const SuiteSpec& spec, int workers, const TraceSink& sink) {
    validate(spec.assoc);
    validate(spec.attack, spec.variant, spec.attacker);

    // Scenes are rendered per seed and dropped after their ids are attacked;
    // a rendered crowded scene holds hundreds of MB of feature maps.
    std::vector<std::vector<AttackOutcome>> per_seed(spec.seeds.size());
    const int n = static_cast<int>(spec.seeds.size());
#ifdef _OPENMP
    const int threads = workers > 0 ? workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#endif
    for (int s = 0; s < n; ++s) {
        TemplateOptions opts;
        opts.name = spec.template_name;
        opts.seed = spec.seeds[s];
        opts.agents = spec.agents;
        const Scene scene = make_scene(make_template(opts));
        const TrackHistory clean = clean_history(scene, spec.variant, spec.assoc);
        for (int id : attackable_ids(clean, spec.attack.thr_frame, spec.attack.thr_iou)) {
            AttackConfig cfg = spec.attack;
            cfg.seed = spec.attack.seed ^ (spec.seeds[s] * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(id));
            const AttackTrace trace = run_attack(spec.attacker, scene, id, spec.variant, spec.assoc, cfg);
            per_seed[s].push_back(outcome_of(trace));
            if (sink) {
#ifdef _OPENMP
#pragma omp critical(tracklab_trace_sink)
#endif
                sink(spec.seeds[s], trace);
            }
        }
    }
    (void)workers;

    SuiteRun run;
    for (const auto& seed_outcomes : per_seed)
        run.outcomes.insert(run.outcomes.end(), seed_outcomes.begin(), seed_outcomes.end());
    run.report = aggregate(run.outcomes);
    run.report.tracker = to_string(spec.variant);
    run.report.attacker = to_string(spec.attacker);
    run.report.suite = spec.template_name;
    return run;
}

}  // namespace tracklab
