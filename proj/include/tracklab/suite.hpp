#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tracklab/attack.hpp"
#include "tracklab/metrics.hpp"

namespace tracklab {

/// One (tracker, attacker, scenario family) cell of a sweep.
struct SuiteSpec {
    std::string template_name = "crossing";
    std::vector<std::uint64_t> seeds;
    int agents = -1;
    TrackerVariant variant = TrackerVariant::fused;
    AttackerKind attacker = AttackerKind::trasw;
    AssociationConfig assoc;
    AttackConfig attack;
};

std::vector<std::uint64_t> seed_range(std::uint64_t first, int count);

AttackOutcome outcome_of(const AttackTrace& trace);

// Called once per finished trace, serialized, in no particular order.
using TraceSink = std::function<void(std::uint64_t seed, const AttackTrace& trace)>;

struct SuiteRun {
    std::vector<AttackOutcome> outcomes;  // ordered by (seed, id)
    SuiteReport report;
};

// Attacks every attackable id of every seeded scenario. Runs the (seed, id) pairs
// on up to `workers` OpenMP threads; workers <= 0 uses the OpenMP default.
SuiteRun run_suite(const SuiteSpec& spec, int workers = 1, const TraceSink& sink = {});

}  // namespace tracklab
