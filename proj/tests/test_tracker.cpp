#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>
#include <vector>

#include "tracklab/assignment.hpp"
#include "tracklab/tracker.hpp"
#include "support.hpp"

using namespace tracklab;
using testsupport::brute_force;

namespace {

Feature unit(int i, int dim = 8) {
    std::vector<double> v(dim, 0.0);
    v[i] = 1.0;
    return Feature::from_unit(v);
}

Detection det(double cx, double cy, double w = 20, double h = 50, double score = 0.9, int feat = -1) {
    Detection d;
    d.box = box_from_center({cx, cy}, {w, h});
    d.score = score;
    if (feat >= 0) d.feature = unit(feat);
    return d;
}

bool same_ids(const FrameTracks& f, std::vector<int> ids) {
    std::vector<int> got;
    for (const TrackEntry& e : f.entries) got.push_back(e.id);
    std::sort(got.begin(), got.end());
    std::sort(ids.begin(), ids.end());
    return got == ids;
}

}  // namespace

TEST_CASE("hungarian examples") {
    CostMatrix a(2, 2);
    a(0, 0) = 1, a(0, 1) = 2, a(1, 0) = 2, a(1, 1) = 1;
    Assignment r = hungarian(a);
    CHECK(r.row_to_col == std::vector<int>{0, 1});
    CHECK(r.total_cost == 2.0);

    CostMatrix b(2, 2);
    b(0, 0) = 5, b(0, 1) = 1, b(1, 0) = 1, b(1, 1) = 5;
    r = hungarian(b);
    CHECK(r.row_to_col == std::vector<int>{1, 0});
    CHECK(r.total_cost == 2.0);

    CostMatrix c(1, 1, 0.3);
    const Matching m = linear_assignment(c, 0.8);
    REQUIRE(m.matches.size() == 1);
    CHECK(m.matches[0] == std::pair{0, 0});

    CostMatrix inf(2, 2, kInfCost);
    inf(1, 0) = 3.0;
    r = hungarian(inf);
    CHECK(r.row_to_col == std::vector<int>{-1, 0});
    CHECK(r.matched() == 1);

    CHECK(hungarian(CostMatrix(0, 3)).row_to_col.empty());
    CHECK(linear_assignment(CostMatrix(2, 0), 0.5).unmatched_rows == std::vector<int>{0, 1});
}

TEST_CASE("hungarian equals brute force") {
    std::mt19937_64 rng(42);
    for (int rows = 1; rows <= 6; ++rows) {
        for (int cols = 1; cols <= 6; ++cols) {
            for (int k = 0; k < 30; ++k) {
                const CostMatrix c = testsupport::random_cost(rng, rows, cols, k);
                const auto [n, best] = brute_force(c);
                const Assignment a = hungarian(c);
                CHECK(a.matched() == n);
                CHECK(a.total_cost == doctest::Approx(best).epsilon(1e-12));
                std::set<int> used;
                for (int r = 0; r < rows; ++r) {
                    if (a.row_to_col[r] < 0) continue;
                    CHECK(std::isfinite(c(r, a.row_to_col[r])));
                    CHECK(used.insert(a.row_to_col[r]).second);
                }
            }
        }
    }
}

TEST_CASE("linear_assignment rejects pairs above the threshold") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.5);
    for (int k = 0; k < 200; ++k) {
        CostMatrix c(4, 5);
        for (int r = 0; r < 4; ++r)
            for (int q = 0; q < 5; ++q) c(r, q) = u(rng);
        const Matching m = linear_assignment(c, 0.8);
        CHECK(m.matches.size() + m.unmatched_rows.size() == 4);
        CHECK(m.matches.size() + m.unmatched_cols.size() == 5);
        for (const auto& [r, q] : m.matches) CHECK(c(r, q) <= 0.8);
    }
}

TEST_CASE("fused cost endpoints") {
    TrackletPool pool;
    AssociationConfig cfg;
    step_fused(pool, {det(50, 100, 20, 50, 0.9, 0), det(150, 100, 20, 50, 0.9, 1)}, cfg);
    for (Tracklet& t : pool.tracklets) t.motion = kf_predict(t.motion, cfg.kalman);
    std::vector<const Tracklet*> tr;
    for (const Tracklet& t : pool.tracklets) tr.push_back(&t);
    const std::vector<Detection> dets{det(52, 101, 20, 50, 0.9, 0), det(149, 99, 20, 50, 0.9, 2)};

    const CostMatrix mc = motion_cost(tr, dets, cfg);
    const CostMatrix ac = appearance_cost(tr, dets);
    cfg.lambda = 1.0;
    CostMatrix f1 = fused_cost(tr, dets, cfg);
    cfg.lambda = 0.0;
    CostMatrix f0 = fused_cost(tr, dets, cfg);
    cfg.lambda = 0.5;
    CostMatrix fh = fused_cost(tr, dets, cfg);
    for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) {
            if (std::isinf(mc(r, c))) {
                CHECK(std::isinf(fh(r, c)));
                continue;
            }
            CHECK(f1(r, c) == doctest::Approx(mc(r, c)));
            CHECK(f0(r, c) == doctest::Approx(ac(r, c)));
            CHECK(fh(r, c) == doctest::Approx(0.5 * mc(r, c) + 0.5 * ac(r, c)));
        }
    }
    CHECK(ac(0, 0) == doctest::Approx(0.0));
    CHECK(ac(1, 1) == doctest::Approx(1.0));
    CHECK(0.5 * 2.0 + 0.5 * 1.0 == 1.5);

    Detection bare = det(52, 101);
    CHECK(appearance_cost(tr, {bare})(0, 0) == 1.0);
}

TEST_CASE("step_fused lifecycle") {
    AssociationConfig cfg;
    TrackletPool pool;
    MatchReport r = step_fused(pool, {det(50, 100, 20, 50, 0.9, 0), det(200, 100, 20, 50, 0.9, 1)}, cfg);
    CHECK(r.new_ids == std::vector<int>{1, 2});
    REQUIRE(pool.tracklets.size() == 2);

    // id 2 disappears for a while and comes back
    for (int f = 0; f < 5; ++f) step_fused(pool, {det(50, 100, 20, 50, 0.9, 0)}, cfg);
    CHECK(pool.find(2)->status == TrackStatus::lost);
    r = step_fused(pool, {det(50, 100, 20, 50, 0.9, 0), det(200, 100, 20, 50, 0.9, 1)}, cfg);
    CHECK(r.det_of(2) == 1);
    CHECK(pool.find(2)->status == TrackStatus::active);

    for (int f = 0; f < cfg.max_lost_age; ++f) step_fused(pool, {det(50, 100, 20, 50, 0.9, 0)}, cfg);
    REQUIRE(pool.find(2) != nullptr);
    CHECK(pool.find(2)->status == TrackStatus::lost);
    r = step_fused(pool, {det(50, 100, 20, 50, 0.9, 0)}, cfg);
    CHECK(pool.find(2) == nullptr);
    CHECK(r.removed_ids == std::vector<int>{2});

    for (const Tracklet& t : pool.tracklets) {
        if (t.status == TrackStatus::active) CHECK(t.frames_since_update == 0);
    }
}

TEST_CASE("step_byte two stages") {
    AssociationConfig cfg;
    TrackletPool pool;
    step_byte(pool, {det(50, 100, 20, 50, 0.9)}, cfg);
    MatchReport r = step_byte(pool, {det(51, 100, 20, 50, 0.9)}, cfg);
    CHECK(r.det_of(1) == 0);

    // only a low score detection overlaps the tracklet
    TrackletPool two = pool;
    r = step_byte(two, {det(52, 100, 20, 50, 0.3)}, cfg);
    CHECK(r.det_of(1) == 0);
    CHECK(two.find(1)->status == TrackStatus::active);

    // single-stage oracle: without the low stage the same detection is dropped
    TrackletPool one = pool;
    std::vector<Detection> high_only;
    r = step_byte(one, high_only, cfg);
    CHECK(r.det_of(1) == -1);
    CHECK(one.find(1)->status == TrackStatus::lost);

    // low score detections never start tracklets
    TrackletPool three = pool;
    r = step_byte(three, {det(51, 100, 20, 50, 0.9), det(300, 100, 20, 50, 0.3)}, cfg);
    CHECK(r.new_ids.empty());
    CHECK(three.tracklets.size() == 1);

    CHECK_FALSE(pool.find(1)->appearance.has_value());
}

TEST_CASE("run_video") {
    AssociationConfig cfg;
    std::vector<std::vector<Detection>> frames;
    for (int f = 0; f < 60; ++f) frames.push_back({det(50 + f, 100, 20, 50, 0.9, 0), det(300 - f, 200, 20, 50, 0.9, 1)});
    for (TrackerVariant v : {TrackerVariant::fused, TrackerVariant::byte}) {
        const TrackHistory h = run_video(frames, cfg, v);
        REQUIRE(h.size() == 60);
        for (const FrameTracks& f : h) CHECK(same_ids(f, {1, 2}));
        CHECK(run_video(frames, cfg, v).size() == h.size());
    }

    // short absence keeps the id, long absence gives a new one
    auto with_gap = [&](int gap) {
        std::vector<std::vector<Detection>> fr;
        for (int f = 0; f < 10; ++f) fr.push_back({det(50, 100, 20, 50, 0.9, 0), det(300, 200, 20, 50, 0.9, 1)});
        for (int f = 0; f < gap; ++f) fr.push_back({det(50, 100, 20, 50, 0.9, 0)});
        for (int f = 0; f < 5; ++f) fr.push_back({det(50, 100, 20, 50, 0.9, 0), det(301, 200, 20, 50, 0.9, 1)});
        return run_video(fr, cfg, TrackerVariant::fused);
    };
    CHECK(same_ids(with_gap(10).back(), {1, 2}));
    CHECK(same_ids(with_gap(cfg.max_lost_age + 2).back(), {1, 3}));

    std::ostringstream out;
    write_mot_results(out, run_video({{det(50, 100, 20, 50, 0.9, 0)}}, cfg, TrackerVariant::fused));
    CHECK(out.str() == "1,1,40.00,75.00,20.00,50.00,0.90,-1,-1,-1\n");
}

TEST_CASE("ids increase and never repeat") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> x(20, 460), y(40, 240), s(0.0, 1.0);
    AssociationConfig cfg;
    for (TrackerVariant v : {TrackerVariant::fused, TrackerVariant::byte}) {
        TrackletPool pool;
        int last = 0;
        for (int f = 0; f < 80; ++f) {
            std::vector<Detection> dets;
            for (int k = 0; k < 6; ++k) {
                if (s(rng) < 0.6) dets.push_back(det(x(rng), y(rng), 20, 50, 0.2 + 0.8 * s(rng), k));
            }
            const MatchReport r = step(v, pool, dets, cfg);
            for (int id : r.new_ids) {
                CHECK(id > last);
                last = id;
            }
        }
    }
}

TEST_CASE("lambda 0 with orthogonal identities keeps crossing agents apart") {
    AssociationConfig cfg;
    cfg.lambda = 0.0;
    std::vector<std::vector<Detection>> frames;
    for (int f = 0; f < 40; ++f) {
        frames.push_back({det(100 + 2.0 * f, 100, 20, 50, 0.9, 0), det(180 - 2.0 * f, 104, 20, 50, 0.9, 1)});
        frames.back()[0].gt_id = 0;
        frames.back()[1].gt_id = 1;
    }
    const TrackHistory h = run_video(frames, cfg, TrackerVariant::fused);
    for (const FrameTracks& f : h) {
        for (const TrackEntry& e : f.entries) CHECK(e.id == e.gt_id + 1);
    }
}
