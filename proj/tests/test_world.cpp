#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "tracklab/world.hpp"

using namespace tracklab;

namespace {

Feature unit(int i, int dim) {
    std::vector<double> v(dim, 0.0);
    v[i] = 1.0;
    return Feature::from_unit(v);
}

const GridShape kShape{80, 48, 4, 8};

AgentTruth agent(int id, double cx, double cy, double w, double h) {
    return {id, box_from_center({cx, cy}, {w, h}), unit(id % 8, 8)};
}

// Agents far enough apart that their Gaussian supports never meet.
FrameTruth random_separated(std::mt19937_64& rng, int count) {
    std::uniform_real_distribution<double> x(20, 300), y(30, 160), w(16, 36);
    FrameTruth truth{1, {}};
    int tries = 0;
    while (static_cast<int>(truth.agents.size()) < count && tries++ < 1000) {
        const double bw = w(rng), bh = 2.5 * bw;
        const double cx = x(rng), cy = y(rng);
        const double r = 4.0 * (std::ceil(3.0 * heat_sigma(bw, bh, 4)) + 1.0);
        bool ok = true;
        for (const AgentTruth& o : truth.agents) {
            const Point2 c = center(o.box);
            const double ro = 4.0 * (std::ceil(3.0 * heat_sigma(o.box.width(), o.box.height(), 4)) + 1.0);
            if (std::hypot(c.x - cx, c.y - cy) < r + ro) ok = false;
        }
        if (ok) truth.agents.push_back(agent(static_cast<int>(truth.agents.size()), cx, cy, bw, bh));
    }
    return truth;
}

ScenarioSpec two_point_spec(double noise) {
    ScenarioSpec s;
    s.name = "line";
    s.image_width = 320;
    s.image_height = 192;
    s.num_frames = 11;
    s.feature_dim = 8;
    s.obs_noise_px = noise;
    AgentSpec a;
    a.id = 0;
    a.embedding = unit(0, 8);
    a.waypoints = {{1, 50, 90}, {11, 150, 100}};
    a.width = 20;
    a.height = 50;
    a.first_frame = 1;
    a.last_frame = 11;
    s.agents.push_back(a);
    return s;
}

}  // namespace

TEST_CASE("gen_scenario") {
    const auto frames = gen_scenario(two_point_spec(0.0));
    REQUIRE(frames.size() == 11);
    for (int f = 0; f < 11; ++f) {
        const Point2 c = center(frames[f].agents.at(0).box);
        CHECK(c.x == doctest::Approx(50 + 10.0 * f));
        CHECK(c.y == doctest::Approx(90 + 1.0 * f));
    }

    ScenarioSpec noisy = two_point_spec(0.5);
    noisy.seed = 7;
    const auto a = gen_scenario(noisy), b = gen_scenario(noisy);
    for (std::size_t f = 0; f < a.size(); ++f) CHECK(a[f].agents[0].box == b[f].agents[0].box);

    ScenarioSpec bad = two_point_spec(0.0);
    bad.agents.push_back(bad.agents[0]);
    bad.agents[1].id = 1;
    CHECK_THROWS_AS(gen_scenario(bad), ScenarioError);
    bad.agents[1].id = 0;
    CHECK_THROWS_AS(validate(bad), ScenarioError);
}

TEST_CASE("crossing template meets near frame 20") {
    const auto frames = gen_scenario(make_template({"crossing", 0, -1, 8}));
    REQUIRE(frames.size() >= 21);
    double best = 0.0;
    int at = 0;
    for (const FrameTruth& f : frames) {
        if (f.agents.size() != 2) continue;
        const double v = iou(f.agents[0].box, f.agents[1].box);
        if (v > best) {
            best = v;
            at = f.frame;
        }
    }
    CHECK(best > 0.2);
    CHECK(std::abs(at - 20) <= 3);
    CHECK_THROWS_AS(make_template({"nowhere", 0, -1, 8}), ScenarioError);
    CHECK(gen_scenario(make_template({"crowded", 1, 12, 8})).front().agents.size() == 12);
}

TEST_CASE("render_maps") {
    const SensorMaps empty = render_maps({1, {}}, kShape);
    for (double v : empty.heat.data()) CHECK(v == 0.0);

    const SensorMaps one = render_maps({1, {agent(0, 102, 62, 24, 60)}}, kShape);
    double best = -1.0;
    int bx = -1, by = -1, count = 0;
    for (int gy = 0; gy < kShape.height; ++gy) {
        for (int gx = 0; gx < kShape.width; ++gx) {
            const double v = one.heat.at(gx, gy);
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
            if (v > best) best = v, bx = gx, by = gy, count = 1;
            else if (v == best) ++count;
        }
    }
    CHECK(best == 1.0);
    CHECK(count == 1);
    CHECK(bx == 25);
    CHECK(by == 15);

    // two agents one cell apart: the midpoint reads the larger Gaussian, not the sum
    const SensorMaps two = render_maps({1, {agent(0, 102, 62, 24, 60), agent(1, 110, 62, 24, 60)}}, kShape);
    const double s = heat_sigma(24, 60, 4);
    const double g = std::exp(-1.0 / (2 * s * s));
    CHECK(two.heat.at(26, 15) == doctest::Approx(g));
    CHECK(two.heat.at(26, 15) < 2 * g - 0.1);
    CHECK(two.heat.at(25, 15) == 1.0);
    CHECK(two.heat.at(27, 15) == 1.0);
}

TEST_CASE("render and decode roundtrip") {
    std::mt19937_64 rng(12);
    for (int k = 0; k < 100; ++k) {
        const FrameTruth truth = random_separated(rng, 1 + k % 5);
        const SensorMaps maps = render_maps(truth, kShape);
        const auto dets = decode(maps, 0.4);
        REQUIRE(dets.size() == truth.agents.size());
        for (const AgentTruth& a : truth.agents) {
            const Point2 c = center(a.box);
            int hits = 0;
            for (const Detection& d : dets) {
                const Point2 dc = center(d.box);
                if (std::hypot(dc.x - c.x, dc.y - c.y) > 1e-6) continue;
                ++hits;
                CHECK(d.box.width() == doctest::Approx(a.box.width()).epsilon(1e-12));
                CHECK(d.box.height() == doctest::Approx(a.box.height()).epsilon(1e-12));
                REQUIRE(d.feature.has_value());
                CHECK(cosine_distance(*d.feature, a.feature) == doctest::Approx(0.0));
                CHECK(d.score == doctest::Approx(1.0));
            }
            CHECK(hits == 1);
        }
    }
    CHECK(decode(render_maps({1, {agent(0, 102, 62, 24, 60)}}, kShape), 1.01).empty());
}

TEST_CASE("apply_perturbation") {
    const SensorMaps maps = render_maps({1, {agent(0, 102, 62, 24, 60)}}, kShape);
    Perturbation zero(kShape);
    CHECK(apply_perturbation(maps, zero).equals(maps));

    Perturbation up(kShape);
    for (double& v : up.heat.data()) v = 1.0;
    for (double v : apply_perturbation(maps, up).heat.data()) CHECK(v == 1.0);

    SensorMaps custom(kShape);
    custom.heat.at(10, 10) = 0.9;
    custom.size.at(10, 10, 0) = 20;
    custom.size.at(10, 10, 1) = 50;
    auto cell = custom.feat.cell_mut(10, 10);
    cell[0] = 3;
    cell[1] = 4;
    Perturbation d(kShape);
    d.feat.cell_mut(10, 10)[1] = -4;
    const auto dets = decode(apply_perturbation(custom, d), 0.4);
    REQUIRE(dets.size() == 1);
    CHECK((*dets[0].feature)[0] == doctest::Approx(1.0));
    CHECK((*dets[0].feature)[1] == 0.0);

    Perturbation wrong(GridShape{10, 10, 4, 8});
    CHECK_THROWS_AS(apply_perturbation(maps, wrong), std::invalid_argument);
}

TEST_CASE("pert_l2") {
    Perturbation p(kShape);
    CHECK(pert_l2(p) == 0.0);
    p.heat.at(3, 3) = 3;
    CHECK(pert_l2(p) == 3.0);
    p.heat.at(4, 3) = 4;
    CHECK(pert_l2(p) == 5.0);

    std::mt19937_64 rng(4);
    std::normal_distribution<double> n(0.0, 1.0);
    auto random_pert = [&] {
        Perturbation q(kShape);
        for (double& v : q.heat.data()) v = n(rng);
        for (double& v : q.size.data()) v = n(rng);
        for (double& v : q.feat.cell_mut(5, 5)) v = n(rng);
        return q;
    };
    for (int k = 0; k < 20; ++k) {
        const Perturbation a = random_pert(), b = random_pert();
        Perturbation sum = a, scaled = a;
        for (std::size_t i = 0; i < sum.heat.data().size(); ++i) sum.heat.data()[i] += b.heat.data()[i];
        for (std::size_t i = 0; i < sum.size.data().size(); ++i) sum.size.data()[i] += b.size.data()[i];
        auto fs = sum.feat.cell_mut(5, 5);
        const auto fb = b.feat.cell(5, 5);
        for (std::size_t i = 0; i < fs.size(); ++i) fs[i] += fb[i];
        CHECK(pert_l2(sum) <= pert_l2(a) + pert_l2(b) + 1e-12);
        for (double& v : scaled.heat.data()) v *= -2.5;
        for (double& v : scaled.size.data()) v *= -2.5;
        for (double& v : scaled.feat.cell_mut(5, 5)) v *= -2.5;
        CHECK(pert_l2(scaled) == doctest::Approx(2.5 * pert_l2(a)));
    }
}

TEST_CASE("mot det parsing") {
    std::istringstream one("1,-1,10,20,30,60,0.9,-1,-1,-1\n");
    const auto s = parse_mot_det(one);
    REQUIRE(s.size() == 1);
    CHECK(s[0].frame == 1);
    REQUIRE(s[0].detections.size() == 1);
    CHECK(s[0].detections[0].box == BoxTLBR{10, 20, 40, 80});
    CHECK(s[0].detections[0].score == doctest::Approx(0.9));

    std::istringstream empty("");
    CHECK(parse_mot_det(empty).empty());

    std::istringstream bad("1,-1,10,20,30,60,0.9,-1,-1,-1\n2,-1,ten,20,30,60,0.9,-1,-1,-1\n");
    try {
        parse_mot_det(bad);
        FAIL("expected a parse error");
    } catch (const MotParseError& e) {
        CHECK(e.line() == 2);
    }
}

TEST_CASE("replay features are per identity") {
    std::istringstream in("1,3,10,20,30,60,0.9\n2,3,12,20,30,60,0.9\n2,4,100,20,30,60,0.8\n");
    auto s = parse_mot_det(in);
    assign_replay_features(s, 16, 0);
    const Feature& a = *s[0].detections[0].feature;
    const Feature& b = *s[1].detections[0].feature;
    CHECK(cosine_distance(a, b) == doctest::Approx(0.0));
    CHECK(cosine_distance(a, *s[1].detections[1].feature) > 0.1);
}
