#include <doctest.h>

#include <random>

#include <Eigen/Eigenvalues>

#include "tracklab/motion.hpp"

using namespace tracklab;

namespace {

void check_sym_psd(const Mat8& c) {
    CHECK((c - c.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    Eigen::SelfAdjointEigenSolver<Mat8> es(c);
    CHECK(es.eigenvalues().minCoeff() >= -1e-12);
}

MotionState random_state(std::mt19937_64& rng, const KalmanParams& p) {
    std::uniform_real_distribution<double> pos(0.0, 500.0), a(0.3, 0.6), h(30.0, 120.0), v(-3.0, 3.0);
    MotionState s = kf_init({pos(rng), pos(rng), a(rng), h(rng)}, p);
    for (int i = 4; i < 8; ++i) s.mean(i) = v(rng) * (i == 6 ? 0.001 : 1.0);
    return s;
}

}  // namespace

TEST_CASE("kf_init") {
    const KalmanParams p;
    const MotionState s = kf_init({5, 10, 0.5, 20}, p);
    Vec8 expect;
    expect << 5, 10, 0.5, 20, 0, 0, 0, 0;
    CHECK(s.mean == expect);
    CHECK(s.cov.isDiagonal());
    check_sym_psd(s.cov);
    const MotionState t = kf_init({5, 10, 0.5, 20}, p);
    CHECK(s.mean == t.mean);
    CHECK(s.cov == t.cov);
}

TEST_CASE("kf_predict") {
    const KalmanParams p;
    MotionState s = kf_init({10, 20, 0.5, 40}, p);
    s.mean(4) = 1;
    s.mean(5) = 2;
    const MotionState q = kf_predict(s, p);
    CHECK(q.mean(0) == doctest::Approx(11));
    CHECK(q.mean(1) == doctest::Approx(22));
    check_sym_psd(q.cov);

    MotionState z = kf_init({10, 20, 0.5, 40}, p);
    CHECK(kf_predict(z, p).mean.head<4>() == z.mean.head<4>());

    std::mt19937_64 rng(4);
    for (int k = 0; k < 200; ++k) {
        const MotionState r = random_state(rng, p);
        const MotionState n = kf_predict(r, p);
        CHECK(n.cov.trace() > r.cov.trace());
        check_sym_psd(n.cov);
    }
}

TEST_CASE("kf_update") {
    const KalmanParams p;
    std::mt19937_64 rng(5);
    for (int k = 0; k < 100; ++k) {
        const MotionState pred = kf_predict(random_state(rng, p), p);
        const MotionState same = kf_update(pred, pred.xyah(), p);
        CHECK((same.mean - pred.mean).cwiseAbs().maxCoeff() < 1e-9);
        check_sym_psd(same.cov);
        // contraction on the observed block
        const Mat4 diff = pred.cov.topLeftCorner<4, 4>() - same.cov.topLeftCorner<4, 4>();
        Eigen::SelfAdjointEigenSolver<Mat4> es(diff);
        CHECK(es.eigenvalues().minCoeff() >= -1e-9);
    }

    // constant observation: the mean converges to it
    MotionState s = kf_init({100, 100, 0.5, 50}, p);
    const BoxXYAH obs{110, 95, 0.5, 52};
    for (int i = 0; i < 200; ++i) s = kf_update(kf_predict(s, p), obs, p);
    CHECK(s.mean(0) == doctest::Approx(110).epsilon(1e-6));
    CHECK(s.mean(1) == doctest::Approx(95).epsilon(1e-6));
    CHECK(s.mean(3) == doctest::Approx(52).epsilon(1e-6));
}

TEST_CASE("noiseless constant velocity tracking") {
    const KalmanParams p;
    const double vx = 2.0, vy = -1.5;
    auto truth = [&](int k) { return BoxXYAH{100 + vx * k, 200 + vy * k, 0.4, 80}; };
    MotionState s = kf_init(truth(0), p);
    s.mean(4) = vx;
    s.mean(5) = vy;
    for (int k = 1; k <= 10; ++k) {
        s = kf_predict(s, p);
        check_sym_psd(s.cov);
        s = kf_update(s, truth(k), p);
        check_sym_psd(s.cov);
    }
    CHECK(std::abs(s.mean(0) - truth(10).cx) < 1e-6);
    CHECK(std::abs(s.mean(1) - truth(10).cy) < 1e-6);

    // From a standing start the error shrinks every frame once the velocity is picked up.
    MotionState c = kf_init(truth(0), p);
    double prev = 1e9;
    for (int k = 1; k <= 40; ++k) {
        c = kf_update(kf_predict(c, p), truth(k), p);
        const double err = std::hypot(c.mean(0) - truth(k).cx, c.mean(1) - truth(k).cy);
        if (k >= 3) CHECK(err < prev);
        prev = err;
    }
}

TEST_CASE("mahalanobis") {
    const KalmanParams p;
    const MotionState s = kf_predict(kf_init({50, 60, 0.5, 40}, p), p);
    CHECK(*mahalanobis(s, s.xyah(), p) == doctest::Approx(0.0));
    CHECK(*mahalanobis(s, {52, 60, 0.5, 40}, p) == *mahalanobis(s, {52, 60, 0.5, 40}, p));

    Vec4 e1 = Vec4::Zero();
    e1(0) = 1.0;
    CHECK(*squared_mahalanobis(e1, Mat4::Identity()) == doctest::Approx(1.0));
    Vec4 d;
    d << 1, 2, 0, 0;
    Mat4 c = Mat4::Identity();
    c(1, 1) = 4.0;
    CHECK(*squared_mahalanobis(d, c) == doctest::Approx(2.0));
    CHECK_FALSE(squared_mahalanobis(d, Mat4::Zero()).has_value());

    // monotone along a direction
    double prev = -1.0;
    for (int k = 0; k <= 20; ++k) {
        const double m = *mahalanobis(s, {50 + 0.5 * k, 60 + 0.25 * k, 0.5, 40 + 0.1 * k}, p);
        CHECK(m >= 0.0);
        CHECK(m > prev);
        prev = m;
    }
}
