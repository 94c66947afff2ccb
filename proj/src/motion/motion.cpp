#include "tracklab/motion.hpp"

#include <stdexcept>

namespace tracklab {

namespace {

Mat8 transition() {
    Mat8 f = Mat8::Identity();
    for (int i = 0; i < 4; ++i) f(i, i + 4) = 1.0;
    return f;
}

Eigen::Matrix<double, 4, 8> projection() {
    Eigen::Matrix<double, 4, 8> h = Eigen::Matrix<double, 4, 8>::Zero();
    for (int i = 0; i < 4; ++i) h(i, i) = 1.0;
    return h;
}

Mat4 measurement_noise(double height, const KalmanParams& p) {
    Vec4 std;
    std << p.std_weight_position * height, p.std_weight_position * height, 1e-1,
        p.std_weight_position * height;
    return std.array().square().matrix().asDiagonal();
}

void symmetrize(Mat8& m) { m = 0.5 * (m + m.transpose()).eval(); }

}  // namespace

MotionState kf_init(const BoxXYAH& obs, const KalmanParams& params) {
    MotionState s;
    s.mean << obs.cx, obs.cy, obs.a, obs.h, 0.0, 0.0, 0.0, 0.0;
    const double h = obs.h;
    const double wp = params.std_weight_position;
    const double wv = params.std_weight_velocity;
    Vec8 std;
    std << 2 * wp * h, 2 * wp * h, 1e-2, 2 * wp * h, 10 * wv * h, 10 * wv * h, 1e-5, 10 * wv * h;
    s.cov = std.array().square().matrix().asDiagonal();
    return s;
}

MotionState kf_predict(const MotionState& s, const KalmanParams& params) {
    static const Mat8 f = transition();
    const double h = s.mean(3);
    const double wp = params.std_weight_position;
    const double wv = params.std_weight_velocity;
    Vec8 std;
    std << wp * h, wp * h, 1e-2, wp * h, wv * h, wv * h, 1e-5, wv * h;
    const Mat8 q = std.array().square().matrix().asDiagonal();

    MotionState out;
    out.mean = f * s.mean;
    out.cov = f * s.cov * f.transpose() + q;
    symmetrize(out.cov);
    return out;
}

Mat4 innovation_cov(const MotionState& s, const KalmanParams& params) {
    static const Eigen::Matrix<double, 4, 8> hm = projection();
    Mat4 cov = hm * s.cov * hm.transpose() + measurement_noise(s.mean(3), params);
    return 0.5 * (cov + cov.transpose());
}

MotionState kf_update(const MotionState& s, const BoxXYAH& obs, const KalmanParams& params) {
    static const Eigen::Matrix<double, 4, 8> hm = projection();
    const Mat4 sc = innovation_cov(s, params);
    const Eigen::LLT<Mat4> llt(sc);
    if (llt.info() != Eigen::Success) {
        throw std::runtime_error("kf_update: innovation covariance is not positive definite");
    }
    // K^T = S^-1 (H P)
    const Eigen::Matrix<double, 4, 8> hp = hm * s.cov;
    const Eigen::Matrix<double, 8, 4> gain = llt.solve(hp).transpose();
    Vec4 z;
    z << obs.cx, obs.cy, obs.a, obs.h;
    const Vec4 innovation = z - hm * s.mean;

    MotionState out;
    out.mean = s.mean + gain * innovation;
    out.cov = s.cov - gain * sc * gain.transpose();
    symmetrize(out.cov);
    return out;
}

std::optional<double> squared_mahalanobis(const Vec4& innovation, const Mat4& cov) {
    const Eigen::LLT<Mat4> llt(cov);
    if (llt.info() != Eigen::Success) return std::nullopt;
    const Vec4 y = llt.matrixL().solve(innovation);
    return y.squaredNorm();
}

std::optional<double> mahalanobis(const MotionState& s, const BoxXYAH& obs,
                                  const KalmanParams& params) {
    Vec4 innovation;
    innovation << obs.cx - s.mean(0), obs.cy - s.mean(1), obs.a - s.mean(2), obs.h - s.mean(3);
    return squared_mahalanobis(innovation, innovation_cov(s, params));
}

}  // namespace tracklab
