#pragma once

#include <optional>

#include <Eigen/Dense>

#include "tracklab/geometry.hpp"

namespace tracklab {

using Vec4 = Eigen::Matrix<double, 4, 1>;
using Vec8 = Eigen::Matrix<double, 8, 1>;
using Mat4 = Eigen::Matrix<double, 4, 4>;
using Mat8 = Eigen::Matrix<double, 8, 8>;

/// Noise standard deviations are these weights times the current box height.
struct KalmanParams {
    double std_weight_position = 1.0 / 20.0;
    double std_weight_velocity = 1.0 / 160.0;
};

/// Constant-velocity state (cx, cy, a, h, vcx, vcy, va, vh) and its covariance.
struct MotionState {
    Vec8 mean = Vec8::Zero();
    Mat8 cov = Mat8::Identity();

    BoxXYAH xyah() const { return {mean(0), mean(1), mean(2), mean(3)}; }
    BoxTLBR tlbr() const { return xyah_to_tlbr(xyah()); }
};

/// 0.95 quantile of chi-square with 4 degrees of freedom.
inline constexpr double kChi2Gate4 = 9.4877;

MotionState kf_init(const BoxXYAH& obs, const KalmanParams& params);
MotionState kf_predict(const MotionState& s, const KalmanParams& params);
// Throws std::runtime_error when the innovation covariance is singular.
MotionState kf_update(const MotionState& s, const BoxXYAH& obs, const KalmanParams& params);

/// Innovation covariance H P H^T + R of the measurement distribution.
Mat4 innovation_cov(const MotionState& s, const KalmanParams& params);

/// Squared Mahalanobis distance of obs from the measurement distribution of s.
/// Empty when the innovation covariance cannot be inverted (gating failure).
std::optional<double> mahalanobis(const MotionState& s, const BoxXYAH& obs,
                                  const KalmanParams& params);
std::optional<double> squared_mahalanobis(const Vec4& innovation, const Mat4& cov);

}  // namespace tracklab
