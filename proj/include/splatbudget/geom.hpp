#pragma once

/// Target-camera alignment into a predicted coordinate frame, focal transfer
/// and the scene-scale regularizer.
///
/// Poses are 4x4 camera-to-world matrices [R c; 0 1]; the camera center is
/// the translation column.

#include <cmath>
#include <span>
#include <string>

#include <Eigen/Dense>

#include "splatbudget/errors.hpp"

namespace splatbudget {

inline constexpr double kPoseTolerance = 1e-9;

class Pose {
 public:
  Pose() : matrix_(Eigen::Matrix4d::Identity()) {}

  /// Validates orthonormality (1e-9), det R = +1 and the homogeneous row.
  explicit Pose(const Eigen::Matrix4d& matrix) : matrix_(matrix) {
    const Eigen::Matrix3d r = rotation();
    if (!matrix.allFinite()) throw InvalidArgument("pose has non-finite entries");
    if ((r * r.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > kPoseTolerance) {
      throw InvalidArgument("pose rotation is not orthonormal");
    }
    if (std::abs(r.determinant() - 1.0) > kPoseTolerance) {
      throw InvalidArgument("pose rotation must have determinant +1");
    }
    const Eigen::RowVector4d last = matrix.row(3);
    if (last != Eigen::RowVector4d(0, 0, 0, 1)) {
      throw InvalidArgument("pose last row must be (0, 0, 0, 1)");
    }
  }

  static Pose from_parts(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& center) {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.topLeftCorner<3, 3>() = rotation;
    m.topRightCorner<3, 1>() = center;
    return Pose(m);
  }

  const Eigen::Matrix4d& matrix() const { return matrix_; }
  Eigen::Matrix3d rotation() const { return matrix_.topLeftCorner<3, 3>(); }
  Eigen::Vector3d center() const { return matrix_.topRightCorner<3, 1>(); }

 private:
  Eigen::Matrix4d matrix_;
};

/// x -> scale * rotation * x + translation.
struct SimilarityTransform {
  double scale = 1.0;
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  Eigen::Matrix4d matrix() const {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.topLeftCorner<3, 3>() = scale * rotation;
    m.topRightCorner<3, 1>() = translation;
    return m;
  }
};

/// Nearest rotation in the Frobenius sense.
inline Eigen::Matrix3d orthonormalize(const Eigen::Matrix3d& m) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0.0) {
    Eigen::Matrix3d u = svd.matrixU();
    u.col(2) *= -1.0;
    r = u * svd.matrixV().transpose();
  }
  return r;
}

/// Similarity that maps the ground-truth frame onto the predicted one.
/// View n1 anchors rotation and translation; the scale is the ratio of the
/// n1-n2 baselines. Equivalently A = pred_n1 * diag(s, s, s, 1) * gt_n1^-1,
/// which scales each pose's translation relative to the anchor camera.
inline SimilarityTransform estimate_alignment(const Pose& gt_n1, const Pose& gt_n2,
                                              const Pose& pred_n1, const Pose& pred_n2) {
  const double gt_baseline = (gt_n1.center() - gt_n2.center()).norm();
  const double pred_baseline = (pred_n1.center() - pred_n2.center()).norm();
  if (!(gt_baseline > 0.0) || !(pred_baseline > 0.0)) {
    throw DegenerateBaseline("camera centers of the two reference views coincide");
  }
  SimilarityTransform a;
  a.scale = pred_baseline / gt_baseline;
  a.rotation = pred_n1.rotation() * gt_n1.rotation().transpose();
  a.translation = pred_n1.center() - a.scale * (a.rotation * gt_n1.center());
  return a;
}

/// A * T with the scale removed from the rotation block.
inline Pose align_target(const SimilarityTransform& transform, const Pose& gt_target) {
  Eigen::Matrix3d r = transform.rotation * gt_target.rotation();
  if ((r * r.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-12) {
    r = orthonormalize(r);
  }
  const Eigen::Vector3d c =
      transform.scale * (transform.rotation * gt_target.center()) + transform.translation;
  return Pose::from_parts(r, c);
}

/// (pred_f_n1 / gt_f_n1) * gt_f_target, computed with a single rounding.
inline double transfer_focal(double pred_f_n1, double gt_f_n1, double gt_f_target) {
  if (!(gt_f_n1 > 0.0)) throw InvalidArgument("ground-truth focal length must be positive");
  return pred_f_n1 * gt_f_target / gt_f_n1;
}

/// |mean_g ||mu_g||_2 - 1|.
inline double scene_scale_loss(std::span<const Eigen::Vector3d> centers) {
  if (centers.empty()) throw InvalidArgument("scene scale loss needs at least one center");
  double acc = 0.0;
  for (const auto& mu : centers) {
    if (!mu.allFinite()) throw InvalidArgument("Gaussian center must be finite");
    acc += mu.norm();
  }
  return std::abs(acc / static_cast<double>(centers.size()) - 1.0);
}

}  // namespace splatbudget
