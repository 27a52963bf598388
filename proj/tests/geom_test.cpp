#include <gtest/gtest.h>

#include <random>

#include <Eigen/Geometry>

#include "splatbudget/geom.hpp"

namespace sb = splatbudget;

namespace {

Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  return q.normalized().toRotationMatrix();
}

sb::Pose random_pose(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  return sb::Pose::from_parts(random_rotation(rng), {u(rng), u(rng), u(rng)});
}

/// Applies x -> s R x + t to a camera-to-world pose.
sb::Pose apply(double s, const Eigen::Matrix3d& r, const Eigen::Vector3d& t, const sb::Pose& p) {
  return sb::Pose::from_parts(r * p.rotation(), s * (r * p.center()) + t);
}

double max_abs_diff(const sb::Pose& a, const sb::Pose& b) {
  return (a.matrix() - b.matrix()).cwiseAbs().maxCoeff();
}

}  // namespace

TEST(Pose, ValidatesRotationAndLastRow) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  EXPECT_NO_THROW(sb::Pose{m});
  m(0, 0) = 2.0;
  EXPECT_THROW(sb::Pose{m}, sb::InvalidArgument);
  m = Eigen::Matrix4d::Identity();
  m(0, 0) = -1.0;  // reflection
  EXPECT_THROW(sb::Pose{m}, sb::InvalidArgument);
  m = Eigen::Matrix4d::Identity();
  m(3, 0) = 0.5;
  EXPECT_THROW(sb::Pose{m}, sb::InvalidArgument);
}

TEST(EstimateAlignment, IdenticalFramesGiveIdentity) {
  std::mt19937_64 rng(1);
  const auto n1 = random_pose(rng), n2 = random_pose(rng), target = random_pose(rng);
  const auto a = sb::estimate_alignment(n1, n2, n1, n2);
  EXPECT_NEAR(a.scale, 1.0, 1e-15);
  EXPECT_LT((a.rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT(a.translation.cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT(max_abs_diff(sb::align_target(a, target), target), 1e-14);
}

TEST(EstimateAlignment, UniformScaleAboutOrigin) {
  std::mt19937_64 rng(2);
  const auto n1 = random_pose(rng), n2 = random_pose(rng), target = random_pose(rng);
  const Eigen::Matrix3d I = Eigen::Matrix3d::Identity();
  const Eigen::Vector3d zero = Eigen::Vector3d::Zero();
  const auto a = sb::estimate_alignment(n1, n2, apply(2.0, I, zero, n1), apply(2.0, I, zero, n2));
  EXPECT_NEAR(a.scale, 2.0, 1e-14);
  const auto aligned = sb::align_target(a, target);
  EXPECT_LT(max_abs_diff(aligned, apply(2.0, I, zero, target)), 1e-12);
  // Translation relative to the anchor is doubled.
  const Eigen::Vector3d rel_gt = target.center() - n1.center();
  const Eigen::Vector3d rel_aligned = aligned.center() - 2.0 * n1.center();
  EXPECT_LT((rel_aligned - 2.0 * rel_gt).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(EstimateAlignment, KnownRotation) {
  std::mt19937_64 rng(3);
  const auto n1 = random_pose(rng), n2 = random_pose(rng), target = random_pose(rng);
  const Eigen::Matrix3d r0 = random_rotation(rng);
  const Eigen::Vector3d zero = Eigen::Vector3d::Zero();
  const auto a = sb::estimate_alignment(n1, n2, apply(1.0, r0, zero, n1), apply(1.0, r0, zero, n2));
  EXPECT_LT(max_abs_diff(sb::align_target(a, target), apply(1.0, r0, zero, target)), 1e-12);
}

TEST(EstimateAlignment, DegenerateBaseline) {
  std::mt19937_64 rng(4);
  const auto n1 = random_pose(rng);
  const auto n2 = sb::Pose::from_parts(random_rotation(rng), n1.center());
  const auto other = random_pose(rng);
  EXPECT_THROW(sb::estimate_alignment(n1, n2, n1, other), sb::DegenerateBaseline);
  EXPECT_THROW(sb::estimate_alignment(n1, other, n1, n1), sb::DegenerateBaseline);
}

TEST(AlignTarget, AnchorExactnessAndIdentity) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const auto g1 = random_pose(rng), g2 = random_pose(rng), p1 = random_pose(rng), p2 = random_pose(rng);
    const auto a = sb::estimate_alignment(g1, g2, p1, p2);
    EXPECT_LT(max_abs_diff(sb::align_target(a, g1), p1), 1e-9);
    const auto t = random_pose(rng);
    EXPECT_LT(max_abs_diff(sb::align_target(sb::SimilarityTransform{}, t), t), 1e-15);
  }
}

TEST(AlignTarget, GlobalSimilarityRecovery) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> us(0.1, 10.0), ut(-3.0, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double s = us(rng);
    const Eigen::Matrix3d r = random_rotation(rng);
    const Eigen::Vector3d t(ut(rng), ut(rng), ut(rng));
    const auto g1 = random_pose(rng), g2 = random_pose(rng), target = random_pose(rng);
    const auto a = sb::estimate_alignment(g1, g2, apply(s, r, t, g1), apply(s, r, t, g2));
    EXPECT_LT(max_abs_diff(sb::align_target(a, target), apply(s, r, t, target)), 1e-9);

    // Swapping the two views of the scale pair leaves the scale unchanged.
    const auto reversed_pair = sb::estimate_alignment(g2, g1, apply(s, r, t, g2), apply(s, r, t, g1));
    EXPECT_EQ(a.scale, reversed_pair.scale);
  }
}

TEST(AlignTarget, ReorthonormalizesDrift) {
  sb::SimilarityTransform a;
  a.rotation = Eigen::AngleAxisd(0.3, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  a.rotation(0, 0) += 1e-11;
  const auto aligned = sb::align_target(a, sb::Pose{});
  const Eigen::Matrix3d r = aligned.rotation();
  EXPECT_LT((r * r.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(TransferFocal, Examples) {
  EXPECT_EQ(sb::transfer_focal(500, 500, 800), 800.0);
  EXPECT_EQ(sb::transfer_focal(600, 500, 800), 960.0);
  EXPECT_EQ(sb::transfer_focal(250, 500, 800), 400.0);
  EXPECT_THROW(sb::transfer_focal(500, 0, 800), sb::InvalidArgument);
  EXPECT_THROW(sb::transfer_focal(500, -1, 800), sb::InvalidArgument);
}

TEST(SceneScaleLoss, Examples) {
  std::mt19937_64 rng(7);
  std::vector<Eigen::Vector3d> unit;
  for (int i = 0; i < 50; ++i) unit.push_back(Eigen::Vector3d::Random().normalized());
  EXPECT_NEAR(sb::scene_scale_loss(unit), 0.0, 1e-15);

  const std::vector<Eigen::Vector3d> origin{Eigen::Vector3d::Zero()};
  EXPECT_EQ(sb::scene_scale_loss(origin), 1.0);

  const std::vector<Eigen::Vector3d> radii{{1, 0, 0}, {0, 3, 0}};
  EXPECT_EQ(sb::scene_scale_loss(radii), 1.0);

  EXPECT_THROW(sb::scene_scale_loss(std::vector<Eigen::Vector3d>{}), sb::InvalidArgument);
}

TEST(SceneScaleLoss, RotationInvariantAndLinearInRadius) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<Eigen::Vector3d> pts;
  for (int i = 0; i < 40; ++i) pts.emplace_back(u(rng), u(rng), u(rng));
  const Eigen::Matrix3d r = random_rotation(rng);
  std::vector<Eigen::Vector3d> rotated;
  for (const auto& p : pts) rotated.push_back(r * p);
  EXPECT_NEAR(sb::scene_scale_loss(pts), sb::scene_scale_loss(rotated), 1e-12);

  std::vector<Eigen::Vector3d> unit;
  for (int i = 0; i < 40; ++i) unit.push_back(Eigen::Vector3d(u(rng), u(rng), u(rng)).normalized());
  for (double k : {0.0, 0.25, 1.0, 2.5, 7.0}) {
    std::vector<Eigen::Vector3d> scaled;
    for (const auto& p : unit) scaled.push_back(k * p);
    EXPECT_NEAR(sb::scene_scale_loss(scaled), std::abs(k - 1.0), 1e-12);
  }
}
