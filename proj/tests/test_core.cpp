// Rotation, kinematics and body-model behavior, cross-checked against
// quaternion-based oracles and a naive skinning loop.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <ehps/body_model.hpp>
#include <ehps/kinematics.hpp>
#include <ehps/random.hpp>
#include <ehps/rotation.hpp>

#include "support/oracles.hpp"
#include "support/toy_models.hpp"

using namespace ehps;
using Catch::Approx;
namespace ts = ehps::testsupport;

namespace {

Eigen::Vector3d random_axis_angle(Rng& rng, double max_angle) {
  Eigen::Vector3d axis(rng.normal(), rng.normal(), rng.normal());
  while (axis.norm() < 1e-6) axis = Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());
  axis.normalize();
  return rng.uniform(0.0, max_angle) * axis;
}

}  // namespace

TEST_CASE("rodrigues matches the quaternion oracle") {
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    const Eigen::Vector3d aa = random_axis_angle(rng, 3.1);
    const Eigen::Matrix3d r = rodrigues(aa);
    const Eigen::Matrix3d q = ts::quat_to_matrix(ts::quat_from_axis_angle(aa));
    REQUIRE((r - q).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("rodrigues produces orthonormal right-handed matrices") {
  Rng rng(12);
  for (int i = 0; i < 200; ++i) {
    const Eigen::Matrix3d r = rodrigues(random_axis_angle(rng, 6.2));
    REQUIRE((r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-14);
    REQUIRE(r.determinant() == Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("rodrigues is smooth and exact near zero") {
  REQUIRE(rodrigues(Eigen::Vector3d::Zero()) == Eigen::Matrix3d::Identity());
  const Eigen::Vector3d tiny(1e-10, -2e-10, 5e-11);
  const Eigen::Matrix3d r = rodrigues(tiny);
  // First-order: R ~ I + skew(aa).
  REQUIRE((r - Eigen::Matrix3d::Identity() - skew(tiny)).cwiseAbs().maxCoeff() < 1e-19);
}

TEST_CASE("rodrigues rejects non-finite input") {
  Eigen::Vector3d bad(std::nan(""), 0.0, 0.0);
  REQUIRE_THROWS_AS(rodrigues(bad), ValidationError);
}

TEST_CASE("rotation_log inverts rodrigues across the angle range") {
  Rng rng(13);
  for (int i = 0; i < 300; ++i) {
    Eigen::Vector3d aa = random_axis_angle(rng, M_PI - 1e-6);
    if (i % 7 == 0) aa *= 1e-7 / std::max(aa.norm(), 1e-300);  // tiny-angle regime
    const Eigen::Vector3d back = rotation_log(rodrigues(aa));
    REQUIRE((back - aa).norm() < 1e-9 * std::max(1.0, aa.norm()));
  }
}

TEST_CASE("rotation_log canonicalizes the half-turn sign") {
  const Eigen::Vector3d axis = Eigen::Vector3d(1.0, -2.0, 0.5).normalized();
  const Eigen::Vector3d aa = M_PI * axis;
  const Eigen::Vector3d a = rotation_log(rodrigues(aa));
  const Eigen::Vector3d b = rotation_log(rodrigues(-aa));  // same rotation
  REQUIRE((a - b).norm() < 1e-9);
  // First nonzero component is positive.
  REQUIRE(a.x() > 0.0);
}

TEST_CASE("rotation_log rejects non-rotations") {
  Eigen::Matrix3d scaled = 2.0 * Eigen::Matrix3d::Identity();
  REQUIRE_THROWS_AS(rotation_log(scaled), ValidationError);
  Eigen::Matrix3d reflection = Eigen::Matrix3d::Identity();
  reflection(2, 2) = -1.0;
  REQUIRE_THROWS_AS(rotation_log(reflection), ValidationError);
}

TEST_CASE("kinematic tree validation") {
  REQUIRE_NOTHROW((KinematicTree{{-1, 0, 1, 1}}.validate()));
  REQUIRE_THROWS_AS((KinematicTree{{}}.validate()), ValidationError);
  REQUIRE_THROWS_AS((KinematicTree{{0}}.validate()), ValidationError);          // root not -1
  REQUIRE_THROWS_AS((KinematicTree{{-1, -1}}.validate()), ValidationError);     // two roots
  REQUIRE_THROWS_AS((KinematicTree{{-1, 2, 1}}.validate()), ValidationError);   // not sorted
}

TEST_CASE("forward kinematics matches the quaternion path oracle") {
  Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const int joints = 2 + static_cast<int>(rng.below(7));
    KinematicTree tree;
    tree.parents.resize(static_cast<std::size_t>(joints));
    tree.parents[0] = -1;
    for (int i = 1; i < joints; ++i)
      tree.parents[static_cast<std::size_t>(i)] = static_cast<int>(rng.below(i));

    Eigen::MatrixX3d rest(joints, 3);
    for (int j = 0; j < joints; ++j)
      for (int c = 0; c < 3; ++c) rest(j, c) = rng.uniform(-300.0, 300.0);

    const FullPose pose = ts::random_pose(rng, joints, 0.6);
    const auto world = forward_kinematics(tree, local_rotations(pose), rest);
    const auto oracle = ts::fk_oracle(tree.parents, pose.axis_angle, rest);

    for (int j = 0; j < joints; ++j) {
      const Eigen::Matrix3d qr = ts::quat_to_matrix(oracle[static_cast<std::size_t>(j)].rotation);
      REQUIRE((world[static_cast<std::size_t>(j)].rotation - qr).cwiseAbs().maxCoeff() < 1e-12);
      REQUIRE((world[static_cast<std::size_t>(j)].translation -
               oracle[static_cast<std::size_t>(j)].translation)
                  .norm() < 1e-9);
    }
  }
}

TEST_CASE("identity pose pins every joint to its rest position") {
  Rng rng(22);
  KinematicTree tree{{-1, 0, 1, 0, 3}};
  Eigen::MatrixX3d rest(5, 3);
  for (int j = 0; j < 5; ++j)
    for (int c = 0; c < 3; ++c) rest(j, c) = rng.uniform(-100.0, 100.0);
  const FullPose pose = FullPose::zeros(5);
  const auto world = forward_kinematics(tree, local_rotations(pose), rest);
  for (int j = 0; j < 5; ++j) {
    REQUIRE(world[static_cast<std::size_t>(j)].rotation == Eigen::Matrix3d::Identity());
    REQUIRE((world[static_cast<std::size_t>(j)].translation - Eigen::Vector3d(rest.row(j))).norm() <
            1e-12);
  }
}

TEST_CASE("global rotation acts about the coordinate origin") {
  Rng rng(23);
  KinematicTree tree{{-1, 0, 1}};
  Eigen::MatrixX3d rest(3, 3);
  rest << 10, 20, 30, 50, 20, -10, 80, -5, 40;
  FullPose pose = FullPose::zeros(3);
  const Eigen::Vector3d global_aa = random_axis_angle(rng, 2.5);
  pose.axis_angle.row(0) = global_aa;
  const Eigen::Matrix3d r0 = rodrigues(global_aa);
  const auto world = forward_kinematics(tree, local_rotations(pose), rest);
  for (int j = 0; j < 3; ++j) {
    // Every joint lands on R0 * rest_j, not rest_0 + R0 * (rest_j - rest_0).
    REQUIRE((world[static_cast<std::size_t>(j)].translation - r0 * Eigen::Vector3d(rest.row(j)))
                .norm() < 1e-10);
  }
}

TEST_CASE("pose validation rejects rows at or beyond a full turn") {
  FullPose pose = FullPose::zeros(2);
  pose.axis_angle(1, 0) = 2.0 * M_PI;
  REQUIRE_THROWS_AS(pose.validate(), ValidationError);
  pose.axis_angle(1, 0) = 2.0 * M_PI - 1e-9;
  REQUIRE_NOTHROW(pose.validate());
  pose.axis_angle(0, 1) = std::numeric_limits<double>::infinity();
  REQUIRE_THROWS_AS(pose.validate(), ValidationError);
}

TEST_CASE("default joint layout is a valid 55-joint tree") {
  const auto& parents = default_smplx_parents();
  REQUIRE(static_cast<int>(parents.size()) == kDefaultJointCount);
  REQUIRE_NOTHROW(KinematicTree{parents}.validate());
  // Hand chains hang off the wrists (joints 20 and 21).
  REQUIRE(parents[static_cast<std::size_t>(kLeftHandFirst)] == 20);
  REQUIRE(parents[static_cast<std::size_t>(kRightHandFirst)] == 21);
  REQUIRE(parents[static_cast<std::size_t>(kJawSlot)] == 15);
}

TEST_CASE("shaped vertices are the template plus basis displacements") {
  Rng rng(31);
  const BodyModelDef m = ts::random_toy_model(rng, 4, 10, false);
  Eigen::VectorXd beta(2), psi(1);
  beta << 1.5, -0.75;
  psi << 0.25;
  const Eigen::MatrixX3d shaped = shaped_vertices(m, beta, psi);
  for (int v = 0; v < 10; ++v) {
    for (int c = 0; c < 3; ++c) {
      const double expected = m.template_vertices(v, c) + m.shape_basis(3 * v + c, 0) * 1.5 +
                              m.shape_basis(3 * v + c, 1) * -0.75 +
                              m.shape_basis(3 * v + c, 2) * 0.25;
      REQUIRE(shaped(v, c) == Approx(expected).margin(1e-12));
    }
  }
  REQUIRE_THROWS_AS(shaped_vertices(m, Eigen::VectorXd::Zero(3), psi), ValidationError);
}

TEST_CASE("skinning at the rest pose reproduces the shaped surface") {
  Rng rng(32);
  for (int trial = 0; trial < 10; ++trial) {
    const BodyModelDef m = ts::random_toy_model(rng, 5, 12, false);
    Eigen::VectorXd beta(2), psi(1);
    beta << rng.normal(), rng.normal();
    psi << rng.normal();
    const Eigen::MatrixX3d skinned = skin(m, FullPose::zeros(5), beta, psi);
    const Eigen::MatrixX3d shaped = shaped_vertices(m, beta, psi);
    REQUIRE((skinned - shaped).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("skin matches the naive per-vertex oracle") {
  Rng rng(33);
  for (int trial = 0; trial < 25; ++trial) {
    const bool correctives = trial % 2 == 0;
    const int joints = 2 + static_cast<int>(rng.below(6));
    const int verts = 4 + static_cast<int>(rng.below(16));
    const BodyModelDef m = ts::random_toy_model(rng, joints, verts, correctives);
    const FullPose pose = ts::random_pose(rng, joints, 0.5);
    Eigen::VectorXd beta(2), psi(1);
    beta << rng.normal(), rng.normal();
    psi << rng.normal();

    const Eigen::MatrixX3d got = skin(m, pose, beta, psi);
    const Eigen::MatrixX3d want = ts::skin_oracle(m, pose, beta, psi);
    REQUIRE((got - want).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("pose correctives displace the surface but never the joints") {
  Rng rng(34);
  BodyModelDef with = ts::random_toy_model(rng, 4, 8, true);
  BodyModelDef without = with;
  without.pose_corrective_basis.resize(0, 0);
  const FullPose pose = ts::random_pose(rng, 4, 0.5);
  const Eigen::VectorXd beta = Eigen::VectorXd::Zero(2), psi = Eigen::VectorXd::Zero(1);

  REQUIRE((skin(with, pose, beta, psi) - skin(without, pose, beta, psi)).cwiseAbs().maxCoeff() >
          1e-3);
  // Keypoints come from the regressed rest joints; correctives must not move them.
  REQUIRE((model_keypoints(with, pose, beta, psi) - model_keypoints(without, pose, beta, psi))
              .cwiseAbs()
              .maxCoeff() < 1e-12);
  // At the rest pose the corrective feature is identically zero.
  REQUIRE((skin(with, FullPose::zeros(4), beta, psi) -
           skin(without, FullPose::zeros(4), beta, psi))
              .cwiseAbs()
              .maxCoeff() < 1e-12);
}

TEST_CASE("model keypoints equal skinning of one-hot virtual vertices") {
  Rng rng(35);
  const BodyModelDef m = ts::random_toy_model(rng, 5, 10, false);
  const FullPose pose = ts::random_pose(rng, 5, 0.4);
  const Eigen::VectorXd beta = Eigen::VectorXd::Zero(2), psi = Eigen::VectorXd::Zero(1);
  const Eigen::MatrixX3d keypoints = model_keypoints(m, pose, beta, psi);
  const auto oracle = ts::fk_oracle(m.tree.parents, pose.axis_angle,
                                    regress_rest_joints(m, beta, psi));
  for (int j = 0; j < 5; ++j) {
    REQUIRE((Eigen::Vector3d(keypoints.row(j)) - oracle[static_cast<std::size_t>(j)].translation)
                .norm() < 1e-9);
  }
}

TEST_CASE("keypoints_from_vertices applies the regressor to posed vertices") {
  Rng rng(36);
  const BodyModelDef m = ts::random_toy_model(rng, 4, 9, false);
  const FullPose pose = ts::random_pose(rng, 4, 0.4);
  const Eigen::VectorXd beta = Eigen::VectorXd::Zero(2), psi = Eigen::VectorXd::Zero(1);
  const Eigen::MatrixX3d posed = skin(m, pose, beta, psi);
  const Eigen::MatrixX3d kp = keypoints_from_vertices(m, posed);
  REQUIRE((kp - m.joint_regressor * posed).cwiseAbs().maxCoeff() == 0.0);
  Eigen::MatrixX3d wrong(3, 3);
  wrong.setZero();
  REQUIRE_THROWS_AS(keypoints_from_vertices(m, wrong), ValidationError);
}

TEST_CASE("model validation rejects malformed definitions") {
  Rng rng(37);
  const BodyModelDef good = ts::random_toy_model(rng, 4, 8, false);

  BodyModelDef bad = good;
  bad.joint_regressor(0, 0) += 0.5;  // row no longer sums to 1
  REQUIRE_THROWS_AS(bad.validate(), ValidationError);

  bad = good;
  bad.skinning_weights(2, 0) = -0.1;
  bad.skinning_weights(2, 1) += 0.1;
  REQUIRE_THROWS_AS(bad.validate(), ValidationError);

  bad = good;
  bad.shape_basis.resize(3 * 8, 1);
  REQUIRE_THROWS_AS(bad.validate(), ValidationError);

  bad = good;
  bad.part_masks = {{"a", {0, 1}}, {"b", {1, 2}}};  // overlap at vertex 1
  REQUIRE_THROWS_AS(bad.validate(), ValidationError);

  bad = good;
  bad.part_masks = {{"a", {99}}};
  REQUIRE_THROWS_AS(bad.validate(), ValidationError);

  bad = good;
  bad.part_joint_masks = {{"a", {7}}};
  REQUIRE_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("skin is exactly affine in the shape coefficients at fixed pose") {
  Rng rng(38);
  const BodyModelDef m = ts::random_toy_model(rng, 5, 14, true);
  const FullPose pose = ts::random_pose(rng, 5, 0.5);
  const Eigen::VectorXd psi = Eigen::VectorXd::Zero(1);

  const Eigen::MatrixX3d base = skin(m, pose, Eigen::VectorXd::Zero(2), psi);
  Eigen::MatrixX3d dir0 = skin(m, pose, Eigen::Vector2d(1, 0), psi) - base;
  Eigen::MatrixX3d dir1 = skin(m, pose, Eigen::Vector2d(0, 1), psi) - base;

  for (int i = 0; i < 20; ++i) {
    const Eigen::Vector2d b(rng.normal(0.0, 2.0), rng.normal(0.0, 2.0));
    const Eigen::MatrixX3d direct = skin(m, pose, b, psi);
    const Eigen::MatrixX3d affine = base + b(0) * dir0 + b(1) * dir1;
    const double scale = std::max(1.0, direct.cwiseAbs().maxCoeff());
    REQUIRE((direct - affine).cwiseAbs().maxCoeff() / scale < 1e-12);
  }
}
