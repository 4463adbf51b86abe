#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ehps/errors.hpp"

namespace ehps {

struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation * p + translation; }

  // this followed by other applied first: (this o other)(x) = this(other(x)).
  RigidTransform compose(const RigidTransform& other) const {
    return {rotation * other.rotation, rotation * other.translation + translation};
  }
};

// Parent indices, root first with sentinel -1, topologically sorted
// (parent[i] < i), exactly one root.
struct KinematicTree {
  std::vector<int> parents;

  int joint_count() const { return static_cast<int>(parents.size()); }

  void validate() const {
    require(!parents.empty(), errc::invalid_argument, "kinematic tree is empty");
    require(parents[0] == -1, errc::invalid_argument, "joint 0 must be the root (parent -1)");
    for (std::size_t i = 1; i < parents.size(); ++i) {
      require(parents[i] != -1, errc::invalid_argument,
              "multiple roots: joint " + std::to_string(i) + " has parent -1");
      require(parents[i] >= 0 && parents[i] < static_cast<int>(i), errc::invalid_argument,
              "tree not topologically sorted at joint " + std::to_string(i));
    }
  }
};

// World transform per joint. Convention: the recurrence is
//   world(i) = world(parent) o translate(rest_i - rest_parent) o rotate(local_i)
// and the root anchors as
//   world(root) = rotate(local_root) o translate(rest_root),
// i.e. the global orientation acts about the coordinate origin. With identity
// rotations every world translation lands on its rest joint; rotating only the
// root by R maps every joint position to R * rest_position (rigid
// equivariance about the origin). Note this differs from implementations that
// rotate about the root joint; the two are related by a global rigid motion.
inline std::vector<RigidTransform> forward_kinematics(const KinematicTree& tree,
                                                      const std::vector<Eigen::Matrix3d>& local,
                                                      const Eigen::MatrixX3d& rest_joints) {
  tree.validate();
  const int j = tree.joint_count();
  require(static_cast<int>(local.size()) == j, errc::dimension_mismatch,
          "forward_kinematics: rotation count != joint count");
  require(rest_joints.rows() == j, errc::dimension_mismatch,
          "forward_kinematics: rest joint count != joint count");

  std::vector<RigidTransform> world(j);
  world[0] = RigidTransform{local[0], Eigen::Vector3d::Zero()}
                 .compose(RigidTransform{Eigen::Matrix3d::Identity(), rest_joints.row(0)});
  for (int i = 1; i < j; ++i) {
    const int p = tree.parents[i];
    const RigidTransform step{local[i],
                              Eigen::Vector3d(rest_joints.row(i) - rest_joints.row(p))};
    world[i] = world[p].compose(step);
  }
  return world;
}

}  // namespace ehps
