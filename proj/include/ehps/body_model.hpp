#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "ehps/errors.hpp"
#include "ehps/kinematics.hpp"
#include "ehps/rotation.hpp"

namespace ehps {

// Full pose: one axis-angle row per joint. Slot 0 is the global orientation;
// the default 55-joint layout continues body(21), jaw(1), eyes(2), then
// left/right hand (15 each).
struct FullPose {
  Eigen::Matrix<double, Eigen::Dynamic, 3> axis_angle;

  static FullPose zeros(int joints) {
    FullPose p;
    p.axis_angle = Eigen::Matrix<double, Eigen::Dynamic, 3>::Zero(joints, 3);
    return p;
  }

  int joint_count() const { return static_cast<int>(axis_angle.rows()); }

  void validate() const {
    require(axis_angle.allFinite(), errc::invalid_argument, "pose has non-finite entries");
    for (int i = 0; i < axis_angle.rows(); ++i) {
      require(axis_angle.row(i).norm() < 2.0 * M_PI, errc::out_of_range,
              "pose joint " + std::to_string(i) + " magnitude >= 2*pi");
    }
  }
};

// Default SMPL-X style joint layout constants.
inline constexpr int kDefaultJointCount = 55;
inline constexpr int kGlobalSlot = 0;
inline constexpr int kBodyFirst = 1, kBodyCount = 21;
inline constexpr int kJawSlot = 22;
inline constexpr int kLeftEyeSlot = 23, kRightEyeSlot = 24;
inline constexpr int kLeftHandFirst = 25, kRightHandFirst = 40, kHandJointCount = 15;

inline const std::vector<int>& default_smplx_parents() {
  static const std::vector<int> parents = {
      -1, 0,  0,  0,  1,  2,  3,  4,  5,  6,  7,  8,  9,  9,  9,  12, 13, 14, 16,
      17, 18, 19, 15, 15, 15, 20, 25, 26, 20, 28, 29, 20, 31, 32, 20, 34, 35, 20,
      37, 38, 21, 40, 41, 21, 43, 44, 21, 46, 47, 21, 49, 50, 21, 52, 53};
  return parents;
}

// Data-driven model definition. All positions in millimeters. The blend-shape
// basis concatenates shape (beta) columns then expression (psi) columns; each
// column is a V x 3 displacement flattened row-major, so basis row index is
// 3*v + axis. The optional pose-corrective basis has one column per entry of
// the pose feature vec(R_j - I), j = 1..J-1.
struct BodyModelDef {
  Eigen::MatrixX3d template_vertices;  // V x 3
  Eigen::MatrixXd shape_basis;         // 3V x (shape_coeffs + expr_coeffs)
  int shape_coeffs = 10;
  int expr_coeffs = 10;
  Eigen::MatrixXd pose_corrective_basis;  // 3V x 9(J-1), or 0x0 when absent
  Eigen::MatrixXd joint_regressor;        // J x V, rows sum to 1
  Eigen::MatrixXd skinning_weights;       // V x J, rows sum to 1
  KinematicTree tree;
  std::map<std::string, std::vector<int>> part_masks;        // vertex index sets
  std::map<std::string, std::vector<int>> part_joint_masks;  // joint index sets

  int vertex_count() const { return static_cast<int>(template_vertices.rows()); }
  int joint_count() const { return tree.joint_count(); }
  bool has_pose_correctives() const { return pose_corrective_basis.cols() > 0; }

  void validate() const {
    const int v = vertex_count();
    const int j = joint_count();
    tree.validate();
    require(v > 0, errc::invalid_argument, "model has no vertices");
    require(template_vertices.allFinite(), errc::invalid_argument, "template has non-finite entries");
    require(shape_coeffs >= 0 && expr_coeffs >= 0, errc::invalid_argument, "negative coefficient count");
    require(shape_basis.rows() == 3 * v, errc::dimension_mismatch,
            "shape basis rows != 3*vertex count");
    require(shape_basis.cols() == shape_coeffs + expr_coeffs, errc::dimension_mismatch,
            "shape basis columns != shape_coeffs + expr_coeffs");
    require(shape_basis.allFinite(), errc::invalid_argument, "shape basis has non-finite entries");
    if (pose_corrective_basis.size() > 0) {
      require(pose_corrective_basis.rows() == 3 * v, errc::dimension_mismatch,
              "pose corrective basis rows != 3*vertex count");
      require(pose_corrective_basis.cols() == 9 * (j - 1), errc::dimension_mismatch,
              "pose corrective basis columns != 9*(joint count - 1)");
    }
    require(joint_regressor.rows() == j && joint_regressor.cols() == v, errc::dimension_mismatch,
            "joint regressor must be J x V");
    require(skinning_weights.rows() == v && skinning_weights.cols() == j, errc::dimension_mismatch,
            "skinning weights must be V x J");
    for (int r = 0; r < j; ++r) {
      require(joint_regressor.row(r).minCoeff() >= 0.0, errc::bad_value,
              "joint regressor row " + std::to_string(r) + " has negative weight");
      require(std::abs(joint_regressor.row(r).sum() - 1.0) <= 1e-6, errc::bad_value,
              "joint regressor row " + std::to_string(r) + " does not sum to 1");
    }
    for (int r = 0; r < v; ++r) {
      require(skinning_weights.row(r).minCoeff() >= 0.0, errc::bad_value,
              "skinning weight row " + std::to_string(r) + " has negative weight");
      require(std::abs(skinning_weights.row(r).sum() - 1.0) <= 1e-6, errc::bad_value,
              "skinning weight row " + std::to_string(r) + " does not sum to 1");
    }
    std::vector<char> seen(static_cast<std::size_t>(v), 0);
    for (const auto& [name, mask] : part_masks) {
      for (int idx : mask) {
        require(idx >= 0 && idx < v, errc::out_of_range,
                "part mask '" + name + "' index out of range");
        require(!seen[static_cast<std::size_t>(idx)], errc::bad_value,
                "part masks overlap at vertex " + std::to_string(idx));
        seen[static_cast<std::size_t>(idx)] = 1;
      }
    }
    for (const auto& [name, mask] : part_joint_masks) {
      for (int idx : mask) {
        require(idx >= 0 && idx < j, errc::out_of_range,
                "part joint mask '" + name + "' index out of range");
      }
    }
  }
};

namespace detail {

inline void check_coeffs(const BodyModelDef& m, const Eigen::VectorXd& beta,
                         const Eigen::VectorXd& psi) {
  require(beta.size() == m.shape_coeffs, errc::dimension_mismatch,
          "beta length != model shape_coeffs");
  require(psi.size() == m.expr_coeffs, errc::dimension_mismatch,
          "psi length != model expr_coeffs");
  require(beta.allFinite() && psi.allFinite(), errc::invalid_argument,
          "shape/expression coefficients must be finite");
}

// 3V flat vector (row-major V x 3) -> V x 3 matrix.
inline Eigen::MatrixX3d unflatten(const Eigen::VectorXd& flat, int v) {
  Eigen::MatrixX3d out(v, 3);
  for (int i = 0; i < v; ++i) {
    out(i, 0) = flat(3 * i + 0);
    out(i, 1) = flat(3 * i + 1);
    out(i, 2) = flat(3 * i + 2);
  }
  return out;
}

}  // namespace detail

// Template plus blend-shape displacements for concatenated (beta, psi).
// Pose correctives are not applied here; they are pose-dependent.
inline Eigen::MatrixX3d shaped_vertices(const BodyModelDef& m, const Eigen::VectorXd& beta,
                                        const Eigen::VectorXd& psi) {
  detail::check_coeffs(m, beta, psi);
  Eigen::VectorXd coeff(m.shape_coeffs + m.expr_coeffs);
  coeff << beta, psi;
  if (coeff.size() == 0) return m.template_vertices;
  const Eigen::VectorXd disp = m.shape_basis * coeff;
  return m.template_vertices + detail::unflatten(disp, m.vertex_count());
}

// Rest joints regressed from the shaped template (correctives never enter
// joint regression).
inline Eigen::MatrixX3d regress_rest_joints(const BodyModelDef& m, const Eigen::VectorXd& beta,
                                            const Eigen::VectorXd& psi) {
  return m.joint_regressor * shaped_vertices(m, beta, psi);
}

inline std::vector<Eigen::Matrix3d> local_rotations(const FullPose& pose) {
  pose.validate();
  std::vector<Eigen::Matrix3d> rot(static_cast<std::size_t>(pose.joint_count()));
  for (int i = 0; i < pose.joint_count(); ++i) {
    rot[static_cast<std::size_t>(i)] = rodrigues(pose.axis_angle.row(i));
  }
  return rot;
}

// Pose feature for correctives: concat of vec(R_j - I), row-major, for every
// non-root joint.
inline Eigen::VectorXd pose_feature(const std::vector<Eigen::Matrix3d>& rot) {
  require(!rot.empty(), errc::invalid_argument, "pose_feature: no rotations");
  Eigen::VectorXd f(9 * (static_cast<int>(rot.size()) - 1));
  int at = 0;
  for (std::size_t j = 1; j < rot.size(); ++j) {
    const Eigen::Matrix3d d = rot[j] - Eigen::Matrix3d::Identity();
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) f(at++) = d(r, c);
  }
  return f;
}

// Linear blend skinning. T_j is the world transform re-expressed relative to
// the rest joint (so the rest pose maps to itself), applied to the shaped
// vertices (plus pose correctives when the model carries a corrective basis).
inline Eigen::MatrixX3d skin(const BodyModelDef& m, const FullPose& pose,
                             const Eigen::VectorXd& beta, const Eigen::VectorXd& psi) {
  require(pose.joint_count() == m.joint_count(), errc::dimension_mismatch,
          "pose joint count != model joint count");
  Eigen::MatrixX3d shaped = shaped_vertices(m, beta, psi);
  const Eigen::MatrixX3d rest = m.joint_regressor * shaped;
  const std::vector<Eigen::Matrix3d> rot = local_rotations(pose);
  const std::vector<RigidTransform> world = forward_kinematics(m.tree, rot, rest);

  if (m.has_pose_correctives()) {
    shaped += detail::unflatten(m.pose_corrective_basis * pose_feature(rot), m.vertex_count());
  }

  Eigen::MatrixX3d out = Eigen::MatrixX3d::Zero(m.vertex_count(), 3);
  for (int j = 0; j < m.joint_count(); ++j) {
    // A_j = world_j o translate(-rest_j)
    const Eigen::Matrix3d r = world[static_cast<std::size_t>(j)].rotation;
    const Eigen::Vector3d t = world[static_cast<std::size_t>(j)].translation -
                              r * Eigen::Vector3d(rest.row(j));
    Eigen::MatrixX3d moved = shaped * r.transpose();
    moved.rowwise() += t.transpose();
    out.array() += moved.array().colwise() * m.skinning_weights.col(j).array();
  }
  return out;
}

// Posed keypoints R_theta(J(beta)): world transforms of the kinematic chain
// evaluated at the regressed rest joints. Equals skin() applied to a virtual
// vertex sitting at the rest joint with a one-hot skinning row.
inline Eigen::MatrixX3d model_keypoints(const BodyModelDef& m, const FullPose& pose,
                                        const Eigen::VectorXd& beta, const Eigen::VectorXd& psi) {
  require(pose.joint_count() == m.joint_count(), errc::dimension_mismatch,
          "pose joint count != model joint count");
  const Eigen::MatrixX3d rest = regress_rest_joints(m, beta, psi);
  const std::vector<RigidTransform> world = forward_kinematics(m.tree, local_rotations(pose), rest);
  Eigen::MatrixX3d out(m.joint_count(), 3);
  for (int j = 0; j < m.joint_count(); ++j) {
    out.row(j) = world[static_cast<std::size_t>(j)].translation;
  }
  return out;
}

// Alternative keypoint path: joint regressor applied to posed vertices.
inline Eigen::MatrixX3d keypoints_from_vertices(const BodyModelDef& m,
                                                const Eigen::MatrixX3d& posed_vertices) {
  require(posed_vertices.rows() == m.vertex_count(), errc::dimension_mismatch,
          "posed vertex count != model vertex count");
  return m.joint_regressor * posed_vertices;
}

}  // namespace ehps
