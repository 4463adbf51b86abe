// End-to-end tour of the library on a miniature body model: skinning and
// keypoints, alignment metrics, benchmark ranking, and a sampling plan.

#include <iostream>

#include <ehps/ehps.hpp>

namespace {

// Two-joint arm: root at origin, elbow 300 mm up, four vertices around the
// upper segment.
ehps::BodyModelDef make_arm() {
  ehps::BodyModelDef m;
  m.tree.parents = {-1, 0};
  m.template_vertices.resize(4, 3);
  m.template_vertices << 0, 80, 0,  //
      30, 150, 20,                  //
      -30, 320, 0,                  //
      10, 420, -15;
  m.shape_coeffs = 1;
  m.expr_coeffs = 0;
  // One shape direction: +1 mm of z per unit coefficient, every vertex.
  m.shape_basis = Eigen::MatrixXd::Zero(12, 1);
  for (int v = 0; v < 4; ++v) m.shape_basis(3 * v + 2, 0) = 1.0;
  m.joint_regressor.resize(2, 4);
  m.joint_regressor << 0.5, 0.5, 0.0, 0.0,  //
      0.0, 0.0, 0.5, 0.5;
  m.skinning_weights.resize(4, 2);
  m.skinning_weights << 1.0, 0.0,  //
      0.9, 0.1,                    //
      0.2, 0.8,                    //
      0.0, 1.0;
  m.validate();
  return m;
}

}  // namespace

int main() {
  const ehps::BodyModelDef arm = make_arm();

  // Bend the elbow 90 degrees about x.
  ehps::FullPose pose = ehps::FullPose::zeros(2);
  pose.axis_angle(1, 0) = 1.5707963267948966;

  const Eigen::VectorXd beta = Eigen::VectorXd::Constant(1, 5.0);  // +5 mm z
  const Eigen::VectorXd psi(0);

  std::cout << "rest keypoints:\n"
            << ehps::model_keypoints(arm, ehps::FullPose::zeros(2), beta, psi) << "\n";
  // The elbow is a leaf joint, so bending it moves the surface but leaves the
  // regressed joint positions where they were.
  std::cout << "bent keypoints (leaf rotation, joints stay put):\n"
            << ehps::model_keypoints(arm, pose, beta, psi) << "\n";

  const Eigen::MatrixX3d posed = ehps::skin(arm, pose, beta, psi);
  const Eigen::MatrixX3d rest = ehps::skin(arm, ehps::FullPose::zeros(2), beta, psi);
  std::cout << "mean vertex displacement rest->bent: " << ehps::mean_l2(posed, rest)
            << " mm\n";
  std::cout << "same, after similarity alignment:    " << ehps::pa_error(posed, rest)
            << " mm\n\n";

  // Rank a small results grid; the diagonal is excluded as in-domain.
  const char* csv =
      "dataset,A,B\n"
      "alpha,100.0,120.0\n"
      "beta,90.0,200.0\n";
  ehps::ResultsMatrix matrix = ehps::ResultsMatrix::from_csv(csv);
  ehps::InDomainMask mask;  // no exclusions for this toy grid
  const ehps::RankingTable table = ehps::rank_datasets(matrix, mask);
  std::cout << ehps::ranking_to_text(table) << "\n";

  // Weighted sampling plan: top rank gets 4x the bottom rank's share.
  const std::vector<ehps::DatasetSpec> specs = {
      {"alpha", 50000, 1}, {"beta", 20000, 2}, {"gamma", 90000, 3}, {"delta", 1000, 4}};
  std::cout << ehps::plan_to_text(ehps::plan_weighted(specs, 100));
  return 0;
}
