#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "ehps/body_model.hpp"
#include "ehps/errors.hpp"
#include "ehps/humandata.hpp"
#include "ehps/random.hpp"

namespace ehps {

// ---------------------------------------------------------------------------
// Shape adapter: a small MLP mapping source shape coefficients to target shape
// coefficients so that the two models produce matching surfaces. Hidden layers
// use ReLU; the last layer is linear; an optional identity skip connection is
// added when input and output widths agree.
// ---------------------------------------------------------------------------

struct MlpAdapter {
  std::vector<int> widths;                 // layer widths, input first
  std::vector<Eigen::MatrixXd> weights;    // weights[l] is widths[l+1] x widths[l]
  std::vector<Eigen::VectorXd> biases;     // biases[l] has widths[l+1] entries
  std::string activation = "relu";
  bool skip = true;

  int input_width() const { return widths.empty() ? 0 : widths.front(); }
  int output_width() const { return widths.empty() ? 0 : widths.back(); }
  int layer_count() const { return static_cast<int>(weights.size()); }

  void validate() const {
    require(widths.size() >= 2, errc::invalid_argument, "adapter needs at least two layer widths");
    for (int w : widths)
      require(w > 0, errc::invalid_argument, "adapter layer widths must be positive");
    require(weights.size() + 1 == widths.size() && biases.size() == weights.size(),
            errc::length_mismatch, "adapter weight/bias count does not match widths");
    for (std::size_t l = 0; l < weights.size(); ++l) {
      require(weights[l].rows() == widths[l + 1] && weights[l].cols() == widths[l],
              errc::dimension_mismatch, "adapter weight matrix has the wrong shape");
      require(biases[l].size() == widths[l + 1], errc::dimension_mismatch,
              "adapter bias vector has the wrong length");
    }
    require(activation == "relu", errc::bad_value,
            "unsupported adapter activation '" + activation + "'");
    if (skip)
      require(input_width() == output_width(), errc::dimension_mismatch,
              "identity skip requires matching input/output widths");
  }

  static MlpAdapter zeros(std::vector<int> layer_widths, bool with_skip = true) {
    MlpAdapter a;
    a.widths = std::move(layer_widths);
    a.skip = with_skip;
    for (std::size_t l = 0; l + 1 < a.widths.size(); ++l) {
      a.weights.emplace_back(Eigen::MatrixXd::Zero(a.widths[l + 1], a.widths[l]));
      a.biases.emplace_back(Eigen::VectorXd::Zero(a.widths[l + 1]));
    }
    a.validate();
    return a;
  }

  // He-style fan-in init scaled by init_scale; init_scale == 0 gives exact
  // zeros, which together with the skip connection is the identity map.
  static MlpAdapter he_init(std::vector<int> layer_widths, Rng& rng, double init_scale = 1.0,
                            bool with_skip = true) {
    MlpAdapter a = zeros(std::move(layer_widths), with_skip);
    if (init_scale == 0.0) return a;
    for (std::size_t l = 0; l < a.weights.size(); ++l) {
      const double stddev = init_scale * std::sqrt(2.0 / a.widths[l]);
      for (int r = 0; r < a.weights[l].rows(); ++r)
        for (int c = 0; c < a.weights[l].cols(); ++c) a.weights[l](r, c) = rng.normal(0.0, stddev);
    }
    return a;
  }

  Eigen::VectorXd forward(const Eigen::VectorXd& x) const {
    require(x.size() == input_width(), errc::dimension_mismatch,
            "adapter input has the wrong length");
    Eigen::VectorXd h = x;
    for (int l = 0; l < layer_count(); ++l) {
      h = (weights[l] * h + biases[l]).eval();
      if (l + 1 < layer_count()) h = h.cwiseMax(0.0);
    }
    if (skip) h += x;
    return h;
  }

  nlohmann::json to_json() const {
    validate();
    nlohmann::json j;
    j["widths"] = widths;
    j["activation"] = activation;
    j["skip"] = skip;
    j["weights"] = nlohmann::json::array();
    j["biases"] = nlohmann::json::array();
    for (std::size_t l = 0; l < weights.size(); ++l) {
      std::vector<double> flat;
      flat.reserve(static_cast<std::size_t>(weights[l].size()));
      for (int r = 0; r < weights[l].rows(); ++r)
        for (int c = 0; c < weights[l].cols(); ++c) flat.push_back(weights[l](r, c));
      j["weights"].push_back(flat);
      j["biases"].push_back(std::vector<double>(biases[l].data(), biases[l].data() + biases[l].size()));
    }
    return j;
  }

  static MlpAdapter from_json(const nlohmann::json& j) {
    require(j.is_object(), errc::bad_value, "adapter JSON root must be an object");
    require(j.contains("widths") && j.contains("weights") && j.contains("biases"),
            errc::missing_key, "adapter JSON needs 'widths', 'weights' and 'biases'");
    MlpAdapter a;
    a.widths = j.at("widths").get<std::vector<int>>();
    if (j.contains("activation")) a.activation = j.at("activation").get<std::string>();
    if (j.contains("skip")) a.skip = j.at("skip").get<bool>();
    require(a.widths.size() >= 2, errc::bad_value, "adapter JSON has too few layer widths");
    const auto& jw = j.at("weights");
    const auto& jb = j.at("biases");
    require(jw.is_array() && jb.is_array() && jw.size() + 1 == a.widths.size() &&
                jb.size() == jw.size(),
            errc::length_mismatch, "adapter JSON weight/bias count does not match widths");
    for (std::size_t l = 0; l + 1 < a.widths.size(); ++l) {
      const auto flat = jw.at(l).get<std::vector<double>>();
      const int rows = a.widths[l + 1], cols = a.widths[l];
      require(static_cast<int>(flat.size()) == rows * cols, errc::length_mismatch,
              "adapter JSON weight matrix has the wrong length");
      Eigen::MatrixXd w(rows, cols);
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) w(r, c) = flat[static_cast<std::size_t>(r) * cols + c];
      a.weights.push_back(std::move(w));
      const auto bv = jb.at(l).get<std::vector<double>>();
      require(static_cast<int>(bv.size()) == rows, errc::length_mismatch,
              "adapter JSON bias vector has the wrong length");
      a.biases.emplace_back(Eigen::Map<const Eigen::VectorXd>(bv.data(), rows));
    }
    a.validate();
    return a;
  }
};

inline void save_adapter(const MlpAdapter& a, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail_io(errc::file_write_failed, "cannot open '" + path + "' for writing");
  out << a.to_json().dump(1) << "\n";
  if (!out) fail_io(errc::file_write_failed, "write failed for '" + path + "'");
}

inline MlpAdapter load_adapter(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail_io(errc::file_open_failed, "cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(errc::bad_value, std::string("adapter JSON is invalid: ") + e.what());
  }
  return MlpAdapter::from_json(j);
}

// ---------------------------------------------------------------------------
// For a fixed pose the skinned surface is affine in the shape coefficients:
// points(b) = base + sum_k b_k * basis[k]. Capturing that map once makes the
// fitting loss and its gradient cheap to evaluate.
// ---------------------------------------------------------------------------

struct BetaMap {
  Eigen::MatrixX3d base;
  std::vector<Eigen::MatrixX3d> basis;

  int coeff_count() const { return static_cast<int>(basis.size()); }

  Eigen::MatrixX3d points(const Eigen::VectorXd& b) const {
    require(b.size() == coeff_count(), errc::dimension_mismatch,
            "shape coefficient vector has the wrong length");
    Eigen::MatrixX3d out = base;
    for (int k = 0; k < coeff_count(); ++k) out += b[k] * basis[static_cast<std::size_t>(k)];
    return out;
  }
};

inline BetaMap build_beta_map(const BodyModelDef& model, const FullPose& pose) {
  const Eigen::VectorXd zero_expr = Eigen::VectorXd::Zero(model.expr_coeffs);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(model.shape_coeffs);
  BetaMap map;
  map.base = skin(model, pose, b, zero_expr);
  map.basis.reserve(static_cast<std::size_t>(model.shape_coeffs));
  for (int k = 0; k < model.shape_coeffs; ++k) {
    b.setZero();
    b[k] = 1.0;
    map.basis.push_back(skin(model, pose, b, zero_expr) - map.base);
  }
  return map;
}

// Mean per-vertex distance between the target surface at coefficients y and
// the source surface at coefficients x, both under the pose baked into the
// maps. Millimeters in, millimeters out.
inline double adapter_pair_loss(const BetaMap& source, const BetaMap& target,
                                const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  const Eigen::MatrixX3d res = target.points(y) - source.points(x);
  require(res.rows() > 0, errc::dimension_mismatch, "adapter loss needs at least one vertex");
  return res.rowwise().norm().mean();
}

// d(loss)/dy. Unit residuals are taken as zero where the residual vanishes,
// so an exact match is a genuine stationary point.
inline Eigen::VectorXd adapter_pair_grad(const BetaMap& source, const BetaMap& target,
                                         const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  const Eigen::MatrixX3d res = target.points(y) - source.points(x);
  const auto rows = res.rows();
  Eigen::MatrixX3d unit = Eigen::MatrixX3d::Zero(rows, 3);
  for (Eigen::Index v = 0; v < rows; ++v) {
    const double n = res.row(v).norm();
    if (n > 0.0) unit.row(v) = res.row(v) / n;
  }
  Eigen::VectorXd g(target.coeff_count());
  for (int k = 0; k < target.coeff_count(); ++k)
    g[k] = (target.basis[static_cast<std::size_t>(k)].cwiseProduct(unit)).sum() /
           static_cast<double>(rows);
  return g;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

// Draws poses with independent Gaussian axis-angle noise on the body joints
// (slots 1..21 where present); root, face and hand slots stay at rest.
struct GaussianPoseSampler {
  double sigma = 0.3;

  FullPose sample(Rng& rng, int joint_count) const {
    FullPose pose = FullPose::zeros(joint_count);
    const int last_body = std::min(joint_count - 1, kBodyFirst + kBodyCount - 1);
    if (sigma > 0.0) {
      for (int j = 1; j <= last_body; ++j)
        for (int c = 0; c < 3; ++c) pose.axis_angle(j, c) = rng.normal(0.0, sigma);
    }
    return pose;
  }
};

struct AdapterTrainConfig {
  std::vector<int> hidden = {64, 64};  // hidden layer widths
  int iterations = 2000;
  double step = 0.05;       // SGD step size
  int batch = 32;
  double pose_sigma = 0.3;  // body-joint axis-angle noise, radians
  double beta_sigma = 1.0;  // coefficient noise for sampled inputs
  double tol = 0.0;         // stop once held-out error drops to/below this, mm
  int holdout = 64;         // held-out sample count for model selection
  double init_scale = 1.0;  // 0 starts from the exact identity map
  std::uint64_t seed = 0;

  void validate() const {
    require(iterations >= 0, errc::invalid_argument, "iterations must be non-negative");
    require(step > 0.0 && std::isfinite(step), errc::invalid_argument,
            "step must be positive and finite");
    require(batch > 0, errc::invalid_argument, "batch size must be positive");
    require(pose_sigma >= 0.0 && beta_sigma >= 0.0, errc::invalid_argument,
            "sampling widths must be non-negative");
    require(tol >= 0.0, errc::invalid_argument, "tolerance must be non-negative");
    require(holdout > 0, errc::invalid_argument, "holdout sample count must be positive");
    require(init_scale >= 0.0, errc::invalid_argument, "init scale must be non-negative");
  }
};

struct AdapterFitResult {
  MlpAdapter adapter;         // best holdout error seen, including the initial state
  double best_holdout = 0.0;  // mm
  int best_iteration = 0;     // 0 means the initial adapter was never beaten
  int iterations_run = 0;
  std::vector<double> holdout_history;  // one entry per evaluation
};

namespace adapter_detail {

struct Sample {
  BetaMap source;
  BetaMap target;
  Eigen::VectorXd x;
};

inline Sample draw_sample(const BodyModelDef& source, const BodyModelDef& target,
                          const GaussianPoseSampler& sampler, double beta_sigma, Rng& rng) {
  require(source.joint_count() == target.joint_count(), errc::dimension_mismatch,
          "source and target models must share a joint count");
  const FullPose pose = sampler.sample(rng, source.joint_count());
  Sample s;
  s.source = build_beta_map(source, pose);
  s.target = build_beta_map(target, pose);
  s.x.resize(source.shape_coeffs);
  for (int k = 0; k < source.shape_coeffs; ++k) s.x[k] = rng.normal(0.0, beta_sigma);
  return s;
}

// Backprop of d(loss)/dy through the MLP, accumulating into grad_w/grad_b.
inline void accumulate_param_grads(const MlpAdapter& a, const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& grad_y,
                                   std::vector<Eigen::MatrixXd>& grad_w,
                                   std::vector<Eigen::VectorXd>& grad_b) {
  const int layers = a.layer_count();
  std::vector<Eigen::VectorXd> inputs(static_cast<std::size_t>(layers));
  std::vector<Eigen::VectorXd> pre(static_cast<std::size_t>(layers));
  Eigen::VectorXd h = x;
  for (int l = 0; l < layers; ++l) {
    inputs[static_cast<std::size_t>(l)] = h;
    pre[static_cast<std::size_t>(l)] = a.weights[static_cast<std::size_t>(l)] * h +
                                       a.biases[static_cast<std::size_t>(l)];
    h = (l + 1 < layers) ? pre[static_cast<std::size_t>(l)].cwiseMax(0.0).eval()
                         : pre[static_cast<std::size_t>(l)];
  }
  // The skip path bypasses every parameter, so grad_y enters the top layer as-is.
  Eigen::VectorXd delta = grad_y;
  for (int l = layers - 1; l >= 0; --l) {
    if (l + 1 < layers)
      delta = delta.cwiseProduct(
          (pre[static_cast<std::size_t>(l)].array() > 0.0).cast<double>().matrix());
    grad_w[static_cast<std::size_t>(l)] += delta * inputs[static_cast<std::size_t>(l)].transpose();
    grad_b[static_cast<std::size_t>(l)] += delta;
    if (l > 0) delta = (a.weights[static_cast<std::size_t>(l)].transpose() * delta).eval();
  }
}

}  // namespace adapter_detail

// Plain SGD minimizing the mean per-vertex distance over freshly sampled
// (pose, coefficients) pairs. Returns the parameters with the best held-out
// error seen, which includes the initial state.
inline AdapterFitResult fit_adapter(const BodyModelDef& source, const BodyModelDef& target,
                                    const GaussianPoseSampler& sampler,
                                    const AdapterTrainConfig& cfg) {
  namespace d = adapter_detail;
  cfg.validate();
  source.validate();
  target.validate();
  require(source.joint_count() == target.joint_count(), errc::dimension_mismatch,
          "source and target models must share a joint count");

  Rng rng(cfg.seed);

  std::vector<int> widths;
  widths.push_back(source.shape_coeffs);
  widths.insert(widths.end(), cfg.hidden.begin(), cfg.hidden.end());
  widths.push_back(target.shape_coeffs);
  const bool with_skip = source.shape_coeffs == target.shape_coeffs;
  MlpAdapter adapter = MlpAdapter::he_init(widths, rng, cfg.init_scale, with_skip);

  std::vector<d::Sample> holdout;
  holdout.reserve(static_cast<std::size_t>(cfg.holdout));
  for (int i = 0; i < cfg.holdout; ++i)
    holdout.push_back(d::draw_sample(source, target, sampler, cfg.beta_sigma, rng));

  auto holdout_error = [&](const MlpAdapter& a) {
    double sum = 0.0;
    for (const auto& s : holdout) sum += adapter_pair_loss(s.source, s.target, s.x, a.forward(s.x));
    return sum / static_cast<double>(holdout.size());
  };

  AdapterFitResult result;
  result.adapter = adapter;
  result.best_holdout = holdout_error(adapter);
  result.best_iteration = 0;
  result.holdout_history.push_back(result.best_holdout);

  std::vector<Eigen::MatrixXd> grad_w;
  std::vector<Eigen::VectorXd> grad_b;
  for (int l = 0; l < adapter.layer_count(); ++l) {
    grad_w.emplace_back(Eigen::MatrixXd::Zero(adapter.weights[static_cast<std::size_t>(l)].rows(),
                                              adapter.weights[static_cast<std::size_t>(l)].cols()));
    grad_b.emplace_back(
        Eigen::VectorXd::Zero(adapter.biases[static_cast<std::size_t>(l)].size()));
  }

  int iter = 0;
  for (; iter < cfg.iterations && result.best_holdout > cfg.tol; ++iter) {
    for (auto& g : grad_w) g.setZero();
    for (auto& g : grad_b) g.setZero();
    double batch_loss = 0.0;
    for (int b = 0; b < cfg.batch; ++b) {
      const d::Sample s = d::draw_sample(source, target, sampler, cfg.beta_sigma, rng);
      const Eigen::VectorXd y = adapter.forward(s.x);
      batch_loss += adapter_pair_loss(s.source, s.target, s.x, y);
      const Eigen::VectorXd gy = adapter_pair_grad(s.source, s.target, s.x, y);
      d::accumulate_param_grads(adapter, s.x, gy, grad_w, grad_b);
    }
    batch_loss /= static_cast<double>(cfg.batch);
    if (!std::isfinite(batch_loss))
      throw Error(errc::divergence,
                  "adapter fit diverged at iteration " + std::to_string(iter + 1));
    const double scale = cfg.step / static_cast<double>(cfg.batch);
    for (int l = 0; l < adapter.layer_count(); ++l) {
      adapter.weights[static_cast<std::size_t>(l)] -= scale * grad_w[static_cast<std::size_t>(l)];
      adapter.biases[static_cast<std::size_t>(l)] -= scale * grad_b[static_cast<std::size_t>(l)];
    }

    const double err = holdout_error(adapter);
    if (!std::isfinite(err))
      throw Error(errc::divergence,
                  "adapter fit diverged at iteration " + std::to_string(iter + 1));
    result.holdout_history.push_back(err);
    if (err < result.best_holdout) {
      result.best_holdout = err;
      result.best_iteration = iter + 1;
      result.adapter = adapter;
    }
  }
  result.iterations_run = iter;
  return result;
}

inline AdapterFitResult fit_adapter(const BodyModelDef& source, const BodyModelDef& target,
                                    const AdapterTrainConfig& cfg) {
  return fit_adapter(source, target, GaussianPoseSampler{cfg.pose_sigma}, cfg);
}

// ---------------------------------------------------------------------------
// Label policy: which parameter slots an annotation source may supervise.
// ---------------------------------------------------------------------------

enum class LabelPolicy { full_smplx, smpl_pose_only };

inline const char* label_policy_name(LabelPolicy p) {
  switch (p) {
    case LabelPolicy::full_smplx: return "full_smplx";
    case LabelPolicy::smpl_pose_only: return "smpl_pose_only";
  }
  return "?";
}

inline LabelPolicy parse_label_policy(const std::string& s) {
  if (s == "full_smplx") return LabelPolicy::full_smplx;
  if (s == "smpl_pose_only") return LabelPolicy::smpl_pose_only;
  fail(errc::invalid_argument, "unknown label policy '" + s + "'");
}

// Joint slots an "smpl"-space annotation can supervise: global orient plus the
// 21 body joints; jaw, eyes and fingers have no counterpart there.
inline constexpr int kSmplSupervisedJoints = kBodyFirst + kBodyCount;  // 22

struct SupervisionMask {
  std::vector<bool> joints;  // one flag per joint slot
  bool betas = false;
  bool expression = false;

  int supervised_joints() const {
    return static_cast<int>(std::count(joints.begin(), joints.end(), true));
  }
};

// full_smplx supervises every slot the annotation actually carries;
// smpl_pose_only supervises global orientation + body joints and leaves
// hands/jaw/eyes and the shape/expression coefficients unmarked. An
// "smpl"-space annotation is always clamped to smpl_pose_only regardless of
// the requested policy.
inline SupervisionMask apply_label_policy(LabelPolicy policy, const AnnotationDesc& ann,
                                          int joint_count = kDefaultJointCount) {
  require(joint_count > 0, errc::invalid_argument, "joint count must be positive");
  require(ann.param_space == "smpl" || ann.param_space == "smplx", errc::unknown_parameter_space,
          "parameter space must be 'smpl' or 'smplx', got '" + ann.param_space + "'");
  const LabelPolicy effective =
      ann.param_space == "smpl" ? LabelPolicy::smpl_pose_only : policy;

  SupervisionMask mask;
  mask.joints.assign(static_cast<std::size_t>(joint_count), false);
  if (ann.has_pose) {
    const int limit = effective == LabelPolicy::smpl_pose_only
                          ? std::min(joint_count, kSmplSupervisedJoints)
                          : joint_count;
    for (int j = 0; j < limit; ++j) mask.joints[static_cast<std::size_t>(j)] = true;
  }
  if (effective == LabelPolicy::full_smplx) {
    mask.betas = ann.has_betas;
    mask.expression = ann.has_expression;
  }
  return mask;
}

}  // namespace ehps
