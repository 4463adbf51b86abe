#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "ehps/errors.hpp"

namespace ehps {

// N x 3 point array in millimeters, index-corresponding across pred/gt.
using PointSet = Eigen::MatrixX3d;

struct SimilarityTransform {
  double scale = 1.0;
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  PointSet apply(const PointSet& pts) const {
    PointSet out = scale * (pts * rotation.transpose());
    out.rowwise() += translation.transpose();
    return out;
  }
};

// F1 detection score as used by the normalized metrics.
struct DetectionScore {
  double f1 = 1.0;
  void validate() const {
    require(f1 > 0.0 && f1 <= 1.0, errc::out_of_range, "f1 must lie in (0, 1]");
  }
};

// Mean per-point L2 distance (mm). PVE when fed vertices, MPJPE when fed
// joints.
inline double mean_l2(const PointSet& pred, const PointSet& gt) {
  require(pred.rows() == gt.rows(), errc::dimension_mismatch,
          "mean_l2: point count mismatch");
  require(pred.rows() >= 1, errc::invalid_argument, "mean_l2: empty point set");
  require(pred.allFinite() && gt.allFinite(), errc::invalid_argument,
          "mean_l2: non-finite points");
  return (pred - gt).rowwise().norm().mean();
}

// Closed-form least-squares similarity alignment (Umeyama): finds (s, R, t)
// minimizing sum |s R x_i + t - y_i|^2 with det(R) = +1 enforced via the SVD
// sign correction. Collinear or coincident inputs have a rank-deficient
// covariance and are rejected rather than silently producing a reflection or
// an arbitrary rotation.
inline SimilarityTransform umeyama_align(const PointSet& src, const PointSet& dst,
                                         bool with_scale = true) {
  require(src.rows() == dst.rows(), errc::dimension_mismatch,
          "umeyama_align: point count mismatch");
  require(src.rows() >= 3, errc::degenerate_input, "umeyama_align: need at least 3 points");
  require(src.allFinite() && dst.allFinite(), errc::invalid_argument,
          "umeyama_align: non-finite points");
  const double n = static_cast<double>(src.rows());
  const Eigen::RowVector3d mu_x = src.colwise().mean();
  const Eigen::RowVector3d mu_y = dst.colwise().mean();
  const PointSet xc = src.rowwise() - mu_x;
  const PointSet yc = dst.rowwise() - mu_y;
  const double var_x = xc.rowwise().squaredNorm().mean();
  const Eigen::Matrix3d sigma = (yc.transpose() * xc) / n;

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(sigma, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d d = svd.singularValues();
  // Rotation is determined (up to the sign fix) only if rank >= 2.
  require(d(0) > 0.0 && d(1) > d(0) * 1e-12, errc::degenerate_input,
          "umeyama_align: rank-deficient covariance (degenerate point configuration)");

  Eigen::Vector3d s_fix = Eigen::Vector3d::Ones();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) s_fix(2) = -1.0;

  SimilarityTransform out;
  out.rotation = svd.matrixU() * s_fix.asDiagonal() * svd.matrixV().transpose();
  if (with_scale) {
    require(var_x > 0.0, errc::degenerate_input, "umeyama_align: zero-variance source");
    out.scale = d.dot(s_fix) / var_x;
    require(out.scale > 0.0, errc::degenerate_input, "umeyama_align: non-positive scale");
  }
  out.translation = mu_y.transpose() - out.scale * out.rotation * mu_x.transpose();
  return out;
}

// Procrustes-aligned error: fit the similarity on the same points being
// scored, apply, then take the mean L2.
inline double pa_error(const PointSet& pred, const PointSet& gt, bool with_scale = true) {
  return mean_l2(umeyama_align(pred, gt, with_scale).apply(pred), gt);
}

// Normalized metrics (AGORA convention): error divided by detection F1.
inline double nmve(double mve, const DetectionScore& score) {
  score.validate();
  require(mve >= 0.0, errc::invalid_argument, "nmve: negative error");
  return mve / score.f1;
}

inline double nmje(double mje, const DetectionScore& score) { return nmve(mje, score); }

enum class PartAlignment {
  per_part,    // PA fitted on each part's own vertices (hands per-hand)
  whole_body,  // one PA transform fitted on all vertices, then scored per part
};

// Raw and PA errors for the standard report parts. "hands" is the mean of the
// left- and right-hand part errors.
struct PartErrorReport {
  struct Entry {
    double raw = 0.0;
    double pa = 0.0;
  };
  Entry all, body, hands, face;
};

namespace detail {

inline PointSet take_rows(const PointSet& pts, const std::vector<int>& idx) {
  PointSet out(static_cast<Eigen::Index>(idx.size()), 3);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    require(idx[i] >= 0 && idx[i] < pts.rows(), errc::out_of_range,
            "part mask index out of range");
    out.row(static_cast<Eigen::Index>(i)) = pts.row(idx[i]);
  }
  return out;
}

}  // namespace detail

// masks must provide "body", "left_hand", "right_hand", "face" vertex index
// sets. "all" means every vertex of the mesh, not the union of the masks.
inline PartErrorReport per_part_report(const PointSet& pred, const PointSet& gt,
                                       const std::map<std::string, std::vector<int>>& masks,
                                       PartAlignment alignment = PartAlignment::per_part) {
  require(pred.rows() == gt.rows(), errc::dimension_mismatch,
          "per_part_report: vertex count mismatch");
  for (const char* name : {"body", "left_hand", "right_hand", "face"}) {
    auto it = masks.find(name);
    require(it != masks.end() && !it->second.empty(), errc::missing_key,
            std::string("per_part_report: missing or empty part mask '") + name + "'");
  }

  const PointSet pred_whole_pa =
      alignment == PartAlignment::whole_body ? umeyama_align(pred, gt).apply(pred) : PointSet();

  auto part = [&](const PointSet& p, const PointSet& g) {
    PartErrorReport::Entry e;
    e.raw = mean_l2(p, g);
    if (alignment == PartAlignment::per_part) {
      e.pa = pa_error(p, g);
    }
    return e;
  };
  auto part_masked = [&](const std::vector<int>& idx) {
    PartErrorReport::Entry e = part(detail::take_rows(pred, idx), detail::take_rows(gt, idx));
    if (alignment == PartAlignment::whole_body) {
      e.pa = mean_l2(detail::take_rows(pred_whole_pa, idx), detail::take_rows(gt, idx));
    }
    return e;
  };

  PartErrorReport rep;
  rep.all = part(pred, gt);
  if (alignment == PartAlignment::whole_body) {
    rep.all.pa = mean_l2(pred_whole_pa, gt);
  }
  rep.body = part_masked(masks.at("body"));
  const PartErrorReport::Entry lh = part_masked(masks.at("left_hand"));
  const PartErrorReport::Entry rh = part_masked(masks.at("right_hand"));
  rep.hands.raw = 0.5 * (lh.raw + rh.raw);
  rep.hands.pa = 0.5 * (lh.pa + rh.pa);
  rep.face = part_masked(masks.at("face"));
  return rep;
}

}  // namespace ehps
