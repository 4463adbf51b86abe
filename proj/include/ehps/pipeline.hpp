#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "ehps/body_model.hpp"
#include "ehps/errors.hpp"

namespace ehps {

// Image -> patch-token grid bookkeeping.
struct TokenGrid {
  int grid_h = 0, grid_w = 0;
  int patch = 0;
  int image_h = 0, image_w = 0;
};

inline TokenGrid token_grid(int image_h, int image_w, int patch) {
  require(image_h > 0 && image_w > 0 && patch > 0, errc::invalid_argument,
          "token_grid: dimensions must be positive");
  require(image_h % patch == 0 && image_w % patch == 0, errc::invalid_argument,
          "token_grid: image dimensions must be divisible by the patch size");
  return {image_h / patch, image_w / patch, patch, image_h, image_w};
}

// Box in [0,1] image-fraction units, given by center and size.
struct NormalizedBox {
  double cx = 0.5, cy = 0.5;
  double w = 1.0, h = 1.0;

  void validate() const {
    require(std::isfinite(cx) && std::isfinite(cy) && std::isfinite(w) && std::isfinite(h),
            errc::invalid_argument, "box has non-finite fields");
    require(w > 0.0 && h > 0.0, errc::degenerate_input, "box has zero or negative area");
    require(cx - w / 2.0 < 1.0 && cx + w / 2.0 > 0.0 && cy - h / 2.0 < 1.0 && cy + h / 2.0 > 0.0,
            errc::out_of_range, "box does not intersect the unit square");
  }
};

// Dense H x W x C feature grid, row-major with channels last.
struct FeatureGrid {
  int h = 0, w = 0, c = 0;
  std::vector<double> data;

  static FeatureGrid zeros(int h, int w, int c) {
    require(h > 0 && w > 0 && c > 0, errc::invalid_argument, "FeatureGrid: bad dims");
    FeatureGrid g;
    g.h = h;
    g.w = w;
    g.c = c;
    g.data.assign(static_cast<std::size_t>(h) * static_cast<std::size_t>(w) *
                      static_cast<std::size_t>(c),
                  0.0);
    return g;
  }

  double& at(int y, int x, int ch) {
    return data[(static_cast<std::size_t>(y) * static_cast<std::size_t>(w) +
                 static_cast<std::size_t>(x)) *
                    static_cast<std::size_t>(c) +
                static_cast<std::size_t>(ch)];
  }
  double at(int y, int x, int ch) const {
    return data[(static_cast<std::size_t>(y) * static_cast<std::size_t>(w) +
                 static_cast<std::size_t>(x)) *
                    static_cast<std::size_t>(c) +
                static_cast<std::size_t>(ch)];
  }
};

// Bilinear ROI crop, align-corners-false, border-clamped: output sample (i,j)
// reads the box-relative continuous coordinate ((j+0.5)/out_w, (i+0.5)/out_h),
// mapped into source pixel space as x_src = x_frac * W - 0.5 (pixel centers at
// half-integers). Out-of-range taps clamp to the border pixel.
inline FeatureGrid roi_crop(const FeatureGrid& src, const NormalizedBox& box, int out_h = 8,
                            int out_w = 8) {
  box.validate();
  require(src.h > 0 && src.w > 0 && src.c > 0, errc::invalid_argument, "roi_crop: empty grid");
  require(out_h > 0 && out_w > 0, errc::invalid_argument, "roi_crop: bad output dims");

  FeatureGrid out = FeatureGrid::zeros(out_h, out_w, src.c);
  const double x0 = box.cx - box.w / 2.0;
  const double y0 = box.cy - box.h / 2.0;
  auto clampi = [](int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); };
  for (int i = 0; i < out_h; ++i) {
    const double v = (static_cast<double>(i) + 0.5) / static_cast<double>(out_h);
    const double ys = (y0 + v * box.h) * static_cast<double>(src.h) - 0.5;
    const int iy = static_cast<int>(std::floor(ys));
    const double dy = ys - static_cast<double>(iy);
    const int y_lo = clampi(iy, 0, src.h - 1);
    const int y_hi = clampi(iy + 1, 0, src.h - 1);
    for (int j = 0; j < out_w; ++j) {
      const double u = (static_cast<double>(j) + 0.5) / static_cast<double>(out_w);
      const double xs = (x0 + u * box.w) * static_cast<double>(src.w) - 0.5;
      const int ix = static_cast<int>(std::floor(xs));
      const double dx = xs - static_cast<double>(ix);
      const int x_lo = clampi(ix, 0, src.w - 1);
      const int x_hi = clampi(ix + 1, 0, src.w - 1);
      for (int ch = 0; ch < src.c; ++ch) {
        const double top = (1.0 - dx) * src.at(y_lo, x_lo, ch) + dx * src.at(y_lo, x_hi, ch);
        const double bot = (1.0 - dx) * src.at(y_hi, x_lo, ch) + dx * src.at(y_hi, x_hi, ch);
        out.at(i, j, ch) = (1.0 - dy) * top + dy * bot;
      }
    }
  }
  return out;
}

// Flat parameter vector layout: pose 55x3 axis-angle, beta 10, psi 10,
// camera/translation 3 — 188 slots, contiguous and non-overlapping.
struct ParamLayout {
  static constexpr int pose_offset = 0;
  static constexpr int pose_len = kDefaultJointCount * 3;  // 165
  static constexpr int beta_offset = pose_offset + pose_len;
  static constexpr int beta_len = 10;
  static constexpr int psi_offset = beta_offset + beta_len;
  static constexpr int psi_len = 10;
  static constexpr int cam_offset = psi_offset + psi_len;
  static constexpr int cam_len = 3;
  static constexpr int total = cam_offset + cam_len;  // 188
};

static_assert(ParamLayout::total == 188);

inline Eigen::VectorXd pack_params(const FullPose& pose, const Eigen::VectorXd& beta,
                                   const Eigen::VectorXd& psi, const Eigen::Vector3d& cam) {
  require(pose.joint_count() == kDefaultJointCount, errc::dimension_mismatch,
          "pack_params: pose must have 55 joints");
  require(beta.size() == ParamLayout::beta_len, errc::dimension_mismatch,
          "pack_params: beta must have 10 entries");
  require(psi.size() == ParamLayout::psi_len, errc::dimension_mismatch,
          "pack_params: psi must have 10 entries");
  Eigen::VectorXd out(ParamLayout::total);
  for (int j = 0; j < kDefaultJointCount; ++j) {
    for (int c = 0; c < 3; ++c) out(ParamLayout::pose_offset + 3 * j + c) = pose.axis_angle(j, c);
  }
  out.segment(ParamLayout::beta_offset, ParamLayout::beta_len) = beta;
  out.segment(ParamLayout::psi_offset, ParamLayout::psi_len) = psi;
  out.segment(ParamLayout::cam_offset, ParamLayout::cam_len) = cam;
  return out;
}

struct UnpackedParams {
  FullPose pose;
  Eigen::VectorXd beta;
  Eigen::VectorXd psi;
  Eigen::Vector3d cam;
};

inline UnpackedParams unpack_params(const Eigen::VectorXd& flat) {
  require(flat.size() == ParamLayout::total, errc::length_mismatch,
          "unpack_params: expected a 188-entry vector");
  UnpackedParams p;
  p.pose = FullPose::zeros(kDefaultJointCount);
  for (int j = 0; j < kDefaultJointCount; ++j) {
    for (int c = 0; c < 3; ++c) p.pose.axis_angle(j, c) = flat(ParamLayout::pose_offset + 3 * j + c);
  }
  p.beta = flat.segment(ParamLayout::beta_offset, ParamLayout::beta_len);
  p.psi = flat.segment(ParamLayout::psi_offset, ParamLayout::psi_len);
  p.cam = flat.segment(ParamLayout::cam_offset, ParamLayout::cam_len);
  return p;
}

}  // namespace ehps
