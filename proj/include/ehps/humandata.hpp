#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ehps/errors.hpp"
#include "ehps/npz.hpp"

namespace ehps {

// Documented subset of the HumanData container: an .npz whose recognized
// arrays share a leading instance dimension N, plus uint8 string metadata.
// Unknown keys ride along opaquely. Recognized data keys and their trailing
// shapes:
//   smplx.body_pose      (N, 21, 3)
//   smplx.global_orient  (N, 3)
//   smplx.betas          (N, 10)
//   smplx.expression     (N, 10)
//   keypoints3d          (N, K, 3)   K >= 1
//   bbox_xywh            (N, 4)
// Required metadata (uint8 UTF-8 bytes): meta.name, meta.param_space with
// value "smpl" or "smplx".
struct HumanDataDoc {
  std::string name;
  std::string param_space;  // "smpl" | "smplx"
  std::uint64_t instance_count = 0;
  NpzArchive arrays;  // everything, including meta keys and unknown keys

  bool has(const std::string& key) const { return arrays.contains(key); }

  static const std::vector<std::string>& recognized_keys() {
    static const std::vector<std::string> keys = {
        "smplx.body_pose", "smplx.global_orient", "smplx.betas",
        "smplx.expression", "keypoints3d", "bbox_xywh"};
    return keys;
  }

  static HumanDataDoc from_archive(NpzArchive ar) {
    HumanDataDoc doc;
    doc.arrays = std::move(ar);

    const ArrayRecord* name_rec = doc.arrays.find("meta.name");
    require(name_rec != nullptr, errc::missing_key, "HumanData: missing meta.name");
    doc.name = name_rec->as_string();

    const ArrayRecord* space_rec = doc.arrays.find("meta.param_space");
    require(space_rec != nullptr, errc::missing_key, "HumanData: missing meta.param_space");
    doc.param_space = space_rec->as_string();
    require(doc.param_space == "smpl" || doc.param_space == "smplx",
            errc::unknown_parameter_space,
            "HumanData: parameter space must be 'smpl' or 'smplx', got '" + doc.param_space +
                "'");

    std::optional<std::uint64_t> n;
    auto check_dims = [&](const std::string& key, const std::vector<std::uint64_t>& trailing) {
      const ArrayRecord* rec = doc.arrays.find(key);
      if (!rec) return;
      require(rec->shape.size() == trailing.size() + 1, errc::length_mismatch,
              "HumanData: '" + key + "' has the wrong number of dimensions");
      for (std::size_t i = 0; i < trailing.size(); ++i) {
        require(rec->shape[i + 1] == trailing[i], errc::length_mismatch,
                "HumanData: '" + key + "' has the wrong trailing shape");
      }
      if (!n) {
        n = rec->shape[0];
      } else {
        require(*n == rec->shape[0], errc::length_mismatch,
                "HumanData: '" + key + "' leading dimension disagrees with other arrays");
      }
    };
    check_dims("smplx.body_pose", {21, 3});
    check_dims("smplx.global_orient", {3});
    check_dims("smplx.betas", {10});
    check_dims("smplx.expression", {10});
    check_dims("bbox_xywh", {4});
    if (const ArrayRecord* kp = doc.arrays.find("keypoints3d")) {
      require(kp->shape.size() == 3 && kp->shape[2] == 3 && kp->shape[1] >= 1,
              errc::length_mismatch, "HumanData: keypoints3d must be (N, K, 3)");
      if (!n) n = kp->shape[0];
      require(*n == kp->shape[0], errc::length_mismatch,
              "HumanData: keypoints3d leading dimension disagrees with other arrays");
    }
    require(n.has_value(), errc::missing_key,
            "HumanData: no recognized data array present");
    doc.instance_count = *n;
    return doc;
  }

  static HumanDataDoc load(const std::string& path) { return from_archive(load_npz(path)); }

  void save(const std::string& path) const { save_npz(path, arrays); }
};

// What an annotation source offers the supervision policy.
struct AnnotationDesc {
  std::string param_space;  // "smpl" | "smplx"
  bool has_pose = false;
  bool has_betas = false;
  bool has_expression = false;

  static AnnotationDesc from_humandata(const HumanDataDoc& doc) {
    AnnotationDesc d;
    d.param_space = doc.param_space;
    d.has_pose = doc.has("smplx.body_pose") || doc.has("smplx.global_orient");
    d.has_betas = doc.has("smplx.betas");
    d.has_expression = doc.has("smplx.expression");
    return d;
  }
};

}  // namespace ehps
