#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ehps/body_model.hpp"
#include "ehps/errors.hpp"
#include "ehps/npz.hpp"

namespace ehps {

// Model definition file: one JSON document with the structural fields inline.
// Large arrays are either inline flat JSON arrays (row-major, orders below) or
// string values naming members of a sibling .npz referenced by "arrays_npz".
//   template              flat 3V   as (V, 3)
//   shape_basis           flat 3V*B as (V, 3, B)
//   pose_corrective_basis flat 3V*P as (V, 3, P)   optional
//   joint_regressor       flat J*V  as (J, V)
//   skinning_weights      flat V*J  as (V, J)
// "units" is "mm" or "m"; loaded models are always millimeters.

namespace model_io_detail {

inline const nlohmann::json& field(const nlohmann::json& j, const char* key) {
  require(j.contains(key), errc::missing_key,
          std::string("model JSON is missing '") + key + "'");
  return j.at(key);
}

// Fetch a flat numeric array either inline or from the sidecar archive.
inline std::vector<double> numbers(const nlohmann::json& value, const char* key,
                                   const std::optional<NpzArchive>& sidecar) {
  if (value.is_string()) {
    require(sidecar.has_value(), errc::bad_reference,
            std::string("model field '") + key +
                "' names an npz member but no 'arrays_npz' sidecar is declared");
    const ArrayRecord* rec = sidecar->find(value.get<std::string>());
    require(rec != nullptr, errc::bad_reference,
            "sidecar npz has no member '" + value.get<std::string>() + "'");
    return rec->to_doubles();
  }
  require(value.is_array(), errc::bad_value,
          std::string("model field '") + key + "' must be a flat array or an npz key");
  std::vector<double> out;
  out.reserve(value.size());
  for (const auto& v : value) {
    require(v.is_number(), errc::bad_value,
            std::string("model field '") + key + "' has a non-numeric entry");
    out.push_back(v.get<double>());
  }
  return out;
}

inline Eigen::MatrixXd to_matrix(const std::vector<double>& flat, int rows, int cols,
                                 const char* key) {
  require(static_cast<std::int64_t>(flat.size()) ==
              static_cast<std::int64_t>(rows) * static_cast<std::int64_t>(cols),
          errc::length_mismatch, std::string("model field '") + key + "' has the wrong length");
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = flat[static_cast<std::size_t>(r) * cols + c];
  return m;
}

inline std::vector<double> flatten(const Eigen::MatrixXd& m) {
  std::vector<double> out(static_cast<std::size_t>(m.rows()) * static_cast<std::size_t>(m.cols()));
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c)
      out[static_cast<std::size_t>(r) * static_cast<std::size_t>(m.cols()) +
          static_cast<std::size_t>(c)] = m(r, c);
  return out;
}

}  // namespace model_io_detail

inline BodyModelDef load_model(const std::string& json_path) {
  namespace d = model_io_detail;
  std::ifstream in(json_path);
  if (!in) fail_io(errc::file_open_failed, "cannot open '" + json_path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(errc::bad_value, std::string("model JSON is invalid: ") + e.what());
  }
  require(j.is_object(), errc::bad_value, "model JSON root must be an object");

  std::optional<NpzArchive> sidecar;
  if (j.contains("arrays_npz")) {
    require(j.at("arrays_npz").is_string(), errc::bad_value, "'arrays_npz' must be a path string");
    const std::filesystem::path base = std::filesystem::path(json_path).parent_path();
    sidecar = load_npz((base / j.at("arrays_npz").get<std::string>()).string());
  }

  const int version = d::field(j, "version").get<int>();
  require(version == 1, errc::unsupported_version,
          "unsupported model version " + std::to_string(version));
  const std::string units = d::field(j, "units").get<std::string>();
  require(units == "mm" || units == "m", errc::bad_value,
          "model units must be 'mm' or 'm', got '" + units + "'");
  const double unit_scale = units == "m" ? 1000.0 : 1.0;

  BodyModelDef m;
  m.tree.parents = d::field(j, "parents").get<std::vector<int>>();
  const int joint_count = d::field(j, "joint_count").get<int>();
  const int vertex_count = d::field(j, "vertex_count").get<int>();
  require(joint_count == m.tree.joint_count(), errc::length_mismatch,
          "'joint_count' disagrees with the parents array");
  m.shape_coeffs = d::field(j, "shape_coeffs").get<int>();
  m.expr_coeffs = d::field(j, "expr_coeffs").get<int>();

  m.template_vertices =
      unit_scale *
      d::to_matrix(d::numbers(d::field(j, "template"), "template", sidecar), vertex_count, 3,
                   "template");
  m.shape_basis = unit_scale * d::to_matrix(d::numbers(d::field(j, "shape_basis"), "shape_basis",
                                                       sidecar),
                                            3 * vertex_count, m.shape_coeffs + m.expr_coeffs,
                                            "shape_basis");
  if (j.contains("pose_corrective_basis")) {
    m.pose_corrective_basis =
        unit_scale * d::to_matrix(d::numbers(j.at("pose_corrective_basis"),
                                             "pose_corrective_basis", sidecar),
                                  3 * vertex_count, 9 * (joint_count - 1),
                                  "pose_corrective_basis");
  }
  m.joint_regressor = d::to_matrix(
      d::numbers(d::field(j, "joint_regressor"), "joint_regressor", sidecar), joint_count,
      vertex_count, "joint_regressor");
  m.skinning_weights = d::to_matrix(
      d::numbers(d::field(j, "skinning_weights"), "skinning_weights", sidecar), vertex_count,
      joint_count, "skinning_weights");

  auto masks = [&](const char* key) {
    std::map<std::string, std::vector<int>> out;
    if (!j.contains(key)) return out;
    require(j.at(key).is_object(), errc::bad_value,
            std::string("model field '") + key + "' must be an object");
    for (const auto& [name, idx] : j.at(key).items()) {
      require(idx.is_array(), errc::bad_value, "part mask '" + name + "' must be an array");
      out[name] = idx.get<std::vector<int>>();
    }
    return out;
  };
  m.part_masks = masks("part_masks");
  m.part_joint_masks = masks("part_joint_masks");

  m.validate();
  return m;
}

// Writes in millimeters. With arrays_in_npz the big arrays land in
// "<stem>.arrays.npz" next to the JSON and are referenced by key.
inline void save_model(const BodyModelDef& m, const std::string& json_path,
                       bool arrays_in_npz = false) {
  namespace d = model_io_detail;
  m.validate();
  nlohmann::json j;
  j["version"] = 1;
  j["units"] = "mm";
  j["joint_count"] = m.joint_count();
  j["vertex_count"] = m.vertex_count();
  j["parents"] = m.tree.parents;
  j["shape_coeffs"] = m.shape_coeffs;
  j["expr_coeffs"] = m.expr_coeffs;

  if (arrays_in_npz) {
    const std::filesystem::path p(json_path);
    const std::string npz_name = p.stem().string() + ".arrays.npz";
    NpzArchive ar;
    auto put = [&](const std::string& key, const Eigen::MatrixXd& mat,
                   std::vector<std::uint64_t> shape) {
      ar.insert(key, ArrayRecord::from_doubles(std::move(shape), d::flatten(mat)));
    };
    put("template", m.template_vertices,
        {static_cast<std::uint64_t>(m.vertex_count()), 3});
    put("shape_basis", m.shape_basis,
        {static_cast<std::uint64_t>(m.vertex_count()), 3,
         static_cast<std::uint64_t>(m.shape_coeffs + m.expr_coeffs)});
    if (m.has_pose_correctives()) {
      put("pose_corrective_basis", m.pose_corrective_basis,
          {static_cast<std::uint64_t>(m.vertex_count()), 3,
           static_cast<std::uint64_t>(9 * (m.joint_count() - 1))});
    }
    put("joint_regressor", m.joint_regressor,
        {static_cast<std::uint64_t>(m.joint_count()),
         static_cast<std::uint64_t>(m.vertex_count())});
    put("skinning_weights", m.skinning_weights,
        {static_cast<std::uint64_t>(m.vertex_count()),
         static_cast<std::uint64_t>(m.joint_count())});
    save_npz((p.parent_path() / npz_name).string(), ar);
    j["arrays_npz"] = npz_name;
    j["template"] = "template";
    j["shape_basis"] = "shape_basis";
    if (m.has_pose_correctives()) j["pose_corrective_basis"] = "pose_corrective_basis";
    j["joint_regressor"] = "joint_regressor";
    j["skinning_weights"] = "skinning_weights";
  } else {
    j["template"] = d::flatten(m.template_vertices);
    j["shape_basis"] = d::flatten(m.shape_basis);
    if (m.has_pose_correctives()) j["pose_corrective_basis"] = d::flatten(m.pose_corrective_basis);
    j["joint_regressor"] = d::flatten(m.joint_regressor);
    j["skinning_weights"] = d::flatten(m.skinning_weights);
  }

  j["part_masks"] = nlohmann::json::object();
  for (const auto& [name, idx] : m.part_masks) j["part_masks"][name] = idx;
  j["part_joint_masks"] = nlohmann::json::object();
  for (const auto& [name, idx] : m.part_joint_masks) j["part_joint_masks"][name] = idx;

  std::ofstream out(json_path, std::ios::trunc);
  if (!out) fail_io(errc::file_write_failed, "cannot open '" + json_path + "' for writing");
  out << j.dump(1) << "\n";
  if (!out) fail_io(errc::file_write_failed, "write failed for '" + json_path + "'");
}

inline std::string model_summary(const BodyModelDef& m) {
  std::ostringstream os;
  os << "vertices:        " << m.vertex_count() << "\n";
  os << "joints:          " << m.joint_count() << "\n";
  os << "shape coeffs:    " << m.shape_coeffs << "\n";
  os << "expr coeffs:     " << m.expr_coeffs << "\n";
  os << "pose correctives: " << (m.has_pose_correctives() ? "yes" : "no") << "\n";
  os << "part masks:      ";
  if (m.part_masks.empty()) {
    os << "(none)";
  } else {
    bool first = true;
    for (const auto& [name, idx] : m.part_masks) {
      if (!first) os << ", ";
      os << name << "(" << idx.size() << ")";
      first = false;
    }
  }
  os << "\n";
  return os.str();
}

}  // namespace ehps
