#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "ehps/errors.hpp"

namespace ehps {

struct CocoImage {
  std::int64_t id = 0;
  std::string file_name;
  int width = 0, height = 0;
};

struct CocoAnnotation {
  std::int64_t id = 0;
  std::int64_t image_id = 0;
  std::array<double, 4> bbox_xywh = {0, 0, 0, 0};          // pixels
  std::optional<std::vector<double>> smplx_params;          // packed layout, optional
  std::optional<std::vector<double>> keypoints;             // flat (x, y, v) triplets
};

// COCO-style annotation file: {"images": [...], "annotations": [...]}.
struct CocoAnnotationDoc {
  std::vector<CocoImage> images;
  std::vector<CocoAnnotation> annotations;

  void validate() const {
    std::set<std::int64_t> image_ids;
    for (const auto& im : images) {
      require(image_ids.insert(im.id).second, errc::bad_value,
              "COCO: duplicate image id " + std::to_string(im.id));
      require(im.width > 0 && im.height > 0, errc::bad_value,
              "COCO: image " + std::to_string(im.id) + " has non-positive dimensions");
    }
    std::set<std::int64_t> ann_ids;
    for (const auto& an : annotations) {
      require(ann_ids.insert(an.id).second, errc::bad_value,
              "COCO: duplicate annotation id " + std::to_string(an.id));
      require(image_ids.count(an.image_id) == 1, errc::bad_reference,
              "COCO: annotation " + std::to_string(an.id) + " references unknown image " +
                  std::to_string(an.image_id));
      require(an.bbox_xywh[2] > 0.0 && an.bbox_xywh[3] > 0.0, errc::bad_value,
              "COCO: annotation " + std::to_string(an.id) + " has a degenerate bbox");
      if (an.keypoints) {
        require(an.keypoints->size() % 3 == 0, errc::length_mismatch,
                "COCO: annotation " + std::to_string(an.id) +
                    " keypoints are not (x, y, v) triplets");
      }
    }
  }

  static CocoAnnotationDoc from_json(const nlohmann::json& j) {
    CocoAnnotationDoc doc;
    require(j.is_object(), errc::bad_value, "COCO: document root must be an object");
    require(j.contains("images") && j.at("images").is_array(), errc::missing_key,
            "COCO: missing 'images' array");
    require(j.contains("annotations") && j.at("annotations").is_array(), errc::missing_key,
            "COCO: missing 'annotations' array");
    auto get = [](const nlohmann::json& obj, const char* key) -> const nlohmann::json& {
      require(obj.contains(key), errc::missing_key,
              std::string("COCO: entry is missing '") + key + "'");
      return obj.at(key);
    };
    for (const auto& im : j.at("images")) {
      CocoImage out;
      require(get(im, "id").is_number_integer(), errc::bad_value, "COCO: image id must be an integer");
      out.id = get(im, "id").get<std::int64_t>();
      require(get(im, "file_name").is_string(), errc::bad_value, "COCO: file_name must be a string");
      out.file_name = get(im, "file_name").get<std::string>();
      require(get(im, "width").is_number() && get(im, "height").is_number(), errc::bad_value,
              "COCO: image dimensions must be numbers");
      out.width = get(im, "width").get<int>();
      out.height = get(im, "height").get<int>();
      doc.images.push_back(std::move(out));
    }
    for (const auto& an : j.at("annotations")) {
      CocoAnnotation out;
      require(get(an, "id").is_number_integer(), errc::bad_value,
              "COCO: annotation id must be an integer");
      out.id = get(an, "id").get<std::int64_t>();
      require(get(an, "image_id").is_number_integer(), errc::bad_value,
              "COCO: image_id must be an integer");
      out.image_id = get(an, "image_id").get<std::int64_t>();
      const nlohmann::json& bb = get(an, "bbox");
      require(bb.is_array() && bb.size() == 4, errc::bad_value,
              "COCO: bbox must be a 4-element array");
      for (std::size_t i = 0; i < 4; ++i) {
        require(bb[i].is_number(), errc::bad_value, "COCO: bbox entries must be numbers");
        out.bbox_xywh[i] = bb[i].get<double>();
      }
      if (an.contains("smplx_params")) {
        require(an.at("smplx_params").is_array(), errc::bad_value,
                "COCO: smplx_params must be an array");
        out.smplx_params = an.at("smplx_params").get<std::vector<double>>();
      }
      if (an.contains("keypoints")) {
        require(an.at("keypoints").is_array(), errc::bad_value,
                "COCO: keypoints must be an array");
        out.keypoints = an.at("keypoints").get<std::vector<double>>();
      }
      doc.annotations.push_back(std::move(out));
    }
    doc.validate();
    return doc;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["images"] = nlohmann::json::array();
    for (const auto& im : images) {
      j["images"].push_back({{"id", im.id},
                             {"file_name", im.file_name},
                             {"width", im.width},
                             {"height", im.height}});
    }
    j["annotations"] = nlohmann::json::array();
    for (const auto& an : annotations) {
      nlohmann::json o = {{"id", an.id},
                          {"image_id", an.image_id},
                          {"bbox", an.bbox_xywh}};
      if (an.smplx_params) o["smplx_params"] = *an.smplx_params;
      if (an.keypoints) o["keypoints"] = *an.keypoints;
      j["annotations"].push_back(std::move(o));
    }
    return j;
  }

  static CocoAnnotationDoc load(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail_io(errc::file_open_failed, "cannot open '" + path + "'");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      fail(errc::bad_value, std::string("COCO: invalid JSON: ") + e.what());
    }
    return from_json(j);
  }

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) fail_io(errc::file_write_failed, "cannot open '" + path + "' for writing");
    out << to_json().dump(2) << "\n";
    if (!out) fail_io(errc::file_write_failed, "write failed for '" + path + "'");
  }
};

}  // namespace ehps
