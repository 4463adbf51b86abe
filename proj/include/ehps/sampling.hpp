#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "ehps/errors.hpp"
#include "ehps/random.hpp"

namespace ehps {

struct DatasetSpec {
  std::string name;
  std::uint64_t native_length = 0;  // instance count
  int rank = 0;                     // 1-based position from the benchmark ranking
};

// Spec files are JSON arrays: [{"name": ..., "native_length": ..., "rank": ...}].
// "rank" may be omitted when the strategy does not use it.
inline std::vector<DatasetSpec> dataset_specs_from_json(const nlohmann::json& j) {
  require(j.is_array(), errc::bad_value, "dataset spec JSON must be an array");
  std::vector<DatasetSpec> specs;
  std::set<std::string> seen;
  for (const auto& item : j) {
    require(item.is_object(), errc::bad_value, "each dataset spec must be an object");
    require(item.contains("name") && item.at("name").is_string(), errc::missing_key,
            "dataset spec needs a string 'name'");
    require(item.contains("native_length") && item.at("native_length").is_number_unsigned(),
            errc::missing_key, "dataset spec needs a non-negative integer 'native_length'");
    DatasetSpec s;
    s.name = item.at("name").get<std::string>();
    s.native_length = item.at("native_length").get<std::uint64_t>();
    if (item.contains("rank")) {
      require(item.at("rank").is_number_integer(), errc::bad_value,
              "dataset spec 'rank' must be an integer");
      s.rank = item.at("rank").get<int>();
    }
    require(seen.insert(s.name).second, errc::bad_value,
            "duplicate dataset name '" + s.name + "' in spec JSON");
    specs.push_back(std::move(s));
  }
  return specs;
}

inline std::vector<DatasetSpec> load_dataset_specs(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail_io(errc::file_open_failed, "cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(errc::bad_value, std::string("dataset spec JSON is invalid: ") + e.what());
  }
  return dataset_specs_from_json(j);
}

enum class SamplingStrategy { balanced, weighted, concat };

inline const char* sampling_strategy_name(SamplingStrategy s) {
  switch (s) {
    case SamplingStrategy::balanced: return "balanced";
    case SamplingStrategy::weighted: return "weighted";
    case SamplingStrategy::concat: return "concat";
  }
  return "?";
}

inline SamplingStrategy parse_sampling_strategy(const std::string& s) {
  if (s == "balanced") return SamplingStrategy::balanced;
  if (s == "weighted") return SamplingStrategy::weighted;
  if (s == "concat") return SamplingStrategy::concat;
  fail(errc::invalid_argument, "unknown sampling strategy '" + s + "'");
}

struct SamplingPlan {
  struct Entry {
    std::string name;
    std::uint64_t native_length = 0;
    std::uint64_t target_length = 0;
  };
  SamplingStrategy strategy = SamplingStrategy::balanced;
  std::uint64_t total = 0;
  std::vector<Entry> entries;
  std::string warning;  // non-empty when a fallback was applied

  nlohmann::json to_json() const {
    nlohmann::json entries_json = nlohmann::json::array();
    for (const auto& e : entries) {
      entries_json.push_back({{"name", e.name},
                              {"native_length", e.native_length},
                              {"target_length", e.target_length}});
    }
    nlohmann::json j{{"strategy", sampling_strategy_name(strategy)},
                     {"total", total},
                     {"entries", entries_json}};
    if (!warning.empty()) j["warning"] = warning;
    return j;
  }

  static SamplingPlan from_json(const nlohmann::json& j) {
    require(j.is_object() && j.contains("strategy") && j.contains("entries"), errc::missing_key,
            "plan JSON needs 'strategy' and 'entries'");
    SamplingPlan plan;
    plan.strategy = parse_sampling_strategy(j.at("strategy").get<std::string>());
    if (j.contains("warning")) plan.warning = j.at("warning").get<std::string>();
    for (const auto& item : j.at("entries")) {
      require(item.contains("name") && item.contains("native_length") &&
                  item.contains("target_length"),
              errc::missing_key, "plan entry needs 'name', 'native_length', 'target_length'");
      plan.entries.push_back({item.at("name").get<std::string>(),
                              item.at("native_length").get<std::uint64_t>(),
                              item.at("target_length").get<std::uint64_t>()});
      plan.total += plan.entries.back().target_length;
    }
    return plan;
  }
};

namespace detail {

// Hamilton (largest-remainder) apportionment of `total` proportional to
// integer weights, exact in integer arithmetic. Remainder ties keep input
// order (stable sort).
inline std::vector<std::uint64_t> largest_remainder(const std::vector<std::uint64_t>& weights,
                                                    std::uint64_t total) {
  using u128 = unsigned __int128;
  const std::size_t n = weights.size();
  u128 wsum = 0;
  for (std::uint64_t w : weights) {
    require(w > 0, errc::invalid_argument, "apportionment weight must be positive");
    wsum += w;
  }
  std::vector<std::uint64_t> quota(n);
  std::vector<u128> rem(n);
  std::uint64_t assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const u128 num = static_cast<u128>(total) * weights[i];
    quota[i] = static_cast<std::uint64_t>(num / wsum);
    rem[i] = num % wsum;
    assigned += quota[i];
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
  for (std::uint64_t extra = total - assigned, i = 0; i < extra; ++i) {
    quota[order[i % n]] += 1;
  }
  return quota;
}

}  // namespace detail

// Equal quotas up to +/-1, exact total (the "uniformly upsampled or
// downsampled to the same length" strategy). Extras go to earlier datasets in
// input order.
inline SamplingPlan plan_balanced(const std::vector<DatasetSpec>& specs, std::uint64_t total) {
  require(!specs.empty(), errc::invalid_argument, "plan_balanced: no datasets");
  require(total >= specs.size(), errc::invalid_argument,
          "plan_balanced: total smaller than dataset count");
  for (const auto& s : specs) {
    require(s.native_length >= 1, errc::invalid_argument,
            "dataset '" + s.name + "' has native_length 0");
  }
  SamplingPlan plan;
  plan.strategy = SamplingStrategy::balanced;
  plan.total = total;
  const std::vector<std::uint64_t> quota =
      detail::largest_remainder(std::vector<std::uint64_t>(specs.size(), 1), total);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    plan.entries.push_back({specs[i].name, specs[i].native_length, quota[i]});
  }
  return plan;
}

// Arithmetic-sequence quotas over rank position: the top-ranked dataset gets
// 4x the weight of the bottom-ranked one, interpolating over the position in
// the rank-sorted list. With the exact integer weights
// W_r = 4(N-1) - 3(r-1), r = 1..N, this is w_r = 4 - 3(r-1)/(N-1) scaled by
// (N-1). A single dataset has no defined 4:1 endpoints; that request falls
// back to a balanced plan with a warning.
inline SamplingPlan plan_weighted(const std::vector<DatasetSpec>& specs, std::uint64_t total) {
  require(!specs.empty(), errc::invalid_argument, "plan_weighted: no datasets");
  require(total >= specs.size(), errc::invalid_argument,
          "plan_weighted: total smaller than dataset count");
  if (specs.size() == 1) {
    SamplingPlan plan = plan_balanced(specs, total);
    plan.strategy = SamplingStrategy::weighted;
    plan.warning = "weighted sampling needs >= 2 datasets (the 4:1 endpoint ratio is undefined "
                   "for one dataset); fell back to a balanced plan";
    return plan;
  }
  std::set<int> ranks;
  for (const auto& s : specs) {
    require(s.native_length >= 1, errc::invalid_argument,
            "dataset '" + s.name + "' has native_length 0");
    require(ranks.insert(s.rank).second, errc::invalid_argument,
            "plan_weighted: duplicate rank " + std::to_string(s.rank));
  }
  std::vector<std::size_t> order(specs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return specs[a].rank < specs[b].rank; });

  const std::uint64_t n = specs.size();
  std::vector<std::uint64_t> weights(n);
  for (std::uint64_t r = 0; r < n; ++r) {
    weights[r] = 4 * (n - 1) - 3 * r;
  }
  const std::vector<std::uint64_t> quota = detail::largest_remainder(weights, total);

  SamplingPlan plan;
  plan.strategy = SamplingStrategy::weighted;
  plan.total = total;
  plan.entries.resize(specs.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const DatasetSpec& s = specs[order[pos]];
    plan.entries[order[pos]] = {s.name, s.native_length, quota[pos]};
  }
  return plan;
}

// Native lengths, unchanged.
inline SamplingPlan plan_concat(const std::vector<DatasetSpec>& specs) {
  SamplingPlan plan;
  plan.strategy = SamplingStrategy::concat;
  plan.total = 0;
  for (const auto& s : specs) {
    plan.entries.push_back({s.name, s.native_length, s.native_length});
    plan.total += s.native_length;
  }
  return plan;
}

// Concrete per-dataset index sequences for a plan. For quota q over native
// length n: q <= n draws a seeded uniform subsample without replacement;
// q > n emits floor(q/n) full passes (0..n-1 each) plus a seeded remainder
// subsample. Each dataset gets its own seed stream derived from its name, so
// schedules do not depend on entry order.
inline std::vector<std::vector<std::uint64_t>> realize_schedule(const SamplingPlan& plan,
                                                                std::uint64_t seed) {
  std::vector<std::vector<std::uint64_t>> out;
  out.reserve(plan.entries.size());
  for (const auto& e : plan.entries) {
    require(e.native_length >= 1, errc::invalid_argument,
            "realize_schedule: dataset '" + e.name + "' has native_length 0");
    Rng rng(sub_seed(seed, e.name));
    std::vector<std::uint64_t> idx;
    idx.reserve(e.target_length);
    if (e.target_length <= e.native_length) {
      idx = rng.sample_without_replacement(e.native_length, e.target_length);
    } else {
      const std::uint64_t passes = e.target_length / e.native_length;
      const std::uint64_t rem = e.target_length % e.native_length;
      for (std::uint64_t p = 0; p < passes; ++p) {
        for (std::uint64_t i = 0; i < e.native_length; ++i) idx.push_back(i);
      }
      const std::vector<std::uint64_t> tail = rng.sample_without_replacement(e.native_length, rem);
      idx.insert(idx.end(), tail.begin(), tail.end());
    }
    out.push_back(std::move(idx));
  }
  return out;
}

}  // namespace ehps
