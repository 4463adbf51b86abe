#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ehps/errors.hpp"

namespace ehps {

// MPE differences at or below this are treated as ties (inputs carry one
// decimal; this guards the declared lexicographic tie rule against
// summation-order noise).
inline constexpr double kMpeTieEpsilon = 1e-9;

// Train-dataset x benchmark error grid (mm). Absent cells are allowed and are
// treated as excluded from MPE.
struct ResultsMatrix {
  std::vector<std::string> datasets;    // row names
  std::vector<std::string> benchmarks;  // column names
  std::vector<std::vector<std::optional<double>>> cells;  // [row][col]

  int row_count() const { return static_cast<int>(datasets.size()); }
  int col_count() const { return static_cast<int>(benchmarks.size()); }

  int row_index(const std::string& name) const {
    for (int i = 0; i < row_count(); ++i)
      if (datasets[static_cast<std::size_t>(i)] == name) return i;
    fail(errc::bad_reference, "unknown dataset '" + name + "'");
  }

  void validate() const {
    require(!datasets.empty() && !benchmarks.empty(), errc::invalid_argument,
            "results matrix must have at least one row and column");
    require(cells.size() == datasets.size(), errc::dimension_mismatch,
            "cell row count != dataset count");
    std::set<std::string> seen_d(datasets.begin(), datasets.end());
    require(seen_d.size() == datasets.size(), errc::bad_value, "duplicate dataset name");
    std::set<std::string> seen_b(benchmarks.begin(), benchmarks.end());
    require(seen_b.size() == benchmarks.size(), errc::bad_value, "duplicate benchmark name");
    for (std::size_t r = 0; r < cells.size(); ++r) {
      require(cells[r].size() == benchmarks.size(), errc::dimension_mismatch,
              "row '" + datasets[r] + "' has wrong cell count");
      for (const auto& c : cells[r]) {
        if (c) {
          require(std::isfinite(*c) && *c > 0.0, errc::bad_value,
                  "row '" + datasets[r] + "' has a non-positive or non-finite cell");
        }
      }
    }
  }

  // CSV: header "dataset,<benchmark>,...", one row per dataset, empty cell =>
  // absent. No quoting; names must not contain commas.
  static ResultsMatrix from_csv(const std::string& text) {
    ResultsMatrix m;
    std::istringstream in(text);
    std::string line;
    auto split = [](const std::string& s) {
      std::vector<std::string> out;
      std::string cur;
      for (char ch : s) {
        if (ch == ',') {
          out.push_back(cur);
          cur.clear();
        } else if (ch != '\r') {
          cur.push_back(ch);
        }
      }
      out.push_back(cur);
      return out;
    };
    bool have_header = false;
    while (std::getline(in, line)) {
      if (line.empty() || line == "\r") continue;
      std::vector<std::string> parts = split(line);
      if (!have_header) {
        require(parts.size() >= 2 && parts[0] == "dataset", errc::bad_header,
                "results CSV must start with a 'dataset,<benchmark>...' header");
        m.benchmarks.assign(parts.begin() + 1, parts.end());
        have_header = true;
        continue;
      }
      require(parts.size() == m.benchmarks.size() + 1, errc::length_mismatch,
              "results CSV row '" + parts[0] + "' has wrong column count");
      m.datasets.push_back(parts[0]);
      std::vector<std::optional<double>> row;
      for (std::size_t i = 1; i < parts.size(); ++i) {
        if (parts[i].empty()) {
          row.push_back(std::nullopt);
          continue;
        }
        std::size_t pos = 0;
        double v = 0.0;
        try {
          v = std::stod(parts[i], &pos);
        } catch (const std::exception&) {
          fail(errc::bad_value, "results CSV cell '" + parts[i] + "' is not a number");
        }
        require(pos == parts[i].size(), errc::bad_value,
                "results CSV cell '" + parts[i] + "' is not a number");
        row.push_back(v);
      }
      m.cells.push_back(std::move(row));
    }
    m.validate();
    return m;
  }
};

// (train-dataset, benchmark) pairs excluded from MPE (in-domain results).
struct InDomainMask {
  std::vector<std::pair<std::string, std::string>> exclude;

  bool contains(const std::string& dataset, const std::string& benchmark) const {
    for (const auto& [d, b] : exclude)
      if (d == dataset && b == benchmark) return true;
    return false;
  }

  void validate_against(const ResultsMatrix& m) const {
    for (const auto& [d, b] : exclude) {
      bool row_ok = std::find(m.datasets.begin(), m.datasets.end(), d) != m.datasets.end();
      bool col_ok = std::find(m.benchmarks.begin(), m.benchmarks.end(), b) != m.benchmarks.end();
      require(row_ok, errc::bad_reference, "mask references unknown dataset '" + d + "'");
      require(col_ok, errc::bad_reference, "mask references unknown benchmark '" + b + "'");
    }
  }

  // The paper's in-domain exclusions. EgoBody-MVSet is deliberately not
  // excluded against the EgoBody benchmark (its published MPE is the plain
  // mean over all cells).
  static InDomainMask default_mask() {
    InDomainMask m;
    m.exclude = {{"AGORA", "AGORA"},
                 {"UBody", "UBody"},
                 {"EgoBody-EgoSet", "EgoBody"},
                 {"3DPW", "3DPW"}};
    return m;
  }

  // Default mask with pairs not present in the matrix dropped; used by the
  // CLI so small grids work out of the box.
  InDomainMask restricted_to(const ResultsMatrix& m) const {
    InDomainMask out;
    for (const auto& [d, b] : exclude) {
      bool row_ok = std::find(m.datasets.begin(), m.datasets.end(), d) != m.datasets.end();
      bool col_ok = std::find(m.benchmarks.begin(), m.benchmarks.end(), b) != m.benchmarks.end();
      if (row_ok && col_ok) out.exclude.emplace_back(d, b);
    }
    return out;
  }

  // {"exclude": [["UBody","UBody"], ...]}
  static InDomainMask from_json(const nlohmann::json& j) {
    InDomainMask m;
    require(j.is_object() && j.contains("exclude"), errc::missing_key,
            "mask JSON needs an 'exclude' array");
    require(j.at("exclude").is_array(), errc::bad_value, "'exclude' must be an array");
    for (const auto& pair : j.at("exclude")) {
      require(pair.is_array() && pair.size() == 2 && pair[0].is_string() && pair[1].is_string(),
              errc::bad_value, "each exclusion must be a [dataset, benchmark] string pair");
      m.exclude.emplace_back(pair[0].get<std::string>(), pair[1].get<std::string>());
    }
    return m;
  }

  nlohmann::json to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [d, b] : exclude) arr.push_back({d, b});
    return nlohmann::json{{"exclude", arr}};
  }
};

// Mean of the row's surviving cells: absent cells and masked cells are both
// excluded. Full-precision arithmetic; rounding happens only at presentation.
inline double compute_mpe(const ResultsMatrix& m, int row, const InDomainMask& mask) {
  require(row >= 0 && row < m.row_count(), errc::out_of_range, "compute_mpe: row out of range");
  double sum = 0.0;
  int n = 0;
  for (int c = 0; c < m.col_count(); ++c) {
    const auto& cell = m.cells[static_cast<std::size_t>(row)][static_cast<std::size_t>(c)];
    if (!cell) continue;
    if (mask.contains(m.datasets[static_cast<std::size_t>(row)],
                      m.benchmarks[static_cast<std::size_t>(c)]))
      continue;
    sum += *cell;
    ++n;
  }
  require(n > 0, errc::degenerate_input,
          "compute_mpe: every cell of '" + m.datasets[static_cast<std::size_t>(row)] +
              "' is excluded or absent");
  return sum / static_cast<double>(n);
}

inline double compute_mpe(const ResultsMatrix& m, const std::string& dataset,
                          const InDomainMask& mask) {
  return compute_mpe(m, m.row_index(dataset), mask);
}

struct RankingRow {
  std::string dataset;
  double mpe = 0.0;
  int rank = 0;  // 1-based, ties share the minimum rank
  std::vector<std::optional<double>> errors;           // per benchmark, absent kept absent
  std::vector<std::optional<int>> per_benchmark_rank;  // within-column ranks (the star columns)
};

struct RankingTable {
  std::vector<std::string> benchmarks;
  std::vector<RankingRow> rows;  // sorted ascending by MPE
};

// Rank rows ascending by MPE; ties (within kMpeTieEpsilon) share the minimum
// rank and order lexicographically by dataset name. Also emits within-column
// ranks per benchmark.
inline RankingTable rank_datasets(const ResultsMatrix& m, const InDomainMask& mask) {
  m.validate();
  mask.validate_against(m);

  RankingTable table;
  table.benchmarks = m.benchmarks;
  for (int r = 0; r < m.row_count(); ++r) {
    RankingRow row;
    row.dataset = m.datasets[static_cast<std::size_t>(r)];
    row.mpe = compute_mpe(m, r, mask);
    row.errors = m.cells[static_cast<std::size_t>(r)];
    row.per_benchmark_rank.assign(m.benchmarks.size(), std::nullopt);
    table.rows.push_back(std::move(row));
  }

  std::sort(table.rows.begin(), table.rows.end(), [](const RankingRow& a, const RankingRow& b) {
    if (std::abs(a.mpe - b.mpe) <= kMpeTieEpsilon) return a.dataset < b.dataset;
    return a.mpe < b.mpe;
  });
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    if (i > 0 && std::abs(table.rows[i].mpe - table.rows[i - 1].mpe) <= kMpeTieEpsilon) {
      table.rows[i].rank = table.rows[i - 1].rank;
    } else {
      table.rows[i].rank = static_cast<int>(i) + 1;
    }
  }

  // Within-column ranks over present cells.
  for (std::size_t c = 0; c < table.benchmarks.size(); ++c) {
    std::vector<std::size_t> present;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      if (table.rows[r].errors[c]) present.push_back(r);
    }
    std::sort(present.begin(), present.end(), [&](std::size_t a, std::size_t b) {
      const double va = *table.rows[a].errors[c], vb = *table.rows[b].errors[c];
      if (std::abs(va - vb) <= kMpeTieEpsilon) return table.rows[a].dataset < table.rows[b].dataset;
      return va < vb;
    });
    for (std::size_t i = 0; i < present.size(); ++i) {
      int rank = static_cast<int>(i) + 1;
      if (i > 0 && std::abs(*table.rows[present[i]].errors[c] -
                            *table.rows[present[i - 1]].errors[c]) <= kMpeTieEpsilon) {
        rank = *table.rows[present[i - 1]].per_benchmark_rank[c];
      }
      table.rows[present[i]].per_benchmark_rank[c] = rank;
    }
  }
  return table;
}

// First n datasets of the ranking (leakage-free selection when the ranking
// came from a training-set benchmark).
inline std::vector<std::string> select_top_n(const RankingTable& table, int n) {
  require(n >= 0 && n <= static_cast<int>(table.rows.size()), errc::out_of_range,
          "select_top_n: n out of range");
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out.push_back(table.rows[static_cast<std::size_t>(i)].dataset);
  return out;
}

// Finetune-scope plan with the reference architecture's trainable-parameter
// counts (informational).
enum class FinetuneScope { full, neck_head, head };

struct FinetunePlan {
  FinetuneScope scope = FinetuneScope::full;
  std::uint64_t trainable_params = 0;
};

inline FinetunePlan plan_finetune(FinetuneScope scope) {
  switch (scope) {
    case FinetuneScope::full: return {scope, 662'000'000ull};
    case FinetuneScope::neck_head: return {scope, 31'000'000ull};
    case FinetuneScope::head: return {scope, 5'000'000ull};
  }
  fail(errc::invalid_argument, "plan_finetune: unknown scope");
}

inline FinetuneScope parse_finetune_scope(const std::string& s) {
  if (s == "full") return FinetuneScope::full;
  if (s == "neck+head" || s == "neck_head") return FinetuneScope::neck_head;
  if (s == "head") return FinetuneScope::head;
  fail(errc::invalid_argument, "unknown finetune scope '" + s + "'");
}

inline const char* finetune_scope_name(FinetuneScope s) {
  switch (s) {
    case FinetuneScope::full: return "full";
    case FinetuneScope::neck_head: return "neck+head";
    case FinetuneScope::head: return "head";
  }
  return "?";
}

}  // namespace ehps
