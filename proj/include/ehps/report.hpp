#pragma once

#include <cstdio>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "ehps/benchmark.hpp"
#include "ehps/metrics.hpp"
#include "ehps/sampling.hpp"

namespace ehps {

// Rendering of ranking tables, sampling plans and error reports as CSV (for
// machines) and aligned text (for terminals). Text output rounds to one
// decimal for benchmark errors and two for millimeter metrics; CSV can carry
// full precision for round-tripping.

namespace report_detail {

inline std::string fixed(double v, int decimals) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(decimals) << v;
  return os.str();
}

inline std::string full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

// Left-pad to width (right alignment for numeric columns).
inline std::string lpad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

inline std::string rpad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

inline std::string render_columns(const std::vector<std::vector<std::string>>& rows,
                                  std::size_t left_aligned_cols) {
  std::vector<std::size_t> width;
  for (const auto& row : rows) {
    if (width.size() < row.size()) width.resize(row.size(), 0);
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream os;
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) os << "  ";
      os << (c < left_aligned_cols ? rpad(row[c], width[c]) : lpad(row[c], width[c]));
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace report_detail

inline std::string ranking_to_csv(const RankingTable& table, bool full_precision = false) {
  namespace d = report_detail;
  std::ostringstream os;
  os << "rank,dataset";
  for (const auto& b : table.benchmarks) os << "," << d::csv_escape(b);
  os << ",mpe\n";
  for (const auto& row : table.rows) {
    os << row.rank << "," << d::csv_escape(row.dataset);
    for (const auto& cell : row.errors) {
      os << ",";
      if (cell) os << (full_precision ? d::full(*cell) : d::fixed(*cell, 1));
    }
    os << "," << (full_precision ? d::full(row.mpe) : d::fixed(row.mpe, 1)) << "\n";
  }
  return os.str();
}

// Aligned table; the best present value in each benchmark column carries a
// trailing '*'.
inline std::string ranking_to_text(const RankingTable& table) {
  namespace d = report_detail;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header = {"rank", "dataset"};
  header.insert(header.end(), table.benchmarks.begin(), table.benchmarks.end());
  header.push_back("MPE");
  rows.push_back(std::move(header));
  for (const auto& row : table.rows) {
    std::vector<std::string> cells = {std::to_string(row.rank), row.dataset};
    for (std::size_t c = 0; c < row.errors.size(); ++c) {
      if (!row.errors[c]) {
        cells.push_back("-");
        continue;
      }
      std::string s = d::fixed(*row.errors[c], 1);
      if (row.per_benchmark_rank[c] && *row.per_benchmark_rank[c] == 1) s += "*";
      cells.push_back(std::move(s));
    }
    cells.push_back(d::fixed(row.mpe, 1));
    rows.push_back(std::move(cells));
  }
  return d::render_columns(rows, 2);
}

inline std::string plan_to_csv(const SamplingPlan& plan) {
  namespace d = report_detail;
  std::ostringstream os;
  os << "dataset,native_length,target_length\n";
  for (const auto& e : plan.entries)
    os << d::csv_escape(e.name) << "," << e.native_length << "," << e.target_length << "\n";
  return os.str();
}

inline std::string plan_to_text(const SamplingPlan& plan) {
  namespace d = report_detail;
  std::uint64_t assigned = 0;
  for (const auto& e : plan.entries) assigned += e.target_length;
  std::ostringstream os;
  os << "strategy: " << sampling_strategy_name(plan.strategy) << "\n";
  os << "total:    " << assigned << "\n";
  if (!plan.warning.empty()) os << "warning:  " << plan.warning << "\n";
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"dataset", "native", "target"});
  for (const auto& e : plan.entries)
    rows.push_back({e.name, std::to_string(e.native_length), std::to_string(e.target_length)});
  os << d::render_columns(rows, 1);
  return os.str();
}

inline std::string part_report_to_csv(const PartErrorReport& report, bool full_precision = false) {
  namespace d = report_detail;
  auto num = [&](double v) { return full_precision ? d::full(v) : d::fixed(v, 2); };
  std::ostringstream os;
  os << "part,raw,pa\n";
  os << "all," << num(report.all.raw) << "," << num(report.all.pa) << "\n";
  os << "body," << num(report.body.raw) << "," << num(report.body.pa) << "\n";
  os << "hands," << num(report.hands.raw) << "," << num(report.hands.pa) << "\n";
  os << "face," << num(report.face.raw) << "," << num(report.face.pa) << "\n";
  return os.str();
}

inline std::string part_report_to_text(const PartErrorReport& report) {
  namespace d = report_detail;
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"part", "raw", "pa"});
  auto add = [&](const char* name, const PartErrorReport::Entry& e) {
    rows.push_back({name, d::fixed(e.raw, 2), d::fixed(e.pa, 2)});
  };
  add("all", report.all);
  add("body", report.body);
  add("hands", report.hands);
  add("face", report.face);
  return d::render_columns(rows, 1);
}

inline std::string finetune_to_text(const FinetunePlan& plan) {
  std::ostringstream os;
  os << "scope:            " << finetune_scope_name(plan.scope) << "\n";
  os << "trainable params: " << plan.trainable_params << "\n";
  return os.str();
}

}  // namespace ehps
