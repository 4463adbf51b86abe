// ehps: command-line front end for the toolkit. Subcommands:
//   rank | select | plan | eval | adapter fit | npz inspect | model info
// Exit codes: 0 success, 2 validation/usage error, 3 I/O error.

#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <ehps/ehps.hpp>

namespace {

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) ehps::fail_io(ehps::errc::file_open_failed, "cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

nlohmann::json read_json(const std::string& path) {
  const std::string text = read_text(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    ehps::fail(ehps::errc::bad_value, "'" + path + "' is not valid JSON: " + e.what());
  }
}

std::string format_value(double v, bool full_precision, int decimals) {
  if (full_precision) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
  }
  std::ostringstream os;
  os << std::fixed << std::setprecision(decimals) << v;
  return os.str();
}

// (F, N, 3) float array -> per-frame N x 3 matrices.
std::vector<Eigen::MatrixX3d> frames_from(const ehps::ArrayRecord& rec, const std::string& key) {
  ehps::require(rec.shape.size() == 3 && rec.shape[2] == 3, ehps::errc::dimension_mismatch,
                "'" + key + "' must have shape (frames, points, 3)");
  const auto f_count = rec.shape[0];
  const auto n_count = rec.shape[1];
  ehps::require(f_count >= 1 && n_count >= 1, ehps::errc::invalid_argument,
                "'" + key + "' must be non-empty");
  const std::vector<double> vals = rec.to_doubles();
  std::vector<Eigen::MatrixX3d> frames;
  frames.reserve(f_count);
  for (std::uint64_t f = 0; f < f_count; ++f) {
    Eigen::MatrixX3d m(static_cast<Eigen::Index>(n_count), 3);
    for (std::uint64_t n = 0; n < n_count; ++n)
      for (std::uint64_t c = 0; c < 3; ++c)
        m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(c)) =
            vals[(f * n_count + n) * 3 + c];
    frames.push_back(std::move(m));
  }
  return frames;
}

// Fixed-order sequential mean over frames -- results are independent of any
// upstream parallelism.
double frame_mean(const std::vector<Eigen::MatrixX3d>& pred,
                  const std::vector<Eigen::MatrixX3d>& gt,
                  const std::function<double(const Eigen::MatrixX3d&, const Eigen::MatrixX3d&)>&
                      metric) {
  ehps::require(pred.size() == gt.size(), ehps::errc::dimension_mismatch,
                "prediction and ground truth frame counts differ");
  double sum = 0.0;
  for (std::size_t f = 0; f < pred.size(); ++f) sum += metric(pred[f], gt[f]);
  return sum / static_cast<double>(pred.size());
}

struct RankArgs {
  std::string results_path;
  std::string mask_path;
  bool csv = false;
  std::string precision = "default";
};

ehps::RankingTable build_ranking(const RankArgs& args) {
  const ehps::ResultsMatrix matrix = ehps::ResultsMatrix::from_csv(read_text(args.results_path));
  ehps::InDomainMask mask = args.mask_path.empty()
                                ? ehps::InDomainMask::default_mask().restricted_to(matrix)
                                : ehps::InDomainMask::from_json(read_json(args.mask_path));
  return ehps::rank_datasets(matrix, mask);
}

struct EvalArgs {
  std::string pred_path, gt_path, model_path;
  bool pa = false;
  bool parts = false;
  bool per_hand_pa = false;
  bool whole_body_pa = false;
  double f1 = 0.0;
  bool f1_set = false;
  std::string keypoints = "fk";
  std::string precision = "default";
  bool csv = false;
};

void run_eval(const EvalArgs& args) {
  const ehps::NpzArchive pred = ehps::load_npz(args.pred_path);
  const ehps::NpzArchive gt = ehps::load_npz(args.gt_path);
  const ehps::BodyModelDef model = ehps::load_model(args.model_path);
  const bool full = args.precision == "full";
  auto fmt = [&](double v) { return format_value(v, full, 4); };

  std::optional<ehps::DetectionScore> score;
  if (args.f1_set) {
    score = ehps::DetectionScore{args.f1};
  } else if (const ehps::ArrayRecord* rec = pred.find("f1")) {
    ehps::require(rec->element_count() == 1, ehps::errc::dimension_mismatch,
                  "'f1' must hold a single value");
    score = ehps::DetectionScore{rec->to_doubles()[0]};
  }
  if (score) score->validate();

  std::vector<Eigen::MatrixX3d> pred_verts, gt_verts;
  if (pred.find("vertices") && gt.find("vertices")) {
    pred_verts = frames_from(pred.at("vertices"), "vertices");
    gt_verts = frames_from(gt.at("vertices"), "vertices");
  }

  std::vector<Eigen::MatrixX3d> pred_joints, gt_joints;
  if (args.keypoints == "regressed") {
    ehps::require(!pred_verts.empty(), ehps::errc::missing_key,
                  "--keypoints regressed needs 'vertices' in both archives");
    for (const auto& v : pred_verts) pred_joints.push_back(ehps::keypoints_from_vertices(model, v));
    for (const auto& v : gt_verts) gt_joints.push_back(ehps::keypoints_from_vertices(model, v));
  } else if (pred.find("joints") && gt.find("joints")) {
    pred_joints = frames_from(pred.at("joints"), "joints");
    gt_joints = frames_from(gt.at("joints"), "joints");
  }

  ehps::require(!pred_verts.empty() || !pred_joints.empty(), ehps::errc::missing_key,
                "nothing to evaluate: need 'vertices' and/or 'joints' in both archives");

  std::ostringstream out;
  const std::size_t frames = !pred_verts.empty() ? pred_verts.size() : pred_joints.size();
  out << "frames " << frames << "\n";

  auto raw = [](const Eigen::MatrixX3d& p, const Eigen::MatrixX3d& g) {
    return ehps::mean_l2(p, g);
  };
  auto pa = [](const Eigen::MatrixX3d& p, const Eigen::MatrixX3d& g) {
    return ehps::pa_error(p, g);
  };

  if (!pred_verts.empty()) {
    const double pve = frame_mean(pred_verts, gt_verts, raw);
    out << "pve " << fmt(pve) << "\n";
    if (args.pa) out << "pa_pve " << fmt(frame_mean(pred_verts, gt_verts, pa)) << "\n";
    if (score) out << "nmve " << fmt(ehps::nmve(pve, *score)) << "\n";
  }
  if (!pred_joints.empty()) {
    const double mpjpe = frame_mean(pred_joints, gt_joints, raw);
    out << "mpjpe " << fmt(mpjpe) << "\n";
    if (args.pa) out << "pa_mpjpe " << fmt(frame_mean(pred_joints, gt_joints, pa)) << "\n";
    if (score) out << "nmje " << fmt(ehps::nmje(mpjpe, *score)) << "\n";
  }

  if (args.parts) {
    ehps::require(!pred_verts.empty(), ehps::errc::missing_key,
                  "--parts needs 'vertices' in both archives");
    const ehps::PartAlignment alignment = args.whole_body_pa ? ehps::PartAlignment::whole_body
                                                             : ehps::PartAlignment::per_part;
    ehps::PartErrorReport total;
    for (std::size_t f = 0; f < pred_verts.size(); ++f) {
      const ehps::PartErrorReport r =
          ehps::per_part_report(pred_verts[f], gt_verts[f], model.part_masks, alignment);
      total.all.raw += r.all.raw;
      total.all.pa += r.all.pa;
      total.body.raw += r.body.raw;
      total.body.pa += r.body.pa;
      total.hands.raw += r.hands.raw;
      total.hands.pa += r.hands.pa;
      total.face.raw += r.face.raw;
      total.face.pa += r.face.pa;
    }
    const double n = static_cast<double>(pred_verts.size());
    for (auto* e : {&total.all, &total.body, &total.hands, &total.face}) {
      e->raw /= n;
      e->pa /= n;
    }
    out << (args.csv ? ehps::part_report_to_csv(total, full) : ehps::part_report_to_text(total));
  }
  std::cout << out.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Whole-body pose toolkit: benchmark ranking, sampling plans, metrics, adapters"};
  app.require_subcommand(1);

  // ---- rank ----
  RankArgs rank_args;
  CLI::App* rank = app.add_subcommand("rank", "Rank datasets by MPE from a results CSV");
  rank->add_option("--results", rank_args.results_path, "results CSV (dataset,<benchmark>...)")
      ->required();
  rank->add_option("--mask", rank_args.mask_path,
                   "in-domain exclusion JSON; default: the built-in exclusions");
  rank->add_flag("--csv", rank_args.csv, "emit CSV instead of an aligned table");
  rank->add_option("--precision", rank_args.precision, "'default' (one decimal) or 'full'")
      ->check(CLI::IsMember({"default", "full"}));
  rank->callback([&] {
    const ehps::RankingTable table = build_ranking(rank_args);
    std::cout << (rank_args.csv ? ehps::ranking_to_csv(table, rank_args.precision == "full")
                                : ehps::ranking_to_text(table));
  });

  // ---- select ----
  RankArgs select_args;
  int top_n = 0;
  CLI::App* select = app.add_subcommand("select", "Print the top-N ranked dataset names");
  select->add_option("--results", select_args.results_path, "results CSV")->required();
  select->add_option("--mask", select_args.mask_path, "in-domain exclusion JSON");
  select->add_option("--top", top_n, "how many datasets to select")->required();
  select->callback([&] {
    const ehps::RankingTable table = build_ranking(select_args);
    for (const std::string& name : ehps::select_top_n(table, top_n)) std::cout << name << "\n";
  });

  // ---- plan ----
  std::string plan_specs_path, plan_strategy = "balanced", plan_realize_path;
  std::uint64_t plan_total = 0, plan_seed = 0;
  bool plan_csv = false, plan_json = false;
  CLI::App* plan = app.add_subcommand("plan", "Build a training-data sampling plan");
  plan->add_option("--specs", plan_specs_path,
                   "dataset spec JSON: [{name, native_length, rank}]")
      ->required();
  plan->add_option("--strategy", plan_strategy, "balanced | weighted | concat")
      ->check(CLI::IsMember({"balanced", "weighted", "concat"}));
  CLI::Option* total_opt = plan->add_option("--total", plan_total, "total instances to schedule");
  plan->add_flag("--csv", plan_csv, "emit CSV instead of an aligned table");
  plan->add_flag("--json", plan_json, "emit the plan as JSON");
  plan->add_option("--realize", plan_realize_path,
                   "also write per-dataset index schedules to this .npz");
  plan->add_option("--seed", plan_seed, "seed for schedule realization");
  plan->callback([&] {
    const std::vector<ehps::DatasetSpec> specs = ehps::load_dataset_specs(plan_specs_path);
    const ehps::SamplingStrategy strategy = ehps::parse_sampling_strategy(plan_strategy);
    ehps::SamplingPlan sampling_plan;
    if (strategy == ehps::SamplingStrategy::concat) {
      sampling_plan = ehps::plan_concat(specs);
    } else {
      ehps::require(total_opt->count() > 0, ehps::errc::invalid_argument,
                    "--total is required for balanced/weighted plans");
      sampling_plan = strategy == ehps::SamplingStrategy::balanced
                          ? ehps::plan_balanced(specs, plan_total)
                          : ehps::plan_weighted(specs, plan_total);
    }
    if (plan_json) {
      std::cout << sampling_plan.to_json().dump(1) << "\n";
    } else {
      std::cout << (plan_csv ? ehps::plan_to_csv(sampling_plan)
                             : ehps::plan_to_text(sampling_plan));
    }
    if (!plan_realize_path.empty()) {
      const auto schedules = ehps::realize_schedule(sampling_plan, plan_seed);
      ehps::NpzArchive archive;
      for (std::size_t i = 0; i < schedules.size(); ++i) {
        std::vector<double> vals(schedules[i].begin(), schedules[i].end());
        ehps::ArrayRecord rec = ehps::ArrayRecord::from_doubles(
            {static_cast<std::uint64_t>(vals.size())}, vals);
        archive.insert(sampling_plan.entries[i].name, std::move(rec));
      }
      ehps::save_npz(plan_realize_path, archive);
    }
  });

  // ---- eval ----
  EvalArgs eval_args;
  CLI::App* eval = app.add_subcommand("eval", "Score predictions against ground truth");
  eval->add_option("--pred", eval_args.pred_path, "prediction .npz")->required();
  eval->add_option("--gt", eval_args.gt_path, "ground-truth .npz")->required();
  eval->add_option("--model", eval_args.model_path, "body model JSON (part masks, regressor)")
      ->required();
  eval->add_flag("--pa", eval_args.pa, "also report Procrustes-aligned errors");
  eval->add_flag("--parts", eval_args.parts, "per-part error table (body/hands/face)");
  CLI::Option* per_hand =
      eval->add_flag("--per-hand-pa", eval_args.per_hand_pa,
                     "fit part alignments per part, hands per hand (default)");
  eval->add_flag("--whole-body-pa", eval_args.whole_body_pa,
                 "fit one alignment on all vertices, then score parts")
      ->excludes(per_hand);
  CLI::Option* f1_opt =
      eval->add_option("--f1", eval_args.f1, "detection F1 for normalized metrics");
  eval->add_option("--keypoints", eval_args.keypoints,
                   "'fk' uses stored joint arrays; 'regressed' regresses from vertices")
      ->check(CLI::IsMember({"fk", "regressed"}));
  eval->add_option("--precision", eval_args.precision, "'default' or 'full'")
      ->check(CLI::IsMember({"default", "full"}));
  eval->add_flag("--csv", eval_args.csv, "CSV part table");
  eval->callback([&] {
    eval_args.f1_set = f1_opt->count() > 0;
    run_eval(eval_args);
  });

  // ---- adapter fit ----
  CLI::App* adapter = app.add_subcommand("adapter", "Shape-adapter operations");
  adapter->require_subcommand(1);
  std::string fit_src, fit_dst, fit_out;
  ehps::AdapterTrainConfig fit_cfg;
  CLI::App* fit = adapter->add_subcommand("fit", "Fit a source->target shape adapter");
  fit->add_option("--src", fit_src, "source (e.g. gendered) model JSON")->required();
  fit->add_option("--dst", fit_dst, "target (e.g. neutral) model JSON")->required();
  fit->add_option("--out", fit_out, "write the fitted adapter JSON here");
  fit->add_option("--iters", fit_cfg.iterations, "gradient steps");
  fit->add_option("--step", fit_cfg.step, "step size");
  fit->add_option("--batch", fit_cfg.batch, "samples per step");
  fit->add_option("--sigma", fit_cfg.pose_sigma, "body-pose sampling noise, radians");
  fit->add_option("--beta-sigma", fit_cfg.beta_sigma, "shape-coefficient sampling noise");
  fit->add_option("--tol", fit_cfg.tol, "stop once held-out error reaches this (mm)");
  fit->add_option("--holdout", fit_cfg.holdout, "held-out sample count");
  fit->add_option("--init-scale", fit_cfg.init_scale, "weight init scale; 0 = identity start");
  fit->add_option("--hidden", fit_cfg.hidden, "hidden layer widths")->delimiter(',');
  fit->add_option("--seed", fit_cfg.seed, "sampling/init seed");
  fit->callback([&] {
    const ehps::BodyModelDef src = ehps::load_model(fit_src);
    const ehps::BodyModelDef dst = ehps::load_model(fit_dst);
    const ehps::AdapterFitResult result = ehps::fit_adapter(src, dst, fit_cfg);
    std::cout << "iterations " << result.iterations_run << "\n";
    std::cout << "best_iteration " << result.best_iteration << "\n";
    std::cout << "holdout_error_mm " << format_value(result.best_holdout, true, 0) << "\n";
    if (!fit_out.empty()) ehps::save_adapter(result.adapter, fit_out);
  });

  // ---- npz inspect ----
  CLI::App* npz = app.add_subcommand("npz", "NPZ container operations");
  npz->require_subcommand(1);
  std::string npz_path;
  CLI::App* inspect = npz->add_subcommand("inspect", "List members: name, dtype, shape");
  inspect->add_option("file", npz_path, "archive to inspect")->required();
  inspect->callback([&] {
    const ehps::NpzArchive archive = ehps::load_npz(npz_path);
    for (const auto& [name, rec] : archive.entries) {
      std::cout << name << " " << ehps::dtype_name(rec.dtype) << " (";
      for (std::size_t i = 0; i < rec.shape.size(); ++i) {
        if (i) std::cout << ", ";
        std::cout << rec.shape[i];
      }
      std::cout << ")\n";
    }
  });

  // ---- model info ----
  CLI::App* model_cmd = app.add_subcommand("model", "Body-model file operations");
  model_cmd->require_subcommand(1);
  std::string model_path;
  CLI::App* info = model_cmd->add_subcommand("info", "Print a model summary");
  info->add_option("file", model_path, "model JSON")->required();
  info->callback([&] { std::cout << ehps::model_summary(ehps::load_model(model_path)); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ehps::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const ehps::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
