// Acceptance gate: nine numbered criteria, one [PASS]/[FAIL] line each, with
// every tolerance pinned in this file. Exit status is nonzero if any line
// fails, so the gate can run under ctest or by hand.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include <ehps/ehps.hpp>

#include "support/testutil.hpp"
#include "support/toy_models.hpp"

using namespace ehps;
namespace ts = ehps::testsupport;

namespace {

int g_failures = 0;

void report(int index, const std::string& name, bool ok, const std::string& note = "") {
  std::printf("[%s] criterion %d: %s%s%s\n", ok ? "PASS" : "FAIL", index, name.c_str(),
              note.empty() ? "" : " -- ", note.c_str());
  if (!ok) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Printed-table tolerance: cells are rounded to 0.1 mm, so a recomputed mean
// can differ from the printed one by exactly 0.1 in the worst case (and does,
// in one row). The epsilon keeps that legitimate boundary case inside.
constexpr double kTableTol = 0.1 + 1e-9;

ResultsMatrix load_matrix(const std::string& rel) {
  return ResultsMatrix::from_csv(ts::slurp(ts::fixture_path(rel)));
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), f, a, b, c);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. Main comparison table: recompute the printed per-row MPE from the error
//    cells with the default in-domain exclusions.
// ---------------------------------------------------------------------------
void criterion_1() {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string note;
  try {
    const ResultsMatrix m = load_matrix("main_table.csv");
    const InDomainMask mask = InDomainMask::default_mask().restricted_to(m);
    const std::vector<std::pair<std::string, double>> printed = {
        {"BEDLAM", 117.1},        {"UBody", 158.5}, {"EgoBody-EgoSet", 147.5},
        {"3DPW", 207.2},          {"EgoBody-MVSet", 142.1}};
    for (const auto& [name, want] : printed) {
      const double got = compute_mpe(m, name, mask);
      if (std::abs(got - want) > kTableTol) {
        ok = false;
        note += name + fmt(": %.3f vs printed %.1f; ", got, want);
      }
    }
    // The published AGORA-row mean matches neither the excluded nor the plain
    // column mean -- a known upstream table inconsistency, asserted as such.
    const double agora_masked = compute_mpe(m, "AGORA", mask);
    const double agora_plain = compute_mpe(m, "AGORA", InDomainMask{});
    const bool mismatch =
        std::abs(agora_masked - 145.4) > 0.1 && std::abs(agora_plain - 145.4) > 0.1;
    ok = ok && mismatch;
    const double dt = seconds_since(t0);
    ok = ok && dt < 1.0;
    note += fmt("five rows within 0.1 mm; AGORA printed 145.4 vs computed %.1f/%.1f "
                "(known upstream table inconsistency); %.2fs",
                agora_masked, agora_plain, dt);
  } catch (const std::exception& e) {
    ok = false;
    note = std::string("exception: ") + e.what();
  }
  report(1, "main-table MPE reproduction", ok, note);
}

// ---------------------------------------------------------------------------
// 2. Full 32-row ranking table: every printed MPE and the top-5 selection.
// ---------------------------------------------------------------------------
void criterion_2() {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string note;
  try {
    const ResultsMatrix m = load_matrix("ranking32.csv");
    const RankingTable table = rank_datasets(m, InDomainMask::default_mask().restricted_to(m));
    const std::map<std::string, double> printed = {
        {"BEDLAM", 124.7},        {"AGORA", 129.9},       {"GTA-Human", 135.1},
        {"SynBody", 138.6},       {"InstaVariety", 139.6}, {"MSCOCO", 139.7},
        {"SPEC", 150.0},          {"EgoBody-MVSet", 151.8}, {"MPII", 152.0},
        {"RICH", 155.7},          {"EgoBody-EgoSet", 157.1}, {"CrowdPose", 162.3},
        {"MuCo-3DHP", 163.4},     {"UBody", 166.6},       {"PROX", 167.3},
        {"MPI-INF-3DHP", 167.5},  {"PoseTrack", 177.0},   {"BEHAVE", 179.0},
        {"HumanSC3D", 184.8},     {"CHI3D", 192.3},       {"Human3.6M", 207.4},
        {"DNA-R-HiRes", 207.5},   {"ARCTIC", 222.5},      {"Talkshow", 225.3},
        {"UP3D", 226.0},          {"3DPW", 230.6},        {"DNA-Rendering", 253.2},
        {"MTP", 270.5},           {"FIT3D", 272.9},       {"OCHuman", 282.3},
        {"LSPET", 330.2},         {"SSP3D", 512.0}};
    ok = table.rows.size() == printed.size();
    int matched = 0;
    for (const auto& row : table.rows) {
      const auto it = printed.find(row.dataset);
      if (it == printed.end() || std::abs(row.mpe - it->second) > kTableTol) {
        ok = false;
        note += row.dataset + " off; ";
      } else {
        ++matched;
      }
    }
    const std::vector<std::string> expect_top = {"BEDLAM", "AGORA", "GTA-Human", "SynBody",
                                                 "InstaVariety"};
    ok = ok && select_top_n(table, 5) == expect_top;
    const double dt = seconds_since(t0);
    ok = ok && dt < 1.0;
    note += fmt("%.0f/32 printed MPEs within 0.1 mm; top-5 selection exact; %.2fs",
                static_cast<double>(matched), dt);
  } catch (const std::exception& e) {
    ok = false;
    note = std::string("exception: ") + e.what();
  }
  report(2, "ranking-table MPE + top-5 selection", ok, note);
}

// ---------------------------------------------------------------------------
// 3. Normalized-metric consistency: one F1 explains both published pairs.
// ---------------------------------------------------------------------------
void criterion_3() {
  bool ok = true;
  std::string note;
  try {
    const double f1 = 99.7 / 107.2;  // back-solved from the published MVE/NMVE pair
    ok = std::abs(f1 - 0.930) < 5e-4;
    const double implied_nmje = nmje(96.8, DetectionScore{f1});
    ok = ok && std::abs(implied_nmje - 104.1) <= 0.1;
    note = fmt("F1 = %.4f; implied NMJE %.2f vs published 104.1", f1, implied_nmje);
  } catch (const std::exception& e) {
    ok = false;
    note = std::string("exception: ") + e.what();
  }
  report(3, "detection-normalized metric consistency", ok, note);
}

// ---------------------------------------------------------------------------
// 4. Alignment oracle: exact recovery of known similarity transforms and a
//    guaranteed proper rotation on mirrored inputs.
// ---------------------------------------------------------------------------
void criterion_4() {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string note;
  try {
    Rng rng(20240401);
    double worst = 0.0;
    for (int trial = 0; trial < 1000 && ok; ++trial) {
      PointSet src(20, 3);
      for (int i = 0; i < src.rows(); ++i)
        for (int c = 0; c < 3; ++c) src(i, c) = rng.normal(0.0, 50.0);

      Eigen::Vector3d axis(rng.normal(0, 1), rng.normal(0, 1), rng.normal(0, 1));
      axis.normalize();
      const Eigen::Matrix3d rot = rodrigues(axis * (rng.uniform01() * 3.0));
      const double scale = 0.5 + 1.5 * rng.uniform01();
      Eigen::Vector3d t(rng.normal(0, 1), rng.normal(0, 1), rng.normal(0, 1));
      t = t.normalized() * (100.0 * rng.uniform01());

      PointSet dst = scale * (src * rot.transpose());
      dst.rowwise() += t.transpose();

      const SimilarityTransform st = umeyama_align(src, dst);
      if (st.rotation.determinant() < 0.5) ok = false;
      const double err = pa_error(src, dst);
      worst = std::max(worst, err);
      if (err >= 1e-6) ok = false;

      PointSet mirrored = src;
      mirrored.col(0) *= -1.0;
      if (umeyama_align(src, mirrored).rotation.determinant() < 0.5) ok = false;
    }
    const double dt = seconds_since(t0);
    ok = ok && dt < 5.0;
    note = fmt("1000 transforms recovered, worst residual %.2e mm; mirrored inputs keep "
               "det +1; %.2fs",
               worst, dt);
  } catch (const std::exception& e) {
    ok = false;
    note = std::string("exception: ") + e.what();
  }
  report(4, "similarity-alignment oracle", ok, note);
}

// ---------------------------------------------------------------------------
// 5. Body-model invariants over random configurations: rotation
//    orthonormality, rigid equivariance of the skinned surface, and exact
//    affinity in the shape coefficients.
// ---------------------------------------------------------------------------
void criterion_5() {
  bool ok = true;
  std::string note;
  try {
    Rng rng(77);
    double worst_ortho = 0.0, worst_equi = 0.0, worst_affine = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
      const int joints = 2 + static_cast<int>(rng.below(5));
      const int verts = 6 + static_cast<int>(rng.below(9));
      const BodyModelDef m =
          ts::random_toy_model(rng, joints, verts, /*with_correctives=*/trial % 2 == 0);
      const FullPose pose = ts::random_pose(rng, joints, 0.5);
      Eigen::VectorXd beta(m.shape_coeffs), psi(m.expr_coeffs);
      for (int k = 0; k < beta.size(); ++k) beta[k] = rng.normal(0.0, 1.0);
      for (int k = 0; k < psi.size(); ++k) psi[k] = rng.normal(0.0, 1.0);

      // (a) Rodrigues output is orthonormal with determinant +1.
      Eigen::Vector3d aa(rng.normal(0, 1), rng.normal(0, 1), rng.normal(0, 1));
      const Eigen::Matrix3d rot = rodrigues(aa);
      const double ortho = (rot.transpose() * rot - Eigen::Matrix3d::Identity())
                               .cwiseAbs()
                               .maxCoeff();
      worst_ortho = std::max(worst_ortho, std::max(ortho, std::abs(rot.determinant() - 1.0)));

      // (b) Rotating the root about the origin rotates the whole surface.
      Eigen::Vector3d raxis(rng.normal(0, 1), rng.normal(0, 1), rng.normal(0, 1));
      raxis.normalize();
      const Eigen::Matrix3d r0 = rodrigues(raxis * (rng.uniform01() * 3.0));
      FullPose rotated = pose;
      const Eigen::Vector3d root(pose.axis_angle(0, 0), pose.axis_angle(0, 1),
                                 pose.axis_angle(0, 2));
      const Eigen::Vector3d combined = rotation_log(r0 * rodrigues(root));
      for (int c = 0; c < 3; ++c) rotated.axis_angle(0, c) = combined[c];
      const Eigen::MatrixX3d base = skin(m, pose, beta, psi);
      const Eigen::MatrixX3d moved = skin(m, rotated, beta, psi);
      const double scale_ref = std::max(1.0, base.rowwise().norm().maxCoeff());
      const double equi =
          (moved - base * r0.transpose()).rowwise().norm().maxCoeff() / scale_ref;
      worst_equi = std::max(worst_equi, equi);

      // (c) skin() is affine in beta: second differences vanish.
      Eigen::VectorXd b2(m.shape_coeffs);
      for (int k = 0; k < b2.size(); ++k) b2[k] = rng.normal(0.0, 1.0);
      const Eigen::VectorXd zero = Eigen::VectorXd::Zero(m.shape_coeffs);
      const Eigen::MatrixX3d second_diff = skin(m, pose, beta + b2, psi) -
                                           skin(m, pose, beta, psi) -
                                           skin(m, pose, b2, psi) + skin(m, pose, zero, psi);
      const double affine = second_diff.cwiseAbs().maxCoeff() / scale_ref;
      worst_affine = std::max(worst_affine, affine);
    }
    ok = worst_ortho < 1e-10 && worst_equi < 1e-9 && worst_affine < 1e-9;
    note = fmt("200 configs: orthonormality %.1e, rigid equivariance %.1e, "
               "beta-affinity %.1e (limits 1e-10/1e-9/1e-9)",
               worst_ortho, worst_equi, worst_affine);
  } catch (const std::exception& e) {
    ok = false;
    note = std::string("exception: ") + e.what();
  }
  report(5, "body-model invariants", ok, note);
}

// ---------------------------------------------------------------------------
// 6. Adapter optimization on the constructed pair whose exact solution is
//    y = 2x, plus a full finite-difference audit of the parameter gradients
//    and the identical-model base case.
// ---------------------------------------------------------------------------
void criterion_6() {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string note;
  try {
    // (a) Fit on the halved-basis pair; basis displacements are ~1e-3 mm so
    // the 1e-3 mm bar demands a genuinely fitted coefficient map.
    const ts::AdapterToyPair pair = ts::adapter_toy_pair(7, /*basis_sigma=*/1e-3);
    AdapterTrainConfig cfg;
    cfg.hidden = {8};
    cfg.iterations = 2000;
    cfg.step = 60.0;
    cfg.batch = 32;
    cfg.tol = 5e-4;
    cfg.init_scale = 2.0;
    cfg.seed = 11;
    const AdapterFitResult fit = fit_adapter(pair.source, pair.target, cfg);
    const bool fit_ok = fit.best_holdout < 1e-3 && fit.iterations_run <= 2000 &&
                        fit.holdout_history.front() > 1e-3;  // started above the bar
    ok = ok && fit_ok;

    // (b) Analytic parameter gradients vs central finite differences.
    const ts::AdapterToyPair gpair = ts::adapter_toy_pair(3, /*basis_sigma=*/1.0);
    Rng grng(5);
    MlpAdapter mlp = MlpAdapter::he_init({2, 4, 2}, grng, 0.7);
    const GaussianPoseSampler sampler{0.3};
    struct Sample {
      BetaMap source, target;
      Eigen::VectorXd x;
    };
    std::vector<Sample> samples;
    for (int s = 0; s < 4; ++s) {
      const FullPose pose = sampler.sample(grng, gpair.source.joint_count());
      Sample smp;
      smp.source = build_beta_map(gpair.source, pose);
      smp.target = build_beta_map(gpair.target, pose);
      smp.x = Eigen::VectorXd(2);
      smp.x << grng.normal(0.0, 1.0), grng.normal(0.0, 1.0);
      samples.push_back(std::move(smp));
    }
    const auto batch_loss = [&](const MlpAdapter& a) {
      double sum = 0.0;
      for (const auto& s : samples)
        sum += adapter_pair_loss(s.source, s.target, s.x, a.forward(s.x));
      return sum / static_cast<double>(samples.size());
    };
    std::vector<Eigen::MatrixXd> gw;
    std::vector<Eigen::VectorXd> gb;
    for (int l = 0; l < mlp.layer_count(); ++l) {
      gw.emplace_back(Eigen::MatrixXd::Zero(mlp.weights[l].rows(), mlp.weights[l].cols()));
      gb.emplace_back(Eigen::VectorXd::Zero(mlp.biases[l].size()));
    }
    for (const auto& s : samples) {
      const Eigen::VectorXd y = mlp.forward(s.x);
      const Eigen::VectorXd gy = adapter_pair_grad(s.source, s.target, s.x, y);
      adapter_detail::accumulate_param_grads(mlp, s.x, gy, gw, gb);
    }
    const double inv_n = 1.0 / static_cast<double>(samples.size());
    const double h = 1e-5;
    double worst_rel = 0.0;
    const auto check_param = [&](double& slot, double analytic) {
      const double saved = slot;
      slot = saved + h;
      const double up = batch_loss(mlp);
      slot = saved - h;
      const double down = batch_loss(mlp);
      slot = saved;
      const double fd = (up - down) / (2.0 * h);
      const double rel =
          std::abs(analytic - fd) / std::max({std::abs(analytic), std::abs(fd), 1e-3});
      worst_rel = std::max(worst_rel, rel);
    };
    for (int l = 0; l < mlp.layer_count(); ++l) {
      for (int r = 0; r < mlp.weights[l].rows(); ++r)
        for (int c = 0; c < mlp.weights[l].cols(); ++c)
          check_param(mlp.weights[l](r, c), gw[l](r, c) * inv_n);
      for (int r = 0; r < mlp.biases[l].size(); ++r)
        check_param(mlp.biases[l][r], gb[l][r] * inv_n);
    }
    const bool grad_ok = worst_rel < 1e-5;
    ok = ok && grad_ok;

    // (c) Identical models with identity initialization: exact from step zero.
    AdapterTrainConfig icfg;
    icfg.hidden = {4};
    icfg.iterations = 10;
    icfg.holdout = 16;
    icfg.init_scale = 0.0;
    icfg.seed = 2;
    const AdapterFitResult ident = fit_adapter(pair.source, pair.source, icfg);
    ok = ok && ident.best_holdout < 1e-6;

    const double dt = seconds_since(t0);
    ok = ok && dt < 30.0;
    note = fmt("fit %.2e mm (start %.2e) ", fit.best_holdout, fit.holdout_history.front()) +
           fmt("in %.0f iters; ", static_cast<double>(fit.iterations_run)) +
           fmt("FD gradient mismatch %.1e; identical-model error %.1e; ", worst_rel,
               ident.best_holdout) +
           fmt("%.2fs. ", dt) +
           "Full-scale adapter benchmark requires licensed body-model assets; out of scope.";
  } catch (const std::exception& e) {
    ok = false;
    note = std::string("exception: ") + e.what();
  }
  report(6, "shape-adapter optimization", ok, note);
}

// ---------------------------------------------------------------------------
// 7. Sampling plans: pinned quota examples, the exact-sum property, and the
//    published concat-vs-balanced total pair.
// ---------------------------------------------------------------------------
void criterion_7() {
  bool ok = true;
  std::string note;
  try {
    std::vector<DatasetSpec> five;
    for (int i = 0; i < 5; ++i)
      five.push_back({"d" + std::to_string(i), 1'000'000, 0});
    const SamplingPlan balanced = plan_balanced(five, 750'000);
    for (const auto& e : balanced.entries) ok = ok && e.target_length == 150'000;

    std::vector<DatasetSpec> four;
    for (int i = 0; i < 4; ++i)
      four.push_back({"w" + std::to_string(i), 1'000'000, i + 1});
    const SamplingPlan weighted = plan_weighted(four, 100);
    const std::vector<std::uint64_t> want = {40, 30, 20, 10};
    for (std::size_t i = 0; i < four.size(); ++i)
      ok = ok && weighted.entries[i].target_length == want[i];

    Rng rng(99);
    for (int trial = 0; trial < 1000 && ok; ++trial) {
      const int n = 1 + static_cast<int>(rng.below(12));
      const std::uint64_t total = 1 + rng.below(1'000'000);
      std::vector<DatasetSpec> specs;
      std::vector<int> ranks;
      for (int i = 0; i < n; ++i) ranks.push_back(i + 1);
      for (int i = n - 1; i > 0; --i) std::swap(ranks[i], ranks[rng.below(i + 1)]);
      for (int i = 0; i < n; ++i)
        specs.push_back({"r" + std::to_string(i), 1 + rng.below(1'000'000), ranks[i]});
      std::uint64_t bsum = 0, wsum = 0;
      for (const auto& e : plan_balanced(specs, total).entries) bsum += e.target_length;
      for (const auto& e : plan_weighted(specs, total).entries) wsum += e.target_length;
      ok = ok && bsum == total && wsum == total;
    }

    const auto specs32 = load_dataset_specs(ts::fixture_path("specs32.json"));
    std::uint64_t concat_total = 0, balanced_total = 0;
    for (const auto& e : plan_concat(specs32).entries) concat_total += e.target_length;
    const SamplingPlan b32 = plan_balanced(specs32, 4'500'000);
    bool equal_quota = true;
    for (const auto& e : b32.entries) {
      balanced_total += e.target_length;
      equal_quota = equal_quota && e.target_length == 140'625;
    }
    ok = ok && concat_total == 5'600'000 && balanced_total == 4'500'000 && equal_quota;
    note = fmt("balanced 5x150000; weighted 40/30/20/10; 1000 random instances sum "
               "exactly; concat %.1fM vs balanced %.1fM",
               concat_total / 1e6, balanced_total / 1e6);
  } catch (const std::exception& e) {
    ok = false;
    note = std::string("exception: ") + e.what();
  }
  report(7, "sampling-plan arithmetic", ok, note);
}

// ---------------------------------------------------------------------------
// 8. Geometry contracts: patch-token bookkeeping and the bilinear ROI crop.
// ---------------------------------------------------------------------------
void criterion_8() {
  bool ok = true;
  std::string note;
  try {
    const TokenGrid g = token_grid(512, 384, 16);
    ok = g.grid_h == 32 && g.grid_w == 24 && g.patch == 16;

    // Full-box crop at native resolution is the identity map.
    FeatureGrid src = FeatureGrid::zeros(6, 5, 3);
    for (int y = 0; y < 6; ++y)
      for (int x = 0; x < 5; ++x)
        for (int c = 0; c < 3; ++c) src.at(y, x, c) = y * 31.0 + x * 7.0 + c * 0.5;
    const FeatureGrid same = roi_crop(src, NormalizedBox{}, 6, 5);
    double worst = 0.0;
    for (int y = 0; y < 6; ++y)
      for (int x = 0; x < 5; ++x)
        for (int c = 0; c < 3; ++c)
          worst = std::max(worst, std::abs(same.at(y, x, c) - src.at(y, x, c)));
    ok = ok && worst <= 1e-12;

    // Hand-worked 2x2 -> 4x4 bilinear upsample, exact in binary arithmetic.
    FeatureGrid small = FeatureGrid::zeros(2, 2, 1);
    small.at(0, 0, 0) = 1.0;
    small.at(0, 1, 0) = 2.0;
    small.at(1, 0, 0) = 3.0;
    small.at(1, 1, 0) = 4.0;
    const FeatureGrid up = roi_crop(small, NormalizedBox{}, 4, 4);
    const double expect[4][4] = {{1.0, 1.25, 1.75, 2.0},
                                 {1.5, 1.75, 2.25, 2.5},
                                 {2.5, 2.75, 3.25, 3.5},
                                 {3.0, 3.25, 3.75, 4.0}};
    bool exact = true;
    for (int y = 0; y < 4; ++y)
      for (int x = 0; x < 4; ++x) exact = exact && up.at(y, x, 0) == expect[y][x];
    ok = ok && exact;
    note = fmt("token grid 32x24; identity-crop residual %.1e; 4x4 bilinear exact", worst);
  } catch (const std::exception& e) {
    ok = false;
    note = std::string("exception: ") + e.what();
  }
  report(8, "geometry contracts", ok, note);
}

// ---------------------------------------------------------------------------
// 9. Container I/O: bit-exact round-trips plus the full malformed-fixture
//    corpus failing with its designated structured errors.
// ---------------------------------------------------------------------------
bool records_equal(const ArrayRecord& a, const ArrayRecord& b) {
  return a.dtype == b.dtype && a.shape == b.shape && a.data == b.data;
}

void criterion_9() {
  bool ok = true;
  std::string note;
  try {
    ts::TempDir tmp;

    // npy round-trips, including payloads with no shorter decimal form.
    std::vector<ArrayRecord> recs;
    recs.push_back(ArrayRecord::from_doubles({4}, {0.0, -0.0, 1e300, -1e-300}));
    recs.push_back(ArrayRecord::from_bytes({3}, {0, 127, 255}));
    recs.push_back(ArrayRecord::from_doubles({}, {2.5}));
    int rt = 0;
    for (const auto& rec : recs) {
      const std::string p = tmp.file("rt" + std::to_string(rt++) + ".npy");
      save_npy(p, rec);
      ok = ok && records_equal(load_npy(p), rec);
    }

    // The stored and deflated reference archives decode to identical payloads.
    const NpzArchive stored = load_npz(ts::fixture_path("cross_tool/stored.npz"));
    const NpzArchive deflated = load_npz(ts::fixture_path("cross_tool/compressed.npz"));
    ok = ok && stored.entries.size() == deflated.entries.size();
    for (std::size_t i = 0; ok && i < stored.entries.size(); ++i) {
      ok = stored.entries[i].first == deflated.entries[i].first &&
           records_equal(stored.entries[i].second, deflated.entries[i].second);
    }

    // HumanData: load -> save -> reload preserves every array bit-for-bit,
    // and the writer is deterministic.
    const HumanDataDoc doc = HumanDataDoc::load(ts::fixture_path("humandata/valid_smplx.npz"));
    doc.save(tmp.file("hd.npz"));
    doc.save(tmp.file("hd2.npz"));
    ok = ok && ts::slurp(tmp.file("hd.npz")) == ts::slurp(tmp.file("hd2.npz"));
    const HumanDataDoc back = HumanDataDoc::load(tmp.file("hd.npz"));
    ok = ok && back.arrays.entries.size() == doc.arrays.entries.size();
    for (const auto& [key, rec] : doc.arrays.entries)
      ok = ok && back.arrays.contains(key) && records_equal(back.arrays.at(key), rec);

    // COCO: structural round-trip through JSON and disk.
    const CocoAnnotationDoc coco = CocoAnnotationDoc::load(ts::fixture_path("coco/valid.json"));
    coco.save(tmp.file("coco.json"));
    const CocoAnnotationDoc coco_back = CocoAnnotationDoc::load(tmp.file("coco.json"));
    ok = ok && coco_back.to_json() == coco.to_json();

    // Malformed corpus: every fixture raises exactly its designated code.
    std::ifstream in(ts::fixture_path("manifest.json"));
    nlohmann::json manifest;
    in >> manifest;
    int checked = 0, misfired = 0;
    for (const auto& entry : manifest.at("entries")) {
      const std::string file = entry.at("file").get<std::string>();
      const std::string loader = entry.at("loader").get<std::string>();
      const std::string expected = entry.at("error").get<std::string>();
      std::string got = "(no error)";
      try {
        const std::string path = ts::fixture_path(file);
        if (loader == "npy") load_npy(path);
        else if (loader == "npz") load_npz(path);
        else if (loader == "humandata") HumanDataDoc::load(path);
        else if (loader == "coco") CocoAnnotationDoc::load(path);
        else got = "(unknown loader)";
      } catch (const Error& e) {
        got = errc_name(e.code());
      }
      ++checked;
      if (got != expected) {
        ++misfired;
        note += file + ": " + got + " != " + expected + "; ";
      }
    }
    ok = ok && checked >= 30 && misfired == 0;
    note += fmt("round-trips bit-exact; %.0f/%.0f malformed fixtures -> designated errors",
                static_cast<double>(checked - misfired), static_cast<double>(checked));
  } catch (const std::exception& e) {
    ok = false;
    note = std::string("exception: ") + e.what();
  }
  report(9, "container I/O round-trips + error corpus", ok, note);
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  if (g_failures > 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all 9 criteria passed\n");
  return 0;
}
