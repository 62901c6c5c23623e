#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "sphereflow/equivariance.hpp"
#include "sphereflow/experiment.hpp"
#include "sphereflow/io.hpp"

using namespace sphereflow;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitValidation = 2;

struct CommonArgs {
  std::string config;
  std::string out = ".";
  std::uint64_t seed = 0;
  bool seed_set = false;
};

ExperimentConfig load_config(const CommonArgs& args) {
  ExperimentConfig cfg = load_experiment_config(args.config);
  if (args.seed_set) {
    cfg.seed = args.seed;
    cfg.training.seed = args.seed;
  }
  return cfg;
}

void ensure_out_dir(const std::string& out) {
  std::filesystem::create_directories(out);
}

int isqrt_floor(std::size_t v) {
  int r = 0;
  while (std::size_t(r + 1) * std::size_t(r + 1) <= v) ++r;
  return r;
}

// ---- analyze subcommands ----

void analyze_eigenvalues(int n_side, const std::string& kind, const std::string& out) {
  HealpixSampling s(n_side, Ordering::RING);
  LaplacianKind lk =
      kind == "combinatorial" ? LaplacianKind::COMBINATORIAL : LaplacianKind::NORMALIZED;
  SphereGraph g = build_healpix_graph(s, NeighborRule::healpix8(), kSigmaAuto, lk);
  SpectralBasis basis = eigendecompose(g);
  write_eigenvalues_csv(out + "/eigenvalues.csv", basis.eigenvalues);

  DegreeBlocks blocks = detect_degree_blocks(basis);
  json summary = {
      {"n_side", n_side},
      {"n_pix", s.n_pix()},
      {"laplacian", kind},
      {"lambda_min", basis.eigenvalues.front()},
      {"lambda_max", basis.eigenvalues.back()},
      {"detected_ell_max", blocks.ell_max},
  };
  if (!blocks.diagnostic.empty()) summary["diagnostic"] = blocks.diagnostic;
  write_text_file(out + "/eigenvalues_summary.json", summary.dump(2) + "\n");
  std::cout << "wrote " << out << "/eigenvalues.csv (" << basis.n() << " values), detected ell_max "
            << blocks.ell_max << "\n";
}

void analyze_alignment(int n_side, int lmax, bool row_normalize, const std::string& kind,
                       const std::string& out) {
  HealpixSampling s(n_side, Ordering::RING);
  LaplacianKind lk =
      kind == "combinatorial" ? LaplacianKind::COMBINATORIAL : LaplacianKind::NORMALIZED;
  SphereGraph g = build_healpix_graph(s, NeighborRule::healpix8(), kSigmaAuto, lk);
  SpectralBasis basis = eigendecompose(g);

  // The analysis band cannot exceed sqrt(n_pix)-1; clamp and report.
  int band_cap = isqrt_floor(std::size_t(s.n_pix())) - 1;
  int effective = std::min(lmax, band_cap);
  HarmonicBasis hb = eval_harmonics(s, effective);
  DegreeBlocks blocks = nominal_degree_blocks(basis.n(), effective);
  AlignmentMatrix am = alignment_matrix(basis, blocks, hb, row_normalize);

  // Emit the requested (lmax+1)^2 grid; entries beyond the computable band
  // stay zero.
  std::ostringstream csv;
  csv << "l_harmonic,l_group,value\n";
  for (int l = 0; l <= lmax; ++l) {
    for (int lg = 0; lg <= lmax; ++lg) {
      double v = (l <= effective && lg <= effective)
                     ? am.a(std::size_t(l), std::size_t(lg))
                     : 0.0;
      csv << l << "," << lg << "," << format_double(v) << "\n";
    }
  }
  write_text_file(out + "/alignment.csv", csv.str());

  json diag = json::array();
  for (int l = 0; l <= effective; ++l) diag.push_back(am.a(std::size_t(l), std::size_t(l)));
  json summary = {
      {"n_side", n_side},
      {"requested_lmax", lmax},
      {"effective_lmax", effective},
      {"laplacian", kind},
      {"row_normalized", row_normalize},
      {"diagonal", diag},
      {"diagonal_mean_l8", am.diagonal_mean(std::min(8, effective))},
  };
  write_text_file(out + "/alignment_summary.json", summary.dump(2) + "\n");
  std::cout << "wrote " << out << "/alignment.csv (" << (lmax + 1) << "x" << (lmax + 1)
            << " matrix, effective band " << effective << ")\n";
}

void analyze_equivariance(int n_side, int lmax, const std::vector<double>& angles, int trials,
                          const std::string& filter, double tau, std::uint64_t seed,
                          const std::string& out) {
  HealpixSampling s(n_side, Ordering::NESTED);
  SphereGraph g = build_healpix_graph(s);
  HarmonicBasis hb = eval_harmonics(s, lmax);

  ChebFilterBank bank(1, 1, 1);
  if (filter == "identity") {
    bank.theta[0] = 1.0;
  } else if (filter == "lowpass") {
    bank = ChebFilterBank::from_coeffs(
        chebyshev_fit([tau](double l) { return std::exp(-tau * l); }, 8, g.lambda_max()));
  } else {
    throw std::invalid_argument("analyze equivariance: filter must be identity or lowpass");
  }

  std::ostringstream csv;
  csv << "angle,error\n";
  json errors = json::array();
  for (double angle : angles) {
    double e = equivariance_error(g, bank, hb, angle, trials, seed);
    csv << format_double(angle) << "," << format_double(e) << "\n";
    errors.push_back({{"angle", angle}, {"error", e}});
  }
  write_text_file(out + "/equivariance.csv", csv.str());
  json summary = {
      {"n_side", n_side}, {"lmax", lmax},   {"filter", filter}, {"tau", tau},
      {"trials", trials}, {"seed", seed},   {"errors", errors},
  };
  write_text_file(out + "/equivariance_summary.json", summary.dump(2) + "\n");
  std::cout << "wrote " << out << "/equivariance.csv (" << angles.size() << " angles)\n";
}

void analyze_circle(int n, std::uint64_t seed, const std::string& out) {
  CircleDftReport rep = circle_dft_check(RingSampling(n), seed);
  json summary = {
      {"n", n},
      {"max_eigenvalue_error", rep.max_eigenvalue_error},
      {"max_subspace_residual", rep.max_subspace_residual},
      {"max_shift_residual", rep.max_shift_residual},
      {"passed", rep.passed()},
  };
  write_text_file(out + "/circle_summary.json", summary.dump(2) + "\n");
  std::cout << (rep.passed() ? "circle checks passed" : "circle checks FAILED") << " (n=" << n
            << ")\n";
  if (!rep.passed()) throw std::runtime_error("circle exactness checks failed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"graph-based spherical signal processing toolkit"};
  app.require_subcommand(1);

  CommonArgs common;

  auto add_common = [&](CLI::App* cmd, bool needs_config) {
    auto* copt = cmd->add_option("--config", common.config, "experiment config JSON");
    if (needs_config) copt->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", common.seed, "seed override")->each([&](const std::string&) {
      common.seed_set = true;
    });
    cmd->add_option("--out", common.out, "output directory");
  };

  // gen
  auto* gen = app.add_subcommand("gen", "generate a synthetic dataset");
  add_common(gen, true);

  // baseline
  auto* baseline = app.add_subcommand("baseline", "feature baselines over the dataset");
  add_common(baseline, true);
  std::string features = "PSD";
  std::string data_dir;
  baseline->add_option("--features", features, "PSD or HIST")
      ->check(CLI::IsMember({"PSD", "HIST"}));
  baseline->add_option("--data", data_dir, "dataset directory (default: --out)");

  // train
  auto* train_cmd = app.add_subcommand("train", "train the configured variant");
  add_common(train_cmd, true);
  std::string train_data;
  train_cmd->add_option("--data", train_data, "dataset directory (default: --out)");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
  add_common(eval_cmd, true);
  std::string eval_data;
  std::string checkpoint;
  eval_cmd->add_option("--data", eval_data, "dataset directory (default: --out)");
  eval_cmd->add_option("--checkpoint", checkpoint, "checkpoint path")->required();

  // analyze
  auto* analyze = app.add_subcommand("analyze", "harmonic/spectral analyses");
  analyze->require_subcommand(1);
  int a_nside = 4;
  int a_lmax = 8;
  int a_n = 8;
  int a_trials = 20;
  double a_tau = 4.0;
  std::string a_kind = "normalized";
  std::string a_filter = "lowpass";
  std::vector<double> a_angles;
  bool a_rownorm = false;
  std::string a_out = ".";
  std::uint64_t a_seed = 0;

  auto* ev = analyze->add_subcommand("eigenvalues", "Laplacian spectrum to CSV");
  ev->add_option("--nside", a_nside)->required();
  ev->add_option("--kind", a_kind)->check(CLI::IsMember({"normalized", "combinatorial"}));
  ev->add_option("--out", a_out);

  auto* al = analyze->add_subcommand("alignment", "subspace alignment matrix");
  al->add_option("--nside", a_nside)->required();
  al->add_option("--lmax", a_lmax)->required();
  al->add_flag("--row-normalize", a_rownorm);
  al->add_option("--kind", a_kind)->check(CLI::IsMember({"normalized", "combinatorial"}));
  al->add_option("--out", a_out);

  auto* eq = analyze->add_subcommand("equivariance", "rotation equivariance error");
  eq->add_option("--nside", a_nside)->required();
  eq->add_option("--lmax", a_lmax)->required();
  eq->add_option("--angles", a_angles, "rotation angles in radians")->expected(-1);
  eq->add_option("--trials", a_trials);
  eq->add_option("--filter", a_filter)->check(CLI::IsMember({"identity", "lowpass"}));
  eq->add_option("--tau", a_tau, "low-pass decay rate");
  eq->add_option("--seed", a_seed);
  eq->add_option("--out", a_out);

  auto* ci = analyze->add_subcommand("circle", "circle/DFT exactness checks");
  ci->add_option("--n", a_n)->required();
  ci->add_option("--seed", a_seed);
  ci->add_option("--out", a_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (gen->parsed()) {
      ExperimentConfig cfg = load_config(common);
      ensure_out_dir(common.out);
      generate_dataset(cfg, common.out);
      std::cout << "dataset written to " << common.out << "\n";
    } else if (baseline->parsed()) {
      ExperimentConfig cfg = load_config(common);
      ensure_out_dir(common.out);
      std::string dir = data_dir.empty() ? common.out : data_dir;
      FeatureKind kind = features == "PSD" ? FeatureKind::PSD : FeatureKind::HIST;
      BaselineReport rep = run_baseline(cfg, dir, kind);
      std::string name = features == "PSD" ? "baseline_psd.json" : "baseline_hist.json";
      write_text_file(common.out + "/" + name, baseline_report_json(rep));
      std::cout << features << " baseline: train " << rep.train_accuracy << ", test "
                << rep.test_accuracy;
      if (rep.test_rot_accuracy) std::cout << ", rotated test " << *rep.test_rot_accuracy;
      std::cout << "\n";
    } else if (train_cmd->parsed()) {
      ExperimentConfig cfg = load_config(common);
      ensure_out_dir(common.out);
      std::string dir = train_data.empty() ? common.out : train_data;
      TrainReport rep = run_training(cfg, dir, common.out);
      std::cout << "final test accuracy " << rep.test_accuracy;
      if (rep.test_rot_accuracy) std::cout << ", rotated " << *rep.test_rot_accuracy;
      std::cout << "\n";
    } else if (eval_cmd->parsed()) {
      ExperimentConfig cfg = load_config(common);
      ensure_out_dir(common.out);
      std::string dir = eval_data.empty() ? common.out : eval_data;
      EvalReport rep = run_evaluation(cfg, dir, checkpoint);
      write_text_file(common.out + "/eval.json", eval_report_json(rep));
      std::cout << "test accuracy " << rep.test_accuracy;
      if (rep.test_rot_accuracy) std::cout << ", rotated " << *rep.test_rot_accuracy;
      std::cout << "\n";
    } else if (analyze->parsed()) {
      ensure_out_dir(a_out);
      if (ev->parsed()) {
        analyze_eigenvalues(a_nside, a_kind, a_out);
      } else if (al->parsed()) {
        analyze_alignment(a_nside, a_lmax, a_rownorm, a_kind, a_out);
      } else if (eq->parsed()) {
        if (a_angles.empty()) a_angles = {kPi / 5.0};
        analyze_equivariance(a_nside, a_lmax, a_angles, a_trials, a_filter, a_tau, a_seed, a_out);
      } else if (ci->parsed()) {
        analyze_circle(a_n, a_seed, a_out);
      }
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
