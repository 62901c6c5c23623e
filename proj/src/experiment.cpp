#include "sphereflow/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "sphereflow/harmonics.hpp"
#include "sphereflow/io.hpp"

namespace sphereflow {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw std::invalid_argument("config: " + where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) {
      throw std::invalid_argument("config: unknown key '" + key + "' in " + where);
    }
  }
}

PoolMode pool_from_config(const std::string& s) {
  if (s == "AVG4") return PoolMode::AVG4;
  if (s == "MAX4") return PoolMode::MAX4;
  if (s == "NONE") return PoolMode::NONE;
  throw std::invalid_argument("config: unknown pool mode '" + s + "'");
}

}  // namespace

ModelSpec ExperimentConfig::model_spec() const {
  ModelSpec spec;
  spec.f_in = 1;
  spec.conv = model.conv;
  spec.head = model.variant;
  spec.hidden = model.variant == HeadKind::CNN ? model.hidden : 0;
  spec.n_classes = 2;
  if (model.variant == HeadKind::CNN) {
    std::size_t n = std::size_t(12) * task.n_side * task.n_side;
    if (task.order > 0) n /= task.patches_per_map();
    for (const auto& l : model.conv) {
      if (l.pool != PoolMode::NONE) n /= 4;
    }
    spec.cnn_input_vertices = n;
  }
  return spec;
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  json root = json::parse(json_text);
  check_keys(root, {"task", "model", "training", "seed"}, "top level");

  ExperimentConfig cfg;
  const json& jt = root.at("task");
  check_keys(jt,
             {"n_side", "order", "class_spectra", "noise_sigma", "maps_per_class_train",
              "maps_per_class_test", "ell_max", "rotate_test"},
             "task");
  cfg.task.n_side = jt.at("n_side").get<int>();
  if (cfg.task.n_side < 1 || cfg.task.n_side > 256 || (cfg.task.n_side & (cfg.task.n_side - 1))) {
    throw std::invalid_argument("config: task.n_side must be a power of two in [1, 256]");
  }
  cfg.task.order = jt.at("order").get<int>();
  if (cfg.task.order < 1 || (cfg.task.order & (cfg.task.order - 1)) ||
      cfg.task.order > cfg.task.n_side) {
    throw std::invalid_argument("config: task.order must be a power of two <= n_side");
  }
  const json& spectra = jt.at("class_spectra");
  if (!spectra.is_array() || spectra.size() != 2) {
    throw std::invalid_argument("config: task.class_spectra must list exactly two CSV paths");
  }
  cfg.task.spectrum_a = spectra[0].get<std::string>();
  cfg.task.spectrum_b = spectra[1].get<std::string>();
  cfg.task.noise_sigma = jt.at("noise_sigma").get<double>();
  if (cfg.task.noise_sigma < 0.0) throw std::invalid_argument("config: noise_sigma must be >= 0");
  cfg.task.maps_per_class_train = jt.at("maps_per_class_train").get<std::size_t>();
  cfg.task.maps_per_class_test = jt.at("maps_per_class_test").get<std::size_t>();
  if (cfg.task.maps_per_class_train == 0 || cfg.task.maps_per_class_test == 0) {
    throw std::invalid_argument("config: maps per class must be >= 1");
  }
  cfg.task.ell_max = jt.value("ell_max", 0);
  cfg.task.rotate_test = jt.value("rotate_test", true);
  if (jt.contains("ell_max")) {
    int lm = cfg.task.synthesis_ell_max();
    std::size_t npix = std::size_t(12) * cfg.task.n_side * cfg.task.n_side;
    if (std::size_t(lm + 1) * std::size_t(lm + 1) > npix) {
      throw std::invalid_argument("config: task.ell_max too large for n_side");
    }
  }

  const json& jm = root.at("model");
  check_keys(jm, {"variant", "conv", "hidden"}, "model");
  std::string variant = jm.at("variant").get<std::string>();
  if (variant == "FCN") {
    cfg.model.variant = HeadKind::FCN;
  } else if (variant == "CNN") {
    cfg.model.variant = HeadKind::CNN;
  } else {
    throw std::invalid_argument("config: model.variant must be FCN or CNN");
  }
  const json& jconv = jm.at("conv");
  if (!jconv.is_array() || jconv.empty()) {
    throw std::invalid_argument("config: model.conv must be a non-empty array");
  }
  for (const auto& jl : jconv) {
    check_keys(jl, {"K", "channels", "pool"}, "model.conv[]");
    ConvLayerSpec l;
    l.order = jl.at("K").get<int>();
    l.f_out = jl.at("channels").get<std::size_t>();
    l.act = Activation::RELU;
    l.pool = pool_from_config(jl.value("pool", "NONE"));
    if (l.order < 1 || l.f_out == 0) throw std::invalid_argument("config: bad conv layer");
    cfg.model.conv.push_back(l);
  }
  cfg.model.hidden = jm.value("hidden", 64);

  const json& jtr = root.at("training");
  check_keys(jtr, {"lr", "batch", "epochs"}, "training");
  cfg.training.lr = jtr.at("lr").get<double>();
  cfg.training.batch = jtr.at("batch").get<std::size_t>();
  cfg.training.epochs = jtr.at("epochs").get<std::size_t>();
  if (cfg.training.lr <= 0.0 || cfg.training.batch == 0) {
    throw std::invalid_argument("config: training.lr must be > 0 and batch >= 1");
  }

  cfg.seed = root.at("seed").get<std::uint64_t>();
  cfg.training.seed = cfg.seed;

  // Pool depth must leave at least one vertex per patch.
  std::size_t n = std::size_t(12) * cfg.task.n_side * cfg.task.n_side / cfg.task.patches_per_map();
  for (const auto& l : cfg.model.conv) {
    if (l.pool != PoolMode::NONE) {
      if (n % 4 != 0) throw std::invalid_argument("config: too many pooling layers for the patch size");
      n /= 4;
    }
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  return parse_experiment_config(read_text_file(path));
}

namespace {

struct SplitPlan {
  std::string map_name;
  std::size_t maps_per_class;
  std::uint64_t tag;
  bool rotated_variant;  // also emit a z-rotated copy
};

std::vector<double> load_spectrum_for(const TaskConfig& task, const std::string& path) {
  std::vector<double> c = read_spectrum_csv(path);
  for (double v : c) {
    if (v < 0.0) throw std::invalid_argument("spectrum has negative entries: " + path);
  }
  if (c.empty()) throw std::invalid_argument("spectrum is empty: " + path);
  return c;
}

}  // namespace

void generate_dataset(const ExperimentConfig& cfg, const std::string& out_dir) {
  const TaskConfig& task = cfg.task;
  std::vector<std::vector<double>> spectra = {
      load_spectrum_for(task, task.spectrum_a),
      load_spectrum_for(task, task.spectrum_b),
  };
  if (spectra[0].size() != spectra[1].size()) {
    throw std::invalid_argument("class spectra have different lengths");
  }

  HealpixSampling sampling(task.n_side, Ordering::NESTED);
  const int lmax = task.synthesis_ell_max();
  HarmonicBasis basis = eval_harmonics(sampling, lmax);
  const std::size_t npix = std::size_t(sampling.n_pix());

  Rng base(cfg.seed);
  std::vector<SplitPlan> splits = {
      {"train", task.maps_per_class_train, 1, false},
      {"test", task.maps_per_class_test, 2, task.rotate_test},
  };

  for (const auto& split : splits) {
    const std::size_t n_maps = 2 * split.maps_per_class;
    MapFile plain;
    plain.n_side = task.n_side;
    plain.ordering = Ordering::NESTED;
    plain.n_channels = 1;
    plain.n_maps = n_maps;
    plain.payload.assign(n_maps * npix, 0.0);
    MapFile rotated = plain;

    std::vector<int> labels(n_maps, 0);
    Rng split_rng = base.fork(split.tag);

    struct MapJob {
      std::uint64_t alm_seed;
      std::uint64_t noise_seed;
      double angle;
    };
    std::vector<MapJob> jobs(n_maps);
    for (std::size_t cls = 0; cls < 2; ++cls) {
      for (std::size_t m = 0; m < split.maps_per_class; ++m) {
        std::size_t idx = cls * split.maps_per_class + m;
        Rng map_rng = split_rng.fork(cls * 1000003ULL + m);
        jobs[idx].alm_seed = map_rng.next_u64();
        jobs[idx].noise_seed = map_rng.next_u64();
        jobs[idx].angle = map_rng.uniform() * kTwoPi;
        labels[idx] = int(cls);
      }
    }

    parallel_for(n_maps, [&](std::size_t idx) {
      const auto& job = jobs[idx];
      const auto& spectrum = spectra[std::size_t(labels[idx])];
      Alm alm = grf_alm(lmax, spectrum, job.alm_seed);
      std::vector<double> map = basis.synthesis(alm);

      std::vector<double> noise(npix, 0.0);
      if (task.noise_sigma > 0.0) {
        Rng noise_rng(job.noise_seed);
        for (double& v : noise) v = task.noise_sigma * noise_rng.normal();
      }
      double* dst = plain.map_channel(idx, 0);
      for (std::size_t i = 0; i < npix; ++i) dst[i] = map[i] + noise[i];

      if (split.rotated_variant) {
        // Nearest-pixel z-rotation of the finished (noisy) map, as one would
        // rotate observed data. On iso-latitude rings this is a per-ring
        // cyclic shift, so each map's pixel multiset is preserved exactly.
        double* rdst = rotated.map_channel(idx, 0);
        for (std::size_t p = 0; p < npix; ++p) {
          SphereCoord c = sampling.pix2ang(std::int64_t(p));
          std::int64_t src = sampling.ang2pix(c.theta, c.phi - job.angle);
          rdst[p] = dst[std::size_t(src)];
        }
      }
    });

    write_mapfile(out_dir + "/" + split.map_name + ".smap", plain);
    write_labels_csv(out_dir + "/" + split.map_name + "_labels.csv", labels);
    if (split.rotated_variant) {
      write_mapfile(out_dir + "/" + split.map_name + "_rot.smap", rotated);
    }
  }

  json summary = {
      {"n_side", task.n_side},
      {"order", task.order},
      {"ell_max", lmax},
      {"noise_sigma", task.noise_sigma},
      {"maps_per_class_train", task.maps_per_class_train},
      {"maps_per_class_test", task.maps_per_class_test},
      {"rotate_test", task.rotate_test},
      {"seed", cfg.seed},
      {"patches_per_map", task.patches_per_map()},
  };
  write_text_file(out_dir + "/gen_summary.json", summary.dump(2) + "\n");
}

Dataset load_patch_dataset(const ExperimentConfig& cfg, const std::string& dir,
                           const std::string& split, LaplacianKind kind) {
  MapFile f = read_mapfile(dir + "/" + split + ".smap");
  std::string labels_name = split == "test_rot" ? "test" : split;
  std::vector<int> map_labels = read_labels_csv(dir + "/" + labels_name + "_labels.csv");
  if (map_labels.size() != f.n_maps) {
    throw std::runtime_error("load_patch_dataset: labels do not match map count");
  }
  if (f.ordering != Ordering::NESTED) {
    throw std::runtime_error("load_patch_dataset: maps must be NESTED for patch extraction");
  }
  if (f.n_side != cfg.task.n_side) {
    throw std::runtime_error("load_patch_dataset: map resolution does not match the config");
  }

  const std::size_t n_patches = cfg.task.patches_per_map();
  const std::size_t patch_len = f.n_pix() / n_patches;
  ModelSpec spec = cfg.model_spec();

  Dataset ds;
  ds.pyramids.reserve(n_patches);
  for (std::size_t b = 0; b < n_patches; ++b) {
    ds.pyramids.push_back(
        build_graph_pyramid(spec, cfg.task.n_side, cfg.task.order, int(b), kind));
  }

  ds.samples.reserve(f.n_maps * n_patches);
  ds.labels.reserve(f.n_maps * n_patches);
  ds.pyramid_of.reserve(f.n_maps * n_patches);
  for (std::size_t m = 0; m < f.n_maps; ++m) {
    const double* map = f.map_channel(m, 0);
    for (std::size_t b = 0; b < n_patches; ++b) {
      MapSignal sig(patch_len, 1);
      std::copy(map + b * patch_len, map + (b + 1) * patch_len, sig.values.begin());
      ds.samples.push_back(std::move(sig));
      ds.labels.push_back(map_labels[m]);
      ds.pyramid_of.push_back(b);
    }
  }
  return ds;
}

namespace {

// ----- feature extraction -----

struct FeatureSet {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
};

struct PatchValues {
  std::vector<std::vector<double>> patches;  // per sample, raw pixel values
  std::vector<int> labels;
  std::size_t n_patch_bases = 0;
  std::vector<std::size_t> base_of;
};

PatchValues read_patches(const ExperimentConfig& cfg, const std::string& dir,
                         const std::string& split) {
  MapFile f = read_mapfile(dir + "/" + split + ".smap");
  std::string labels_name = split == "test_rot" ? "test" : split;
  std::vector<int> map_labels = read_labels_csv(dir + "/" + labels_name + "_labels.csv");
  const std::size_t n_patches = cfg.task.patches_per_map();
  const std::size_t patch_len = f.n_pix() / n_patches;

  PatchValues out;
  out.n_patch_bases = n_patches;
  for (std::size_t m = 0; m < f.n_maps; ++m) {
    const double* map = f.map_channel(m, 0);
    for (std::size_t b = 0; b < n_patches; ++b) {
      out.patches.emplace_back(map + b * patch_len, map + (b + 1) * patch_len);
      out.labels.push_back(map_labels[m]);
      out.base_of.push_back(b);
    }
  }
  return out;
}

// Per-patch PSD estimation. The least-squares fit onto the patch-restricted
// harmonics is computed through a degree-ordered orthonormalization of the
// design matrix; per-degree power is read off the orthonormal factor, so
// ill-conditioned directions cannot amplify the estimate. Columns whose
// residual after orthogonalization falls below 1e-6 of the largest (a 1e6
// conditioning floor) are dropped from the attribution.
struct PatchPsdBasis {
  Matrix q;  // n x (lm+1)^2, orthonormal columns (zeroed where dropped)
  int lmax;
};

PatchPsdBasis build_patch_psd_basis(const HealpixSampling& s, int order, int base, int lm) {
  PatchSampling patch(s, order, base);
  const std::size_t n = std::size_t(patch.size());
  const std::size_t m = std::size_t(lm + 1) * std::size_t(lm + 1);
  Matrix q(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    SphereCoord c = s.pix2ang(patch.global_index(std::int64_t(i)));
    std::vector<double> row = harmonic_row(c.theta, c.phi, lm);
    for (std::size_t j = 0; j < m; ++j) q(i, j) = row[j];
  }
  // Modified Gram-Schmidt with a retention floor.
  double max_norm = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t prev = 0; prev < k; ++prev) {
      double dot = 0.0;
      for (std::size_t i = 0; i < n; ++i) dot += q(i, prev) * q(i, k);
      for (std::size_t i = 0; i < n; ++i) q(i, k) -= dot * q(i, prev);
    }
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) norm += q(i, k) * q(i, k);
    norm = std::sqrt(norm);
    max_norm = std::max(max_norm, norm);
    if (norm <= 1e-6 * max_norm) {
      for (std::size_t i = 0; i < n; ++i) q(i, k) = 0.0;
    } else {
      for (std::size_t i = 0; i < n; ++i) q(i, k) /= norm;
    }
  }
  return {std::move(q), lm};
}

int patch_band_cap(const ExperimentConfig& cfg) {
  std::size_t patch_len =
      std::size_t(12) * cfg.task.n_side * cfg.task.n_side / cfg.task.patches_per_map();
  int cap = 0;
  while (std::size_t(cap + 2) * std::size_t(cap + 2) <= patch_len) ++cap;
  return cap;
}

FeatureSet psd_features(const ExperimentConfig& cfg, const PatchValues& pv, int lm) {
  HealpixSampling s(cfg.task.n_side, Ordering::NESTED);
  std::vector<PatchPsdBasis> bases;
  bases.reserve(pv.n_patch_bases);
  for (std::size_t b = 0; b < pv.n_patch_bases; ++b) {
    bases.push_back(build_patch_psd_basis(s, cfg.task.order, int(b), lm));
  }

  FeatureSet fs;
  fs.labels = pv.labels;
  fs.rows.resize(pv.patches.size());
  parallel_for(pv.patches.size(), [&](std::size_t i) {
    const PatchPsdBasis& pb = bases[pv.base_of[i]];
    std::vector<double> coeffs(pb.q.cols(), 0.0);
    pb.q.matvec_transposed(pv.patches[i].data(), coeffs.data());
    std::vector<double> c(std::size_t(lm) + 1, 0.0);
    for (int l = 0; l <= lm; ++l) {
      double acc = 0.0;
      for (int mm = -l; mm <= l; ++mm) {
        double v = coeffs[Alm::index(l, mm)];
        acc += v * v;
      }
      c[std::size_t(l)] = acc / (2.0 * l + 1.0);
    }
    // Log power: the spectra of interest differ multiplicatively.
    for (double& v : c) v = std::log(v + 1e-30);
    fs.rows[i] = std::move(c);
  });
  return fs;
}

FeatureSet hist_features(const PatchValues& pv, double lo, double hi) {
  constexpr int kBins = 32;
  FeatureSet fs;
  fs.labels = pv.labels;
  fs.rows.resize(pv.patches.size());
  double width = hi > lo ? (hi - lo) : 1.0;
  parallel_for(pv.patches.size(), [&](std::size_t i) {
    std::vector<double> h(kBins, 0.0);
    for (double v : pv.patches[i]) {
      int bin = int(std::floor((v - lo) / width * kBins));
      bin = std::clamp(bin, 0, kBins - 1);
      h[std::size_t(bin)] += 1.0;
    }
    for (double& v : h) v /= double(pv.patches[i].size());
    fs.rows[i] = std::move(h);
  });
  return fs;
}

// ----- L2-regularized logistic regression (Newton iterations) -----

struct Standardizer {
  std::vector<double> mean, scale;

  void fit(const std::vector<std::vector<double>>& rows) {
    std::size_t d = rows.front().size();
    mean.assign(d, 0.0);
    scale.assign(d, 1.0);
    for (const auto& r : rows) {
      for (std::size_t j = 0; j < d; ++j) mean[j] += r[j];
    }
    for (double& v : mean) v /= double(rows.size());
    std::vector<double> var(d, 0.0);
    for (const auto& r : rows) {
      for (std::size_t j = 0; j < d; ++j) {
        double dlt = r[j] - mean[j];
        var[j] += dlt * dlt;
      }
    }
    for (std::size_t j = 0; j < d; ++j) {
      double sd = std::sqrt(var[j] / double(rows.size()));
      scale[j] = sd > 1e-12 ? 1.0 / sd : 0.0;  // constant feature drops out
    }
  }
  std::vector<double> apply(const std::vector<double>& r) const {
    std::vector<double> out(r.size());
    for (std::size_t j = 0; j < r.size(); ++j) out[j] = (r[j] - mean[j]) * scale[j];
    return out;
  }
};

struct Logistic {
  std::vector<double> w;  // last entry is the intercept
  Standardizer std_;

  static double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

  double decision(const std::vector<double>& raw) const {
    std::vector<double> x = std_.apply(raw);
    double z = w.back();
    for (std::size_t j = 0; j < x.size(); ++j) z += w[j] * x[j];
    return z;
  }

  void fit(const FeatureSet& fs, double l2 = 1e-3) {
    std_.fit(fs.rows);
    const std::size_t n = fs.rows.size();
    const std::size_t d = fs.rows.front().size();
    std::vector<std::vector<double>> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = std_.apply(fs.rows[i]);
    w.assign(d + 1, 0.0);

    for (int iter = 0; iter < 100; ++iter) {
      std::vector<double> grad(d + 1, 0.0);
      Matrix hess(d + 1, d + 1);
      for (std::size_t i = 0; i < n; ++i) {
        double z = w[d];
        for (std::size_t j = 0; j < d; ++j) z += w[j] * x[i][j];
        double p = sigmoid(z);
        double r = p - double(fs.labels[i]);
        double wgt = std::max(p * (1.0 - p), 1e-6);
        for (std::size_t j = 0; j < d; ++j) grad[j] += r * x[i][j];
        grad[d] += r;
        for (std::size_t j = 0; j <= d; ++j) {
          double xj = j < d ? x[i][j] : 1.0;
          for (std::size_t k = j; k <= d; ++k) {
            double xk = k < d ? x[i][k] : 1.0;
            hess(j, k) += wgt * xj * xk;
          }
        }
      }
      double inv_n = 1.0 / double(n);
      for (std::size_t j = 0; j <= d; ++j) grad[j] *= inv_n;
      for (std::size_t j = 0; j <= d; ++j) {
        for (std::size_t k = j; k <= d; ++k) {
          hess(j, k) *= inv_n;
          hess(k, j) = hess(j, k);
        }
      }
      for (std::size_t j = 0; j < d; ++j) {  // no penalty on the intercept
        grad[j] += 2.0 * l2 * w[j];
        hess(j, j) += 2.0 * l2;
      }
      hess(d, d) += 1e-9;

      QrFactor qr(hess);
      std::vector<double> delta(d + 1, 0.0);
      qr.solve(grad.data(), delta.data());
      double step_norm = 0.0;
      for (std::size_t j = 0; j <= d; ++j) {
        w[j] -= delta[j];
        step_norm = std::max(step_norm, std::fabs(delta[j]));
      }
      if (step_norm < 1e-9) break;
    }
  }

  double accuracy(const FeatureSet& fs) const {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < fs.rows.size(); ++i) {
      int pred = decision(fs.rows[i]) > 0.0 ? 1 : 0;
      if (pred == fs.labels[i]) ++correct;
    }
    return double(correct) / double(fs.rows.size());
  }
};

bool all_rows_identical(const FeatureSet& fs) {
  for (std::size_t i = 1; i < fs.rows.size(); ++i) {
    if (fs.rows[i] != fs.rows[0]) return false;
  }
  return true;
}

}  // namespace

BaselineReport run_baseline(const ExperimentConfig& cfg, const std::string& dataset_dir,
                            FeatureKind kind) {
  PatchValues train_pv = read_patches(cfg, dataset_dir, "train");
  PatchValues test_pv = read_patches(cfg, dataset_dir, "test");

  BaselineReport rep;
  rep.features = kind;
  rep.note = "classifier: L2-regularized logistic regression (Newton), trained to convergence";

  FeatureSet train_fs, test_fs;
  std::optional<FeatureSet> rot_fs;
  if (kind == FeatureKind::PSD) {
    rep.psd_ell_max = patch_band_cap(cfg);
    train_fs = psd_features(cfg, train_pv, rep.psd_ell_max);
    test_fs = psd_features(cfg, test_pv, rep.psd_ell_max);
    if (cfg.task.rotate_test) {
      PatchValues rot_pv = read_patches(cfg, dataset_dir, "test_rot");
      rot_fs = psd_features(cfg, rot_pv, rep.psd_ell_max);
    }
  } else {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& p : train_pv.patches) {
      for (double v : p) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
    train_fs = hist_features(train_pv, lo, hi);
    test_fs = hist_features(test_pv, lo, hi);
    if (cfg.task.rotate_test) {
      PatchValues rot_pv = read_patches(cfg, dataset_dir, "test_rot");
      rot_fs = hist_features(rot_pv, lo, hi);
    }
  }

  if (all_rows_identical(train_fs)) {
    throw std::runtime_error("baseline: degenerate features (all rows identical)");
  }

  Logistic clf;
  clf.fit(train_fs);
  rep.train_accuracy = clf.accuracy(train_fs);
  rep.test_accuracy = clf.accuracy(test_fs);
  if (rot_fs) rep.test_rot_accuracy = clf.accuracy(*rot_fs);
  return rep;
}

TrainReport run_training(const ExperimentConfig& cfg, const std::string& dataset_dir,
                         const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  Dataset train_ds = load_patch_dataset(cfg, dataset_dir, "train");
  Dataset test_ds = load_patch_dataset(cfg, dataset_dir, "test");

  Model model(cfg.model_spec(), cfg.seed);
  TrainReport rep;
  rep.history = train(model, train_ds, &test_ds, cfg.training);
  rep.test_accuracy = evaluate_accuracy(model, test_ds);
  if (cfg.task.rotate_test) {
    Dataset rot_ds = load_patch_dataset(cfg, dataset_dir, "test_rot");
    rep.test_rot_accuracy = evaluate_accuracy(model, rot_ds);
  }

  save_checkpoint(model, out_dir + "/checkpoint.sphf");
  write_text_file(out_dir + "/metrics.json", train_report_json(cfg, rep));
  return rep;
}

EvalReport run_evaluation(const ExperimentConfig& cfg, const std::string& dataset_dir,
                          const std::string& checkpoint_path) {
  Model model = load_checkpoint(checkpoint_path);
  Dataset test_ds = load_patch_dataset(cfg, dataset_dir, "test");
  EvalReport rep;
  rep.test_accuracy = evaluate_accuracy(model, test_ds);
  if (cfg.task.rotate_test) {
    Dataset rot_ds = load_patch_dataset(cfg, dataset_dir, "test_rot");
    rep.test_rot_accuracy = evaluate_accuracy(model, rot_ds);
  }
  return rep;
}

std::string baseline_report_json(const BaselineReport& r) {
  json j = {
      {"features", r.features == FeatureKind::PSD ? "PSD" : "HIST"},
      {"train_accuracy", r.train_accuracy},
      {"test_accuracy", r.test_accuracy},
      {"note", r.note},
  };
  if (r.features == FeatureKind::PSD) j["psd_ell_max"] = r.psd_ell_max;
  if (r.test_rot_accuracy) j["test_rot_accuracy"] = *r.test_rot_accuracy;
  return j.dump(2) + "\n";
}

std::string train_report_json(const ExperimentConfig& cfg, const TrainReport& r) {
  json epochs = json::array();
  for (const auto& m : r.history) {
    epochs.push_back({{"train_loss", m.train_loss},
                      {"train_accuracy", m.train_accuracy},
                      {"val_accuracy", m.val_accuracy}});
  }
  json j = {
      {"variant", cfg.model.variant == HeadKind::FCN ? "FCN" : "CNN"},
      {"epochs", epochs},
      {"test_accuracy", r.test_accuracy},
      {"seed", cfg.seed},
  };
  if (r.test_rot_accuracy) j["test_rot_accuracy"] = *r.test_rot_accuracy;
  return j.dump(2) + "\n";
}

std::string eval_report_json(const EvalReport& r) {
  json j = {{"test_accuracy", r.test_accuracy}};
  if (r.test_rot_accuracy) j["test_rot_accuracy"] = *r.test_rot_accuracy;
  return j.dump(2) + "\n";
}

}  // namespace sphereflow
