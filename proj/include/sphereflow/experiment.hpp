#ifndef SPHEREFLOW_EXPERIMENT_HPP
#define SPHEREFLOW_EXPERIMENT_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sphereflow/network.hpp"

namespace sphereflow {

// Synthetic two-class task: Gaussian random fields drawn from two power
// spectra, plus white pixel noise, classified patch by patch.
struct TaskConfig {
  int n_side = 16;
  int order = 2;  // patch subdivision order
  std::string spectrum_a;
  std::string spectrum_b;
  double noise_sigma = 0.0;
  std::size_t maps_per_class_train = 20;
  std::size_t maps_per_class_test = 10;
  int ell_max = 0;  // synthesis band; 0 means 2*n_side
  bool rotate_test = true;

  int synthesis_ell_max() const { return ell_max > 0 ? ell_max : 2 * n_side; }
  std::size_t patches_per_map() const { return std::size_t(12) * order * order; }
};

struct ModelConfig {
  HeadKind variant = HeadKind::FCN;
  std::vector<ConvLayerSpec> conv;
  std::size_t hidden = 64;  // CNN dense stack width (0 = single dense)
};

struct ExperimentConfig {
  TaskConfig task;
  ModelConfig model;
  TrainConfig training;
  std::uint64_t seed = 0;

  ModelSpec model_spec() const;  // resolves flatten size from the task
};

// Strict parse: unknown keys are rejected before any computation starts.
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::string& path);

// Writes train/test MapFiles (plus the rotated test variant), label CSVs and
// a JSON summary into out_dir. Byte-identical for a fixed seed.
void generate_dataset(const ExperimentConfig& cfg, const std::string& out_dir);

// Patch samples cut from the generated maps, with one graph pyramid per
// patch base.
Dataset load_patch_dataset(const ExperimentConfig& cfg, const std::string& dir,
                           const std::string& split,
                           LaplacianKind kind = LaplacianKind::NORMALIZED);

enum class FeatureKind { PSD, HIST };

struct BaselineReport {
  FeatureKind features;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  std::optional<double> test_rot_accuracy;
  int psd_ell_max = 0;  // band used by the PSD features
  std::string note;
};

// Logistic-regression baseline over per-patch features: PSD via a
// least-squares SHT on the patch support (band capped so the patch design
// stays well conditioned), or a 32-bin histogram over the train value range.
BaselineReport run_baseline(const ExperimentConfig& cfg, const std::string& dataset_dir,
                            FeatureKind kind);

struct TrainReport {
  std::vector<EpochMetrics> history;
  double test_accuracy = 0.0;
  std::optional<double> test_rot_accuracy;
};

// Trains the configured variant on the generated dataset; writes
// checkpoint.sphf and metrics.json into out_dir.
TrainReport run_training(const ExperimentConfig& cfg, const std::string& dataset_dir,
                         const std::string& out_dir);

struct EvalReport {
  double test_accuracy = 0.0;
  std::optional<double> test_rot_accuracy;
};

EvalReport run_evaluation(const ExperimentConfig& cfg, const std::string& dataset_dir,
                          const std::string& checkpoint_path);

std::string baseline_report_json(const BaselineReport& r);
std::string train_report_json(const ExperimentConfig& cfg, const TrainReport& r);
std::string eval_report_json(const EvalReport& r);

}  // namespace sphereflow

#endif  // SPHEREFLOW_EXPERIMENT_HPP
