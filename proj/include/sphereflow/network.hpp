#ifndef SPHEREFLOW_NETWORK_HPP
#define SPHEREFLOW_NETWORK_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "sphereflow/cheb.hpp"
#include "sphereflow/graph.hpp"

namespace sphereflow {

enum class Activation { NONE, RELU };
enum class PoolMode { NONE, AVG4, MAX4 };
enum class HeadKind { FCN, CNN };

struct ConvLayerSpec {
  int order = 5;  // Chebyshev K
  std::size_t f_out = 16;
  Activation act = Activation::RELU;
  PoolMode pool = PoolMode::NONE;
};

// Architecture description. The FCN head (global average pooling + dense)
// accepts inputs of any vertex count; the CNN head (flatten + dense stack)
// is tied to cnn_input_vertices.
struct ModelSpec {
  std::size_t f_in = 1;
  std::vector<ConvLayerSpec> conv;
  HeadKind head = HeadKind::FCN;
  std::size_t cnn_input_vertices = 0;  // vertex count reaching the flatten (CNN only)
  std::size_t hidden = 0;              // optional hidden dense width (CNN stack)
  std::size_t n_classes = 2;

  std::size_t pool_count() const;
  void validate() const;
};

// Graphs consumed by successive conv layers; levels[i+1] has a quarter of the
// vertices of levels[i] whenever layer i pools.
struct GraphPyramid {
  std::vector<SphereGraph> levels;
};

// patch_order == 0 builds full-sphere graphs; otherwise the pyramid covers
// NESTED patch base_index at subdivision order patch_order.
GraphPyramid build_graph_pyramid(const ModelSpec& spec, int n_side, int patch_order,
                                 int base_index, LaplacianKind kind = LaplacianKind::NORMALIZED);

// Average/max over NESTED child quadruples; output has n/4 vertices.
MapSignal pool4(const MapSignal& x, PoolMode mode, std::vector<std::size_t>* argmax = nullptr);
// Ordering-checked variant for full-sphere signals.
MapSignal pool4(const HealpixSampling& s, const MapSignal& x, PoolMode mode);

// Per-channel mean over all vertices; permutation invariant.
std::vector<double> global_avg_pool(const MapSignal& x);

struct LossGrad {
  double loss = 0.0;
  std::vector<double> d_logits;
};

// Cross-entropy with log-sum-exp stabilization.
LossGrad loss_softmax_ce(const std::vector<double>& logits, int label);

// All trainable state: filter banks, biases, dense weights, Adam moments,
// step counter and the init seed. Parameters live in one flat vector in
// declaration order (conv theta+bias per layer, then the dense stack).
class Model {
 public:
  Model(ModelSpec spec, std::uint64_t seed);

  const ModelSpec& spec() const { return spec_; }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }
  std::uint64_t seed() const { return seed_; }
  std::int64_t step() const { return step_; }

  std::vector<double> logits(const MapSignal& x, const GraphPyramid& graphs) const;
  // Accumulates d(loss)/d(params) into grad (same length as params).
  double loss_and_grad(const MapSignal& x, int label, const GraphPyramid& graphs,
                       std::vector<double>& grad) const;

  void adam_step(const std::vector<double>& grad, double lr, double beta1, double beta2,
                 double eps);

  friend void save_checkpoint(const Model& m, const std::string& path);
  friend Model load_checkpoint(const std::string& path);

 private:
  struct Layout {
    std::vector<std::size_t> conv_theta;  // offset per conv layer
    std::vector<std::size_t> conv_bias;
    std::vector<std::size_t> dense_w;  // offsets per dense layer
    std::vector<std::size_t> dense_b;
    std::vector<std::size_t> dense_in;   // input width per dense layer
    std::vector<std::size_t> dense_out;  // output width per dense layer
    std::size_t total = 0;
  };

  Model(ModelSpec spec);  // layout only, zero params (checkpoint loading)
  void build_layout();

  ModelSpec spec_;
  Layout layout_;
  std::vector<double> params_;
  std::vector<double> adam_m_;
  std::vector<double> adam_v_;
  std::int64_t step_ = 0;
  std::uint64_t seed_ = 0;
};

struct TrainConfig {
  double lr = 1e-3;
  std::size_t batch = 16;
  std::size_t epochs = 30;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// One sample = a signal plus the pyramid it lives on (patches from different
// bases carry different geometry but share model weights).
struct Dataset {
  std::vector<MapSignal> samples;
  std::vector<int> labels;
  std::vector<std::size_t> pyramid_of;  // sample -> index into pyramids
  std::vector<GraphPyramid> pyramids;

  std::size_t size() const { return samples.size(); }
};

struct EpochMetrics {
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;
};

// Deterministic minibatch Adam (seeded shuffling, fixed reduction order).
// Throws on a non-finite loss with a "learning rate too high" diagnostic.
std::vector<EpochMetrics> train(Model& model, const Dataset& data, const Dataset* val,
                                const TrainConfig& cfg);

double evaluate_accuracy(const Model& model, const Dataset& data);

// Versioned binary container: magic `SPHF`, version u32, JSON metadata
// header, little-endian float64 parameter blobs in declaration order.
void save_checkpoint(const Model& m, const std::string& path);
Model load_checkpoint(const std::string& path);

}  // namespace sphereflow

#endif  // SPHEREFLOW_NETWORK_HPP
