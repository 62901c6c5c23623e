#include "sphereflow/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "sphereflow/io.hpp"

namespace sphereflow {

namespace {

const char* to_cstr(Activation a) { return a == Activation::RELU ? "RELU" : "NONE"; }
const char* to_cstr(PoolMode p) {
  switch (p) {
    case PoolMode::AVG4: return "AVG4";
    case PoolMode::MAX4: return "MAX4";
    default: return "NONE";
  }
}
const char* to_cstr(HeadKind h) { return h == HeadKind::FCN ? "FCN" : "CNN"; }

Activation activation_from(const std::string& s) {
  if (s == "RELU") return Activation::RELU;
  if (s == "NONE") return Activation::NONE;
  throw std::invalid_argument("unknown activation: " + s);
}
PoolMode pool_from(const std::string& s) {
  if (s == "AVG4") return PoolMode::AVG4;
  if (s == "MAX4") return PoolMode::MAX4;
  if (s == "NONE") return PoolMode::NONE;
  throw std::invalid_argument("unknown pool mode: " + s);
}
HeadKind head_from(const std::string& s) {
  if (s == "FCN") return HeadKind::FCN;
  if (s == "CNN") return HeadKind::CNN;
  throw std::invalid_argument("unknown head kind: " + s);
}

}  // namespace

std::size_t ModelSpec::pool_count() const {
  std::size_t c = 0;
  for (const auto& l : conv) {
    if (l.pool != PoolMode::NONE) ++c;
  }
  return c;
}

void ModelSpec::validate() const {
  if (f_in == 0) throw std::invalid_argument("ModelSpec: f_in must be >= 1");
  if (n_classes < 2) throw std::invalid_argument("ModelSpec: need at least 2 classes");
  if (conv.empty()) throw std::invalid_argument("ModelSpec: need at least one conv layer");
  for (const auto& l : conv) {
    if (l.order < 1 || l.f_out == 0) throw std::invalid_argument("ModelSpec: bad conv layer");
  }
  if (head == HeadKind::CNN && cnn_input_vertices == 0) {
    throw std::invalid_argument("ModelSpec: CNN head needs cnn_input_vertices");
  }
}

GraphPyramid build_graph_pyramid(const ModelSpec& spec, int n_side, int patch_order,
                                 int base_index, LaplacianKind kind) {
  spec.validate();
  GraphPyramid pyr;
  pyr.levels.reserve(spec.conv.size());
  int side = n_side;
  for (std::size_t li = 0; li < spec.conv.size(); ++li) {
    HealpixSampling s(side, Ordering::NESTED);
    if (patch_order == 0) {
      pyr.levels.push_back(build_healpix_graph(s, NeighborRule::healpix8(), kSigmaAuto, kind));
    } else {
      PatchSampling patch(s, patch_order, base_index);
      pyr.levels.push_back(build_patch_graph(patch, kSigmaAuto, kind));
    }
    // The resolution only needs to halve when another conv layer follows.
    if (spec.conv[li].pool != PoolMode::NONE && li + 1 < spec.conv.size()) {
      if (side < 2 || (patch_order != 0 && side / 2 < patch_order)) {
        throw std::invalid_argument("build_graph_pyramid: too many pooling layers for n_side");
      }
      side /= 2;
    }
  }
  return pyr;
}

MapSignal pool4(const MapSignal& x, PoolMode mode, std::vector<std::size_t>* argmax) {
  if (mode == PoolMode::NONE) return x;
  if (x.n % 4 != 0) throw ShapeError("pool4: vertex count must be divisible by 4");
  const std::size_t m = x.n / 4;
  MapSignal y(m, x.channels);
  if (argmax) argmax->assign(m * x.channels, 0);
  for (std::size_t c = 0; c < x.channels; ++c) {
    const double* in = x.channel(c);
    double* out = y.channel(c);
    for (std::size_t q = 0; q < m; ++q) {
      if (mode == PoolMode::AVG4) {
        out[q] = 0.25 * (in[4 * q] + in[4 * q + 1] + in[4 * q + 2] + in[4 * q + 3]);
      } else {
        std::size_t best = 4 * q;  // ties keep the first index
        for (std::size_t j = 4 * q + 1; j < 4 * q + 4; ++j) {
          if (in[j] > in[best]) best = j;
        }
        out[q] = in[best];
        if (argmax) (*argmax)[c * m + q] = best;
      }
    }
  }
  return y;
}

MapSignal pool4(const HealpixSampling& s, const MapSignal& x, PoolMode mode) {
  if (s.ordering() != Ordering::NESTED) throw OrderingError("pool4: requires NESTED ordering");
  if (x.n != std::size_t(s.n_pix())) throw ShapeError("pool4: signal length != n_pix");
  return pool4(x, mode, nullptr);
}

std::vector<double> global_avg_pool(const MapSignal& x) {
  if (x.n == 0) throw std::invalid_argument("global_avg_pool: empty signal");
  std::vector<double> out(x.channels, 0.0);
  for (std::size_t c = 0; c < x.channels; ++c) {
    const double* in = x.channel(c);
    double acc = 0.0;
    for (std::size_t v = 0; v < x.n; ++v) acc += in[v];
    out[c] = acc / double(x.n);
  }
  return out;
}

LossGrad loss_softmax_ce(const std::vector<double>& logits, int label) {
  if (label < 0 || std::size_t(label) >= logits.size()) {
    throw std::out_of_range("loss_softmax_ce: label out of range");
  }
  double mx = logits[0];
  for (double v : logits) mx = std::max(mx, v);
  double sum = 0.0;
  for (double v : logits) sum += std::exp(v - mx);
  double lse = mx + std::log(sum);

  LossGrad out;
  out.loss = lse - logits[std::size_t(label)];
  out.d_logits.resize(logits.size());
  for (std::size_t j = 0; j < logits.size(); ++j) {
    out.d_logits[j] = std::exp(logits[j] - lse) - (std::size_t(label) == j ? 1.0 : 0.0);
  }
  return out;
}

void Model::build_layout() {
  layout_ = Layout{};
  std::size_t off = 0;
  std::size_t fin = spec_.f_in;
  for (const auto& l : spec_.conv) {
    layout_.conv_theta.push_back(off);
    off += std::size_t(l.order) * fin * l.f_out;
    layout_.conv_bias.push_back(off);
    off += l.f_out;
    fin = l.f_out;
  }
  std::size_t head_in =
      spec_.head == HeadKind::FCN ? fin : fin * spec_.cnn_input_vertices;
  auto push_dense = [&](std::size_t in, std::size_t out) {
    layout_.dense_w.push_back(off);
    off += in * out;
    layout_.dense_b.push_back(off);
    off += out;
    layout_.dense_in.push_back(in);
    layout_.dense_out.push_back(out);
  };
  if (spec_.head == HeadKind::CNN && spec_.hidden > 0) {
    push_dense(head_in, spec_.hidden);
    push_dense(spec_.hidden, spec_.n_classes);
  } else {
    push_dense(head_in, spec_.n_classes);
  }
  layout_.total = off;
}

Model::Model(ModelSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  build_layout();
  params_.assign(layout_.total, 0.0);
  adam_m_.assign(layout_.total, 0.0);
  adam_v_.assign(layout_.total, 0.0);
}

Model::Model(ModelSpec spec, std::uint64_t seed) : Model(std::move(spec)) {
  seed_ = seed;
  Rng rng(seed);
  std::size_t fin = spec_.f_in;
  for (std::size_t li = 0; li < spec_.conv.size(); ++li) {
    const auto& l = spec_.conv[li];
    double sd = std::sqrt(1.0 / (double(l.order) * double(fin)));
    std::size_t count = std::size_t(l.order) * fin * l.f_out;
    for (std::size_t j = 0; j < count; ++j) params_[layout_.conv_theta[li] + j] = sd * rng.normal();
    // biases start at zero
    fin = l.f_out;
  }
  for (std::size_t di = 0; di < layout_.dense_w.size(); ++di) {
    double sd = std::sqrt(1.0 / double(layout_.dense_in[di]));
    std::size_t count = layout_.dense_in[di] * layout_.dense_out[di];
    for (std::size_t j = 0; j < count; ++j) params_[layout_.dense_w[di] + j] = sd * rng.normal();
  }
}

namespace {

ChebFilterBank make_bank(const ConvLayerSpec& l, std::size_t fin, const double* theta) {
  ChebFilterBank bank(l.order, fin, l.f_out);
  std::copy(theta, theta + bank.theta.size(), bank.theta.begin());
  return bank;
}

struct ForwardTrace {
  std::vector<MapSignal> conv_in;      // input handed to each conv layer
  std::vector<MapSignal> pre_act;      // conv output + bias
  std::vector<MapSignal> post_act;     // after activation (pool input)
  std::vector<std::vector<std::size_t>> max_idx;  // per layer, MAX4 only
  MapSignal head_in_signal;
  std::vector<double> head_in;
  std::vector<std::vector<double>> dense_in;  // input to each dense layer
  std::vector<std::vector<double>> dense_pre; // pre-activation of each dense layer
  std::vector<double> logits;
};

}  // namespace

std::vector<double> Model::logits(const MapSignal& x, const GraphPyramid& graphs) const {
  if (graphs.levels.size() != spec_.conv.size()) {
    throw ShapeError("logits: pyramid depth != conv layer count");
  }
  if (x.channels != spec_.f_in) throw ShapeError("logits: input channels != f_in");

  MapSignal cur = x;
  std::size_t fin = spec_.f_in;
  for (std::size_t li = 0; li < spec_.conv.size(); ++li) {
    const auto& l = spec_.conv[li];
    const SphereGraph& g = graphs.levels[li];
    if (cur.n != g.n()) throw ShapeError("logits: signal length != graph vertex count");
    ChebFilterBank bank = make_bank(l, fin, params_.data() + layout_.conv_theta[li]);
    MapSignal z = cheb_apply(bank, g, cur);
    const double* bias = params_.data() + layout_.conv_bias[li];
    for (std::size_t o = 0; o < l.f_out; ++o) {
      double* ch = z.channel(o);
      for (std::size_t v = 0; v < z.n; ++v) ch[v] += bias[o];
    }
    if (l.act == Activation::RELU) {
      for (double& v : z.values) v = v > 0.0 ? v : 0.0;
    }
    cur = pool4(z, l.pool, nullptr);
    fin = l.f_out;
  }

  std::vector<double> feat;
  if (spec_.head == HeadKind::FCN) {
    feat = global_avg_pool(cur);
  } else {
    if (cur.n != spec_.cnn_input_vertices) {
      throw ShapeError("logits: CNN flatten size mismatch");
    }
    feat = cur.values;  // channel-major flatten
  }

  for (std::size_t di = 0; di < layout_.dense_w.size(); ++di) {
    const double* w = params_.data() + layout_.dense_w[di];
    const double* b = params_.data() + layout_.dense_b[di];
    std::size_t in = layout_.dense_in[di];
    std::size_t out = layout_.dense_out[di];
    if (feat.size() != in) throw ShapeError("logits: dense input size mismatch");
    std::vector<double> next(out, 0.0);
    for (std::size_t r = 0; r < out; ++r) {
      double acc = b[r];
      const double* wr = w + r * in;
      for (std::size_t cidx = 0; cidx < in; ++cidx) acc += wr[cidx] * feat[cidx];
      next[r] = acc;
    }
    bool last = di + 1 == layout_.dense_w.size();
    if (!last) {
      for (double& v : next) v = v > 0.0 ? v : 0.0;
    }
    feat = std::move(next);
  }
  return feat;
}

double Model::loss_and_grad(const MapSignal& x, int label, const GraphPyramid& graphs,
                            std::vector<double>& grad) const {
  if (grad.size() != params_.size()) throw ShapeError("loss_and_grad: grad size mismatch");
  if (graphs.levels.size() != spec_.conv.size()) {
    throw ShapeError("loss_and_grad: pyramid depth != conv layer count");
  }
  if (x.channels != spec_.f_in) throw ShapeError("loss_and_grad: input channels != f_in");

  ForwardTrace tr;
  const std::size_t n_layers = spec_.conv.size();
  tr.conv_in.resize(n_layers);
  tr.pre_act.resize(n_layers);
  tr.post_act.resize(n_layers);
  tr.max_idx.resize(n_layers);

  MapSignal cur = x;
  std::size_t fin = spec_.f_in;
  for (std::size_t li = 0; li < n_layers; ++li) {
    const auto& l = spec_.conv[li];
    const SphereGraph& g = graphs.levels[li];
    if (cur.n != g.n()) throw ShapeError("loss_and_grad: signal length != graph vertex count");
    tr.conv_in[li] = cur;
    ChebFilterBank bank = make_bank(l, fin, params_.data() + layout_.conv_theta[li]);
    MapSignal z = cheb_apply(bank, g, cur);
    const double* bias = params_.data() + layout_.conv_bias[li];
    for (std::size_t o = 0; o < l.f_out; ++o) {
      double* ch = z.channel(o);
      for (std::size_t v = 0; v < z.n; ++v) ch[v] += bias[o];
    }
    tr.pre_act[li] = z;
    if (l.act == Activation::RELU) {
      for (double& v : z.values) v = v > 0.0 ? v : 0.0;
    }
    tr.post_act[li] = z;
    cur = pool4(z, l.pool, l.pool == PoolMode::MAX4 ? &tr.max_idx[li] : nullptr);
    fin = l.f_out;
  }

  tr.head_in_signal = cur;
  if (spec_.head == HeadKind::FCN) {
    tr.head_in = global_avg_pool(cur);
  } else {
    if (cur.n != spec_.cnn_input_vertices) {
      throw ShapeError("loss_and_grad: CNN flatten size mismatch");
    }
    tr.head_in = cur.values;
  }

  std::vector<double> feat = tr.head_in;
  const std::size_t n_dense = layout_.dense_w.size();
  tr.dense_in.resize(n_dense);
  tr.dense_pre.resize(n_dense);
  for (std::size_t di = 0; di < n_dense; ++di) {
    tr.dense_in[di] = feat;
    const double* w = params_.data() + layout_.dense_w[di];
    const double* b = params_.data() + layout_.dense_b[di];
    std::size_t in = layout_.dense_in[di];
    std::size_t out = layout_.dense_out[di];
    if (feat.size() != in) throw ShapeError("loss_and_grad: dense input size mismatch");
    std::vector<double> next(out, 0.0);
    for (std::size_t r = 0; r < out; ++r) {
      double acc = b[r];
      const double* wr = w + r * in;
      for (std::size_t cidx = 0; cidx < in; ++cidx) acc += wr[cidx] * feat[cidx];
      next[r] = acc;
    }
    tr.dense_pre[di] = next;
    bool last = di + 1 == n_dense;
    if (!last) {
      for (double& v : next) v = v > 0.0 ? v : 0.0;
    }
    feat = std::move(next);
  }
  tr.logits = feat;

  LossGrad lg = loss_softmax_ce(tr.logits, label);

  // ---- backward ----
  std::vector<double> dfeat = lg.d_logits;
  for (std::size_t dii = n_dense; dii > 0; --dii) {
    std::size_t di = dii - 1;
    bool last = di + 1 == n_dense;
    if (!last) {
      // dfeat currently refers to the post-ReLU output of layer di.
      for (std::size_t r = 0; r < dfeat.size(); ++r) {
        if (tr.dense_pre[di][r] <= 0.0) dfeat[r] = 0.0;
      }
    }
    const double* w = params_.data() + layout_.dense_w[di];
    double* dw = grad.data() + layout_.dense_w[di];
    double* db = grad.data() + layout_.dense_b[di];
    std::size_t in = layout_.dense_in[di];
    std::size_t out = layout_.dense_out[di];
    std::vector<double> dprev(in, 0.0);
    for (std::size_t r = 0; r < out; ++r) {
      db[r] += dfeat[r];
      const double* wr = w + r * in;
      double* dwr = dw + r * in;
      for (std::size_t cidx = 0; cidx < in; ++cidx) {
        dwr[cidx] += dfeat[r] * tr.dense_in[di][cidx];
        dprev[cidx] += dfeat[r] * wr[cidx];
      }
    }
    dfeat = std::move(dprev);
  }

  // Head input gradient back to a vertex signal.
  MapSignal dcur(tr.head_in_signal.n, tr.head_in_signal.channels);
  if (spec_.head == HeadKind::FCN) {
    double inv = 1.0 / double(tr.head_in_signal.n);
    for (std::size_t c = 0; c < dcur.channels; ++c) {
      double g = dfeat[c] * inv;
      double* ch = dcur.channel(c);
      for (std::size_t v = 0; v < dcur.n; ++v) ch[v] = g;
    }
  } else {
    dcur.values = dfeat;
  }

  for (std::size_t lii = n_layers; lii > 0; --lii) {
    std::size_t li = lii - 1;
    const auto& l = spec_.conv[li];
    const SphereGraph& g = graphs.levels[li];

    MapSignal dz(tr.post_act[li].n, tr.post_act[li].channels);
    if (l.pool == PoolMode::NONE) {
      dz = dcur;
    } else if (l.pool == PoolMode::AVG4) {
      for (std::size_t c = 0; c < dz.channels; ++c) {
        const double* dq = dcur.channel(c);
        double* out = dz.channel(c);
        for (std::size_t q = 0; q < dcur.n; ++q) {
          double gq = 0.25 * dq[q];
          out[4 * q] = gq;
          out[4 * q + 1] = gq;
          out[4 * q + 2] = gq;
          out[4 * q + 3] = gq;
        }
      }
    } else {  // MAX4 scatters to the argmax child
      for (std::size_t c = 0; c < dz.channels; ++c) {
        const double* dq = dcur.channel(c);
        double* out = dz.channel(c);
        for (std::size_t q = 0; q < dcur.n; ++q) {
          out[tr.max_idx[li][c * dcur.n + q]] += dq[q];
        }
      }
    }

    if (l.act == Activation::RELU) {
      for (std::size_t j = 0; j < dz.values.size(); ++j) {
        if (tr.pre_act[li].values[j] <= 0.0) dz.values[j] = 0.0;
      }
    }

    double* db = grad.data() + layout_.conv_bias[li];
    for (std::size_t o = 0; o < l.f_out; ++o) {
      const double* ch = dz.channel(o);
      double acc = 0.0;
      for (std::size_t v = 0; v < dz.n; ++v) acc += ch[v];
      db[o] += acc;
    }

    std::size_t layer_fin = li == 0 ? spec_.f_in : spec_.conv[li - 1].f_out;
    ChebFilterBank bank = make_bank(l, layer_fin, params_.data() + layout_.conv_theta[li]);
    ChebGrad cg = cheb_grad(bank, g, tr.conv_in[li], dz);
    double* dtheta = grad.data() + layout_.conv_theta[li];
    for (std::size_t j = 0; j < cg.d_theta.size(); ++j) dtheta[j] += cg.d_theta[j];
    dcur = std::move(cg.d_x);
  }

  return lg.loss;
}

void Model::adam_step(const std::vector<double>& grad, double lr, double beta1, double beta2,
                      double eps) {
  if (grad.size() != params_.size()) throw ShapeError("adam_step: grad size mismatch");
  ++step_;
  double bc1 = 1.0 - std::pow(beta1, double(step_));
  double bc2 = 1.0 - std::pow(beta2, double(step_));
  for (std::size_t j = 0; j < params_.size(); ++j) {
    adam_m_[j] = beta1 * adam_m_[j] + (1.0 - beta1) * grad[j];
    adam_v_[j] = beta2 * adam_v_[j] + (1.0 - beta2) * grad[j] * grad[j];
    double mhat = adam_m_[j] / bc1;
    double vhat = adam_v_[j] / bc2;
    params_[j] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

std::vector<EpochMetrics> train(Model& model, const Dataset& data, const Dataset* val,
                                const TrainConfig& cfg) {
  if (data.size() == 0) throw std::invalid_argument("train: dataset is empty");
  for (int lbl : data.labels) {
    if (lbl < 0 || std::size_t(lbl) >= model.spec().n_classes) {
      throw std::invalid_argument("train: label out of range");
    }
  }
  if (data.labels.size() != data.size() || data.pyramid_of.size() != data.size()) {
    throw ShapeError("train: dataset fields have inconsistent lengths");
  }

  std::vector<EpochMetrics> history;
  std::vector<std::size_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::vector<double> grad(model.params().size(), 0.0);
  Rng shuffle_rng(cfg.seed);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);

    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
      std::size_t stop = std::min(order.size(), start + cfg.batch);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t b = start; b < stop; ++b) {
        std::size_t s = order[b];
        double loss = model.loss_and_grad(data.samples[s], data.labels[s],
                                          data.pyramids[data.pyramid_of[s]], grad);
        if (!std::isfinite(loss)) {
          throw std::runtime_error(
              "train: loss is not finite (diverged); lower the learning rate");
        }
        loss_sum += loss;
      }
      double inv = 1.0 / double(stop - start);
      for (double& gv : grad) gv *= inv;
      model.adam_step(grad, cfg.lr, cfg.beta1, cfg.beta2, cfg.eps);
    }

    for (std::size_t s = 0; s < data.size(); ++s) {
      std::vector<double> lg = model.logits(data.samples[s], data.pyramids[data.pyramid_of[s]]);
      std::size_t arg = 0;
      for (std::size_t j = 1; j < lg.size(); ++j) {
        if (lg[j] > lg[arg]) arg = j;
      }
      if (int(arg) == data.labels[s]) ++correct;
    }

    EpochMetrics m;
    m.train_loss = loss_sum / double(data.size());
    m.train_accuracy = double(correct) / double(data.size());
    m.val_accuracy = val ? evaluate_accuracy(model, *val) : 0.0;
    history.push_back(m);
  }
  return history;
}

double evaluate_accuracy(const Model& model, const Dataset& data) {
  if (data.size() == 0) return 0.0;
  std::vector<int> predicted(data.size(), 0);
  parallel_for(data.size(), [&](std::size_t s) {
    std::vector<double> lg = model.logits(data.samples[s], data.pyramids[data.pyramid_of[s]]);
    std::size_t arg = 0;
    for (std::size_t j = 1; j < lg.size(); ++j) {
      if (lg[j] > lg[arg]) arg = j;
    }
    predicted[s] = int(arg);
  });
  std::size_t correct = 0;
  for (std::size_t s = 0; s < data.size(); ++s) {
    if (predicted[s] == data.labels[s]) ++correct;
  }
  return double(correct) / double(data.size());
}

void save_checkpoint(const Model& m, const std::string& path) {
  nlohmann::json conv = nlohmann::json::array();
  for (const auto& l : m.spec_.conv) {
    conv.push_back({{"K", l.order},
                    {"f_out", l.f_out},
                    {"act", to_cstr(l.act)},
                    {"pool", to_cstr(l.pool)}});
  }
  nlohmann::json header = {
      {"spec",
       {{"f_in", m.spec_.f_in},
        {"conv", conv},
        {"head", to_cstr(m.spec_.head)},
        {"cnn_input_vertices", m.spec_.cnn_input_vertices},
        {"hidden", m.spec_.hidden},
        {"n_classes", m.spec_.n_classes}}},
      {"step", m.step_},
      {"seed", m.seed_},
      {"n_params", m.params_.size()},
  };
  std::string hs = header.dump();

  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os.write("SPHF", 4);
  write_u32le(os, 1);
  write_u64le(os, hs.size());
  os.write(hs.data(), std::streamsize(hs.size()));
  write_f64le(os, m.params_.data(), m.params_.size());
  write_f64le(os, m.adam_m_.data(), m.adam_m_.size());
  write_f64le(os, m.adam_v_.data(), m.adam_v_.size());
  if (!os) throw std::runtime_error("write failed: " + path);
}

Model load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "SPHF", 4) != 0) {
    throw std::runtime_error("not a checkpoint (bad magic): " + path);
  }
  std::uint32_t version = read_u32le(is);
  if (version != 1) throw std::runtime_error("unsupported checkpoint version");
  std::uint64_t hlen = read_u64le(is);
  std::string hs(hlen, '\0');
  is.read(hs.data(), std::streamsize(hlen));
  if (!is) throw std::runtime_error("truncated checkpoint header");
  nlohmann::json header = nlohmann::json::parse(hs);

  ModelSpec spec;
  const auto& js = header.at("spec");
  spec.f_in = js.at("f_in").get<std::size_t>();
  for (const auto& jl : js.at("conv")) {
    ConvLayerSpec l;
    l.order = jl.at("K").get<int>();
    l.f_out = jl.at("f_out").get<std::size_t>();
    l.act = activation_from(jl.at("act").get<std::string>());
    l.pool = pool_from(jl.at("pool").get<std::string>());
    spec.conv.push_back(l);
  }
  spec.head = head_from(js.at("head").get<std::string>());
  spec.cnn_input_vertices = js.at("cnn_input_vertices").get<std::size_t>();
  spec.hidden = js.at("hidden").get<std::size_t>();
  spec.n_classes = js.at("n_classes").get<std::size_t>();

  Model m(spec);
  m.step_ = header.at("step").get<std::int64_t>();
  m.seed_ = header.at("seed").get<std::uint64_t>();
  auto n_params = header.at("n_params").get<std::size_t>();
  if (n_params != m.params_.size()) {
    throw std::runtime_error("checkpoint parameter count does not match architecture");
  }
  read_f64le(is, m.params_.data(), m.params_.size());
  read_f64le(is, m.adam_m_.data(), m.adam_m_.size());
  read_f64le(is, m.adam_v_.data(), m.adam_v_.size());
  return m;
}

}  // namespace sphereflow
