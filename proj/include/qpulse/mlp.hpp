#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qpulse/adam.hpp"
#include "qpulse/dataset.hpp"
#include "qpulse/fixed_point.hpp"
#include "qpulse/io.hpp"
#include "qpulse/rng.hpp"

namespace qpulse {

// Dense MLP mapping a rotation angle to pulse coefficients. Hidden layers
// are ReLU, the output layer is linear; the input is normalized to
// beta / beta_scale and outputs are trained in units of alpha_scale (the
// largest |alpha| on the training split), so they live in (-1, 1).
struct MlpSpec {
  std::vector<int> hidden_widths;
  int input_width = 1;
  int output_width = 20;
  double beta_scale = M_PI;
  double alpha_scale = 0.0;  // set by the trainer
  std::optional<QuantizationScheme> quant;  // present for quantization-aware nets

  // Stock architectures. The published parameter budgets they approximate
  // are recorded in README.md; hidden widths were chosen to match them.
  static MlpSpec named(std::string_view name) {
    MlpSpec s;
    if (name == "small")
      s.hidden_widths = {10, 10, 10, 10, 10, 10};  // 790 parameters
    else if (name == "large")
      s.hidden_widths = {11, 11, 11, 11, 11, 11, 11};  // 1054 parameters
    else if (name == "xlarge")
      s.hidden_widths = {64, 64, 64, 64, 64};  // 18068 parameters
    else
      throw std::invalid_argument("MlpSpec: unknown spec '" + std::string(name) +
                                  "' (known: small, large, xlarge)");
    return s;
  }

  std::vector<int> widths() const {
    std::vector<int> w;
    w.push_back(input_width);
    w.insert(w.end(), hidden_widths.begin(), hidden_widths.end());
    w.push_back(output_width);
    return w;
  }

  int layer_count() const { return static_cast<int>(hidden_widths.size()) + 1; }

  std::int64_t param_count() const {
    std::vector<int> w = widths();
    std::int64_t n = 0;
    for (std::size_t l = 0; l + 1 < w.size(); ++l)
      n += static_cast<std::int64_t>(w[l]) * w[l + 1] + w[l + 1];
    return n;
  }

  void validate() const {
    if (input_width != 1) throw std::invalid_argument("MlpSpec: input width must be 1");
    if (output_width < 1) throw std::invalid_argument("MlpSpec: output width must be >= 1");
    for (int h : hidden_widths)
      if (h < 1) throw std::invalid_argument("MlpSpec: hidden widths must be >= 1");
    if (!(beta_scale > 0.0)) throw std::invalid_argument("MlpSpec: beta_scale must be positive");
    if (quant) quant->validate(layer_count());
  }
};

struct MlpLayer {
  int in = 0, out = 0;
  std::vector<double> weights;  // row-major, out x in
  std::vector<double> biases;   // out
};

struct TrainReport {
  int epochs_run = 0;
  int best_epoch = 0;
  double train_mse = -1.0;  // normalized alpha units; -1 = not evaluated
  double val_mse = -1.0;
  double test_mse = -1.0;
};

struct MlpModel {
  MlpSpec spec;
  std::vector<MlpLayer> layers;
  TrainReport report;
  std::uint64_t seed = 0;
  std::string dataset_hash;  // provenance of the training data

  void validate() const {
    spec.validate();
    std::vector<int> w = spec.widths();
    if (layers.size() != w.size() - 1) throw std::invalid_argument("MlpModel: layer count mismatch");
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const MlpLayer& ly = layers[l];
      if (ly.in != w[l] || ly.out != w[l + 1])
        throw std::invalid_argument("MlpModel: layer shape mismatch");
      if (ly.weights.size() != static_cast<std::size_t>(ly.in) * static_cast<std::size_t>(ly.out) ||
          ly.biases.size() != static_cast<std::size_t>(ly.out))
        throw std::invalid_argument("MlpModel: parameter array size mismatch");
      for (double v : ly.weights)
        if (!std::isfinite(v)) throw std::invalid_argument("MlpModel: non-finite weight");
      for (double v : ly.biases)
        if (!std::isfinite(v)) throw std::invalid_argument("MlpModel: non-finite bias");
    }
  }
};

struct TrainConfig {
  int max_epochs = 5000;
  int patience = 250;  // epochs without val improvement before stopping
  double learning_rate = 1e-3;
  int batch_size = 0;  // 0 = full batch
  std::uint64_t seed = 1;

  // Deep, narrow ReLU nets this small are init lotteries: a bad draw leaves
  // half the units dead. Each restart trains from its own substream of
  // `seed`; the best validation MSE wins. Still deterministic in `seed`.
  int restarts = 3;

  // optional progress hook: (epoch, train mse, val mse, learning rate)
  std::function<void(int, double, double, double)> on_epoch;

  void validate() const {
    if (max_epochs < 1) throw std::invalid_argument("TrainConfig: max_epochs must be >= 1");
    if (patience < 1 || patience >= max_epochs)
      throw std::invalid_argument("TrainConfig: patience must be in [1, max_epochs)");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("TrainConfig: learning_rate must be positive");
    if (batch_size < 0) throw std::invalid_argument("TrainConfig: batch_size must be >= 0");
    if (restarts < 1) throw std::invalid_argument("TrainConfig: restarts must be >= 1");
  }
};

namespace detail {

// Flat-parameter network engine shared by training and inference. Parameter
// layout per layer: weights (row-major out x in), then biases.
class MlpEngine {
 public:
  explicit MlpEngine(const MlpSpec& spec) : spec_(spec), widths_(spec.widths()) {
    spec_.validate();
    offsets_.push_back(0);
    for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
      std::size_t n = static_cast<std::size_t>(widths_[l]) * static_cast<std::size_t>(widths_[l + 1]) +
                      static_cast<std::size_t>(widths_[l + 1]);
      offsets_.push_back(offsets_.back() + n);
    }
  }

  std::size_t param_count() const { return offsets_.back(); }
  int layer_count() const { return static_cast<int>(widths_.size()) - 1; }
  const std::vector<int>& widths() const { return widths_; }

  std::span<const double> layer_weights(std::span<const double> params, int l) const {
    return params.subspan(offsets_[static_cast<std::size_t>(l)], weight_count(l));
  }
  std::span<const double> layer_biases(std::span<const double> params, int l) const {
    return params.subspan(offsets_[static_cast<std::size_t>(l)] + weight_count(l),
                          static_cast<std::size_t>(widths_[static_cast<std::size_t>(l) + 1]));
  }

  // Effective (fake-quantized) parameters used by the forward pass; identity
  // when the spec has no quantization scheme.
  std::vector<double> effective_params(std::span<const double> params) const {
    std::vector<double> eff(params.begin(), params.end());
    if (!spec_.quant) return eff;
    for (int l = 0; l < layer_count(); ++l) {
      const FxFormat& wf = spec_.quant->weight_formats[static_cast<std::size_t>(l)];
      std::size_t base = offsets_[static_cast<std::size_t>(l)];
      std::size_t count = weight_count(l) + static_cast<std::size_t>(widths_[static_cast<std::size_t>(l) + 1]);
      for (std::size_t i = base; i < base + count; ++i) eff[i] = wf.quantize_value(eff[i]);
    }
    return eff;
  }

  // Forward in normalized units. `eff` must come from effective_params().
  std::vector<double> forward(std::span<const double> eff, double x_norm) const {
    std::vector<double> a{quantize_input(x_norm)};
    for (int l = 0; l < layer_count(); ++l) a = layer_forward(eff, l, a);
    return a;
  }

  // One training sample: forward keeping intermediates, then backward with
  // straight-through gradients. Gradients are accumulated into grad (sized
  // param_count()): the quantizer passes gradients unchanged inside its
  // representable range and blocks them outside.
  double accumulate_gradient(std::span<const double> eff, double x_norm,
                             std::span<const double> target, double weight,
                             std::span<double> grad) const {
    int nl = layer_count();
    std::vector<std::vector<double>> acts(static_cast<std::size_t>(nl) + 1);
    std::vector<std::vector<double>> raw(static_cast<std::size_t>(nl) + 1);  // pre-quantization
    acts[0] = {quantize_input(x_norm)};
    raw[0] = acts[0];
    for (int l = 0; l < nl; ++l) {
      auto [r, a] = layer_forward_traced(eff, l, acts[static_cast<std::size_t>(l)]);
      raw[static_cast<std::size_t>(l) + 1] = std::move(r);
      acts[static_cast<std::size_t>(l) + 1] = std::move(a);
    }

    const std::vector<double>& out = acts[static_cast<std::size_t>(nl)];
    double loss = 0.0;
    std::vector<double> delta(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
      double e = out[i] - target[i];
      loss += e * e;
      delta[i] = 2.0 * e * weight;
    }

    for (int l = nl - 1; l >= 0; --l) {
      int in_w = widths_[static_cast<std::size_t>(l)];
      int out_w = widths_[static_cast<std::size_t>(l) + 1];
      const std::vector<double>& a_in = acts[static_cast<std::size_t>(l)];
      const std::vector<double>& r_out = raw[static_cast<std::size_t>(l) + 1];

      // activation-quantizer STE mask, then the activation derivative
      if (spec_.quant) {
        const FxFormat& af = spec_.quant->act_formats[static_cast<std::size_t>(l)];
        for (int i = 0; i < out_w; ++i)
          if (!af.in_range(r_out[static_cast<std::size_t>(i)])) delta[static_cast<std::size_t>(i)] = 0.0;
      }
      if (l != nl - 1) {  // hidden layers are ReLU; r_out is its output
        for (int i = 0; i < out_w; ++i)
          if (r_out[static_cast<std::size_t>(i)] <= 0.0) delta[static_cast<std::size_t>(i)] = 0.0;
      }

      std::size_t wbase = offsets_[static_cast<std::size_t>(l)];
      std::size_t bbase = wbase + weight_count(l);
      std::vector<double> prev_delta(static_cast<std::size_t>(in_w), 0.0);
      for (int i = 0; i < out_w; ++i) {
        double d = delta[static_cast<std::size_t>(i)];
        if (d != 0.0) {
          for (int j = 0; j < in_w; ++j) {
            grad[wbase + static_cast<std::size_t>(i) * static_cast<std::size_t>(in_w) +
                 static_cast<std::size_t>(j)] += d * a_in[static_cast<std::size_t>(j)];
            prev_delta[static_cast<std::size_t>(j)] +=
                d * eff[wbase + static_cast<std::size_t>(i) * static_cast<std::size_t>(in_w) +
                        static_cast<std::size_t>(j)];
          }
          grad[bbase + static_cast<std::size_t>(i)] += d;
        }
      }
      delta = std::move(prev_delta);
    }
    return loss;
  }

  // Weight-quantizer STE mask applied after a batch: gradients of weights
  // that sit outside their format's range are dropped.
  void mask_weight_gradients(std::span<const double> params, std::span<double> grad) const {
    if (!spec_.quant) return;
    for (int l = 0; l < layer_count(); ++l) {
      const FxFormat& wf = spec_.quant->weight_formats[static_cast<std::size_t>(l)];
      std::size_t base = offsets_[static_cast<std::size_t>(l)];
      std::size_t count = weight_count(l) + static_cast<std::size_t>(widths_[static_cast<std::size_t>(l) + 1]);
      for (std::size_t i = base; i < base + count; ++i)
        if (!wf.in_range(params[i])) grad[i] = 0.0;
    }
  }

  // He-style uniform init for the ReLU stack. The linear output layer starts
  // at zero: predictions then begin inside every output format's range, so
  // straight-through training can never open with saturated, gradient-dead
  // outputs.
  std::vector<double> init_params(std::uint64_t seed) const {
    std::vector<double> params(param_count(), 0.0);
    SplitMix64 rng(seed);
    for (int l = 0; l < layer_count(); ++l) {
      int in_w = widths_[static_cast<std::size_t>(l)];
      std::size_t base = offsets_[static_cast<std::size_t>(l)];
      if (l == layer_count() - 1) break;  // output weights and biases stay zero
      double limit = std::sqrt(6.0 / in_w);
      for (std::size_t i = 0; i < weight_count(l); ++i) params[base + i] = rng.uniform(-limit, limit);
      // small positive biases keep ReLU units initially active; dead units
      // cannot recover under full-batch training
      std::size_t bbase = base + weight_count(l);
      for (int i = 0; i < widths_[static_cast<std::size_t>(l) + 1]; ++i)
        params[bbase + static_cast<std::size_t>(i)] = 0.05;
    }
    return params;
  }

 private:
  std::size_t weight_count(int l) const {
    return static_cast<std::size_t>(widths_[static_cast<std::size_t>(l)]) *
           static_cast<std::size_t>(widths_[static_cast<std::size_t>(l) + 1]);
  }

  double quantize_input(double x) const {
    return spec_.quant ? spec_.quant->input_format.quantize_value(x) : x;
  }

  std::vector<double> layer_forward(std::span<const double> eff, int l,
                                    const std::vector<double>& a_in) const {
    return layer_forward_traced(eff, l, a_in).second;
  }

  // returns (pre-quantization activation, final activation)
  std::pair<std::vector<double>, std::vector<double>> layer_forward_traced(
      std::span<const double> eff, int l, const std::vector<double>& a_in) const {
    int in_w = widths_[static_cast<std::size_t>(l)];
    int out_w = widths_[static_cast<std::size_t>(l) + 1];
    std::size_t wbase = offsets_[static_cast<std::size_t>(l)];
    std::size_t bbase = wbase + weight_count(l);
    bool hidden = l != layer_count() - 1;

    std::vector<double> raw(static_cast<std::size_t>(out_w));
    for (int i = 0; i < out_w; ++i) {
      double z = eff[bbase + static_cast<std::size_t>(i)];
      const double* w = eff.data() + wbase + static_cast<std::size_t>(i) * static_cast<std::size_t>(in_w);
      for (int j = 0; j < in_w; ++j) z += w[j] * a_in[static_cast<std::size_t>(j)];
      raw[static_cast<std::size_t>(i)] = hidden ? std::max(0.0, z) : z;
    }
    std::vector<double> act = raw;
    if (spec_.quant) {
      const FxFormat& af = spec_.quant->act_formats[static_cast<std::size_t>(l)];
      for (double& v : act) v = af.quantize_value(v);
    }
    return {std::move(raw), std::move(act)};
  }

  MlpSpec spec_;
  std::vector<int> widths_;
  std::vector<std::size_t> offsets_;
};

inline std::vector<double> flatten(const MlpModel& m) {
  std::vector<double> params;
  for (const MlpLayer& l : m.layers) {
    params.insert(params.end(), l.weights.begin(), l.weights.end());
    params.insert(params.end(), l.biases.begin(), l.biases.end());
  }
  return params;
}

inline std::vector<MlpLayer> unflatten(const MlpSpec& spec, std::span<const double> params) {
  std::vector<int> w = spec.widths();
  std::vector<MlpLayer> layers;
  std::size_t pos = 0;
  for (std::size_t l = 0; l + 1 < w.size(); ++l) {
    MlpLayer ly;
    ly.in = w[l];
    ly.out = w[l + 1];
    std::size_t wn = static_cast<std::size_t>(ly.in) * static_cast<std::size_t>(ly.out);
    ly.weights.assign(params.begin() + static_cast<std::ptrdiff_t>(pos),
                      params.begin() + static_cast<std::ptrdiff_t>(pos + wn));
    pos += wn;
    ly.biases.assign(params.begin() + static_cast<std::ptrdiff_t>(pos),
                     params.begin() + static_cast<std::ptrdiff_t>(pos + static_cast<std::size_t>(ly.out)));
    pos += static_cast<std::size_t>(ly.out);
    layers.push_back(std::move(ly));
  }
  return layers;
}

}  // namespace detail

// Prediction in physical units: beta (rad) -> pulse coefficients (rad/ns).
inline PulseParams mlp_forward(const MlpModel& m, double beta) {
  m.validate();
  if (!std::isfinite(beta) || beta < -M_PI - 1e-12 || beta > M_PI + 1e-12)
    throw std::invalid_argument("mlp_forward: beta must lie in [-pi, pi]");
  if (!(m.spec.alpha_scale > 0.0))
    throw std::invalid_argument("mlp_forward: model has no alpha_scale (untrained?)");
  detail::MlpEngine engine(m.spec);
  std::vector<double> params = detail::flatten(m);
  std::vector<double> eff = engine.effective_params(params);
  std::vector<double> out = engine.forward(eff, beta / m.spec.beta_scale);
  for (double& v : out) v *= m.spec.alpha_scale;
  return PulseParams::from_flat(out);
}

// Mean squared error over a split, in normalized alpha units.
inline double mse(const MlpModel& m, const Dataset& ds, Split split) {
  m.validate();
  std::vector<std::size_t> idx = ds.indices(split);
  if (idx.empty()) throw std::invalid_argument("mse: split is empty");
  if (!(m.spec.alpha_scale > 0.0)) throw std::invalid_argument("mse: model has no alpha_scale");

  detail::MlpEngine engine(m.spec);
  std::vector<double> params = detail::flatten(m);
  std::vector<double> eff = engine.effective_params(params);

  double total = 0.0;
  for (std::size_t i : idx) {
    const DatasetRow& r = ds.rows[i];
    std::vector<double> out = engine.forward(eff, r.beta / m.spec.beta_scale);
    std::vector<double> alpha = r.alpha.flat();
    for (std::size_t j = 0; j < out.size(); ++j) {
      double e = out[j] - alpha[j] / m.spec.alpha_scale;
      total += e * e;
    }
  }
  return total / (static_cast<double>(idx.size()) * m.spec.output_width);
}

// Full-batch (or fixed-order mini-batch) Adam on the MSE over normalized
// alpha, with early stopping on the validation split and best-weight
// restore. Deterministic for a fixed seed. When the spec carries a
// QuantizationScheme the forward pass fake-quantizes weights, biases and
// activations, and gradients flow through the quantizers straight-through.
inline MlpModel train(const MlpSpec& spec_in, const Dataset& ds, const TrainConfig& cfg) {
  cfg.validate();
  MlpSpec spec = spec_in;
  spec.validate();

  std::vector<std::size_t> train_idx = ds.indices(Split::train);
  std::vector<std::size_t> val_idx = ds.indices(Split::val);
  if (train_idx.empty() || val_idx.empty())
    throw std::invalid_argument("train: dataset needs non-empty train and val splits");
  if (ds.meta.pulse.param_count() != spec.output_width)
    throw std::invalid_argument("train: output width does not match the dataset's pulse dimension");

  double amax = ds.max_abs_alpha(Split::train);
  spec.alpha_scale = amax > 0.0 ? amax : 1.0;

  detail::MlpEngine engine(spec);

  std::vector<std::vector<double>> targets(ds.rows.size());
  std::vector<double> inputs(ds.rows.size());
  for (std::size_t i = 0; i < ds.rows.size(); ++i) {
    targets[i] = ds.rows[i].alpha.flat();
    for (double& v : targets[i]) v /= spec.alpha_scale;
    inputs[i] = ds.rows[i].beta / spec.beta_scale;
  }

  auto split_mse = [&](const std::vector<double>& params, const std::vector<std::size_t>& idx) {
    std::vector<double> eff = engine.effective_params(params);
    double total = 0.0;
    for (std::size_t i : idx) {
      std::vector<double> out = engine.forward(eff, inputs[i]);
      for (std::size_t j = 0; j < out.size(); ++j) {
        double e = out[j] - targets[i][j];
        total += e * e;
      }
    }
    return total / (static_cast<double>(idx.size()) * spec.output_width);
  };

  std::size_t batch = cfg.batch_size == 0 ? train_idx.size()
                                          : std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size),
                                                                  train_idx.size());

  struct RunResult {
    std::vector<double> params;
    double val = std::numeric_limits<double>::infinity();
    int best_epoch = 0;
    int epochs_run = 0;
  };

  auto run_once = [&](std::uint64_t run_seed) {
    RunResult run;
    std::vector<double> params = engine.init_params(run_seed);

    // beta2 = 0.99: the second moment tracks the full-batch gradient
    // quickly, which converges much faster than the stochastic-training
    // default on a problem this small.
    Adam adam(params.size(), cfg.learning_rate, 0.9, 0.99);
    std::vector<double> grad(params.size());
    run.params = params;

    // Adam with a fixed step size stalls in a small oscillation; halving the
    // step whenever validation stops improving refines the fit progressively
    // until early stopping decides the run is done.
    int stall = 0;
    const int stall_window = 60;

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
      run.epochs_run = epoch;
      double epoch_loss = 0.0;
      for (std::size_t start = 0; start < train_idx.size(); start += batch) {
        std::size_t end = std::min(train_idx.size(), start + batch);
        std::fill(grad.begin(), grad.end(), 0.0);
        std::vector<double> eff = engine.effective_params(params);
        double weight = 1.0 / (static_cast<double>(end - start) * spec.output_width);
        double loss = 0.0;
        for (std::size_t k = start; k < end; ++k) {
          std::size_t i = train_idx[k];
          loss += engine.accumulate_gradient(eff, inputs[i], targets[i], weight, grad);
        }
        if (!std::isfinite(loss))
          throw std::runtime_error("train: loss became non-finite; lower the learning rate");
        engine.mask_weight_gradients(params, grad);
        adam.step(params, grad);
        epoch_loss += loss;
      }
      epoch_loss /= static_cast<double>(train_idx.size()) * spec.output_width;

      double val = split_mse(params, val_idx);
      if (!std::isfinite(val))
        throw std::runtime_error("train: validation loss became non-finite; lower the learning rate");
      if (cfg.on_epoch) cfg.on_epoch(epoch, epoch_loss, val, adam.learning_rate());
      if (val < run.val) {
        run.val = val;
        run.params = params;
        run.best_epoch = epoch;
        stall = 0;
      } else {
        if (++stall >= stall_window) {
          adam.set_learning_rate(std::max(1e-10, adam.learning_rate() * 0.5));
          stall = 0;
        }
        if (epoch - run.best_epoch >= cfg.patience) break;
      }
    }
    return run;
  };

  RunResult best;
  for (int attempt = 0; attempt < cfg.restarts; ++attempt) {
    RunResult run = run_once(derive_seed(cfg.seed, static_cast<std::uint64_t>(attempt)));
    if (run.val < best.val) best = std::move(run);
  }

  MlpModel model;
  model.spec = spec;
  model.layers = detail::unflatten(spec, best.params);
  model.seed = cfg.seed;
  model.report.epochs_run = best.epochs_run;
  model.report.best_epoch = best.best_epoch;
  model.report.val_mse = best.val;
  model.report.train_mse = split_mse(best.params, train_idx);
  std::vector<std::size_t> test_idx = ds.indices(Split::test);
  if (!test_idx.empty()) model.report.test_mse = split_mse(best.params, test_idx);
  return model;
}

// Quantization-aware variant: identical to train() except that the spec must
// carry per-layer formats.
inline MlpModel train_qat(const MlpSpec& spec, const Dataset& ds, const TrainConfig& cfg) {
  if (!spec.quant) throw std::invalid_argument("train_qat: spec carries no quantization scheme");
  return train(spec, ds, cfg);
}

// ---------------------------------------------------------------------------
// Model file
// ---------------------------------------------------------------------------

inline void write_format(JsonWriter& w, const FxFormat& f) {
  w.begin_object();
  w.key("int_bits").value(f.int_bits);
  w.key("frac_bits").value(f.frac_bits);
  w.end_object();
}

inline FxFormat read_format(const nlohmann::json& j) {
  return FxFormat(j.at("int_bits").get<int>(), j.at("frac_bits").get<int>());
}

inline std::string model_to_json(const MlpModel& m) {
  JsonWriter w;
  w.begin_object();
  w.key("tool_version").value(kToolVersion);
  w.key("seed").value(static_cast<std::uint64_t>(m.seed));
  w.key("dataset_hash").value(m.dataset_hash);
  w.key("spec").begin_object();
  w.key("input_width").value(m.spec.input_width);
  w.key("hidden_widths").begin_array();
  for (int h : m.spec.hidden_widths) w.value(h);
  w.end_array();
  w.key("output_width").value(m.spec.output_width);
  w.key("beta_scale").value(m.spec.beta_scale);
  w.key("alpha_scale").value(m.spec.alpha_scale);
  w.key("activations").begin_array();
  for (int l = 0; l < m.spec.layer_count(); ++l)
    w.value(l == m.spec.layer_count() - 1 ? "linear" : "relu");
  w.end_array();
  if (m.spec.quant) {
    w.key("quantization").begin_object();
    w.key("input_format");
    write_format(w, m.spec.quant->input_format);
    w.key("weight_formats").begin_array();
    for (const FxFormat& f : m.spec.quant->weight_formats) write_format(w, f);
    w.end_array();
    w.key("act_formats").begin_array();
    for (const FxFormat& f : m.spec.quant->act_formats) write_format(w, f);
    w.end_array();
    w.end_object();
  }
  w.end_object();
  w.key("report").begin_object();
  w.key("epochs_run").value(m.report.epochs_run);
  w.key("best_epoch").value(m.report.best_epoch);
  w.key("train_mse").value(m.report.train_mse);
  w.key("val_mse").value(m.report.val_mse);
  w.key("test_mse").value(m.report.test_mse);
  w.end_object();
  w.key("layers").begin_array();
  for (const MlpLayer& l : m.layers) {
    w.begin_object();
    w.key("in").value(l.in);
    w.key("out").value(l.out);
    w.key("weights").begin_array();
    for (double v : l.weights) w.value(v);
    w.end_array();
    w.key("biases").begin_array();
    for (double v : l.biases) w.value(v);
    w.end_array();
    w.end_object();
  }
  w.end_array();
  w.end_object();
  return w.str();
}

inline MlpModel model_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  MlpModel m;
  m.seed = j.value("seed", std::uint64_t{0});
  m.dataset_hash = j.value("dataset_hash", std::string());
  const auto& s = j.at("spec");
  m.spec.input_width = s.at("input_width").get<int>();
  m.spec.hidden_widths = s.at("hidden_widths").get<std::vector<int>>();
  m.spec.output_width = s.at("output_width").get<int>();
  m.spec.beta_scale = s.at("beta_scale").get<double>();
  m.spec.alpha_scale = s.at("alpha_scale").get<double>();
  if (s.contains("quantization") && !s.at("quantization").is_null()) {
    QuantizationScheme q;
    const auto& qj = s.at("quantization");
    q.input_format = read_format(qj.at("input_format"));
    for (const auto& f : qj.at("weight_formats")) q.weight_formats.push_back(read_format(f));
    for (const auto& f : qj.at("act_formats")) q.act_formats.push_back(read_format(f));
    m.spec.quant = std::move(q);
  }
  const auto& r = j.at("report");
  m.report.epochs_run = r.at("epochs_run").get<int>();
  m.report.best_epoch = r.at("best_epoch").get<int>();
  m.report.train_mse = r.at("train_mse").get<double>();
  m.report.val_mse = r.at("val_mse").get<double>();
  m.report.test_mse = r.at("test_mse").get<double>();
  for (const auto& lj : j.at("layers")) {
    MlpLayer l;
    l.in = lj.at("in").get<int>();
    l.out = lj.at("out").get<int>();
    l.weights = lj.at("weights").get<std::vector<double>>();
    l.biases = lj.at("biases").get<std::vector<double>>();
    m.layers.push_back(std::move(l));
  }
  m.validate();
  return m;
}

inline void write_model(const std::filesystem::path& path, const MlpModel& m) {
  write_file(path, model_to_json(m));
}

inline MlpModel read_model(const std::filesystem::path& path) {
  return model_from_json(read_file(path));
}

}  // namespace qpulse
