#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "oracles.hpp"
#include "qpulse/mlp.hpp"
#include "qpulse/optimize.hpp"

using namespace qpulse;

namespace {

// tiny regression dataset: alpha = smooth function of beta, optionally
// constant or corrupted with noise the network cannot generalize from
Dataset toy_dataset(std::size_t n, bool constant = false, double noise = 0.0) {
  Dataset ds;
  ds.meta.pulse.spline_count = 10;
  ds.meta.grid_size = static_cast<int>(n);
  oracles::TestRng rng(77);
  for (std::size_t i = 0; i < n; ++i) {
    DatasetRow r;
    r.beta = -3.0 + 6.0 * static_cast<double>(i) / static_cast<double>(n - 1);
    std::vector<double> alpha(20);
    for (std::size_t j = 0; j < 20; ++j) {
      alpha[j] = constant ? (j % 3 == 0 ? 0.02 : -0.01)
                          : 0.03 * std::sin(r.beta + static_cast<double>(j)) / (1.0 + static_cast<double>(j));
      alpha[j] += noise * rng.uniform(-0.03, 0.03);
    }
    r.alpha = PulseParams::from_flat(alpha);
    r.fidelity = 0.9995;
    ds.rows.push_back(std::move(r));
  }
  split_dataset(ds, {0.6, 0.2, 0.2}, 3);
  ds.meta.alpha_scale = ds.max_abs_alpha();
  return ds;
}

MlpModel zero_model(std::vector<int> hidden, double alpha_scale) {
  MlpSpec spec;
  spec.hidden_widths = std::move(hidden);
  spec.alpha_scale = alpha_scale;
  MlpModel m;
  m.spec = spec;
  std::vector<int> w = spec.widths();
  for (std::size_t l = 0; l + 1 < w.size(); ++l) {
    MlpLayer ly;
    ly.in = w[l];
    ly.out = w[l + 1];
    ly.weights.assign(static_cast<std::size_t>(ly.in) * static_cast<std::size_t>(ly.out), 0.0);
    ly.biases.assign(static_cast<std::size_t>(ly.out), 0.0);
    m.layers.push_back(std::move(ly));
  }
  return m;
}

}  // namespace

TEST_CASE("stock spec parameter budgets", "[mlp]") {
  MlpSpec large = MlpSpec::named("large");
  CHECK(large.hidden_widths.size() == 7);
  CHECK(large.param_count() == 1054);

  MlpSpec small = MlpSpec::named("small");
  CHECK(small.hidden_widths.size() == 6);
  CHECK(small.param_count() == 790);

  CHECK(MlpSpec::named("xlarge").param_count() == 18068);
  CHECK_THROWS_AS(MlpSpec::named("medium"), std::invalid_argument);

  // the formula agrees with the actual array shapes, layer by layer
  MlpModel m = zero_model(large.hidden_widths, 1.0);
  std::int64_t total = 0;
  for (const MlpLayer& l : m.layers)
    total += static_cast<std::int64_t>(l.weights.size()) + static_cast<std::int64_t>(l.biases.size());
  CHECK(total == large.param_count());
}

TEST_CASE("all-zero model predicts the zero pulse", "[mlp]") {
  MlpModel m = zero_model({4, 4}, 0.5);
  for (double beta : {-M_PI, -1.0, 0.0, 2.0, M_PI}) {
    for (double v : mlp_forward(m, beta).flat()) CHECK(v == 0.0);
  }
}

TEST_CASE("bias-only model returns its scaled biases at beta 0", "[mlp]") {
  MlpModel m = zero_model({3}, 2.0);
  for (std::size_t i = 0; i < m.layers[1].biases.size(); ++i)
    m.layers[1].biases[i] = 0.01 * static_cast<double>(i + 1);
  std::vector<double> out = mlp_forward(m, 0.0).flat();
  for (std::size_t i = 0; i < out.size(); ++i)
    CHECK(out[i] == Catch::Approx(0.01 * static_cast<double>(i + 1) * 2.0).margin(1e-15));
}

TEST_CASE("mlp_forward validates its input", "[mlp]") {
  MlpModel m = zero_model({3}, 1.0);
  CHECK_THROWS_AS(mlp_forward(m, 3.5), std::invalid_argument);
  MlpModel untrained = zero_model({3}, 0.0);
  CHECK_THROWS_AS(mlp_forward(untrained, 0.0), std::invalid_argument);
}

TEST_CASE("backpropagation matches central finite differences", "[mlp]") {
  MlpSpec spec;
  spec.hidden_widths = {4, 4};
  spec.alpha_scale = 1.0;
  detail::MlpEngine engine(spec);

  oracles::TestRng rng(41);
  std::vector<double> params(engine.param_count());
  for (double& v : params) v = rng.uniform(-0.8, 0.8);

  std::vector<double> xs = {-0.9, -0.2, 0.4, 0.8};
  std::vector<std::vector<double>> ys;
  for (std::size_t r = 0; r < xs.size(); ++r) {
    std::vector<double> y(20);
    for (double& v : y) v = rng.uniform(-0.5, 0.5);
    ys.push_back(std::move(y));
  }

  double weight = 1.0 / (static_cast<double>(xs.size()) * 20.0);
  std::vector<double> grad(params.size(), 0.0);
  std::vector<double> eff = engine.effective_params(params);
  for (std::size_t r = 0; r < xs.size(); ++r)
    engine.accumulate_gradient(eff, xs[r], ys[r], weight, grad);

  auto loss = [&](const std::vector<double>& p) {
    std::vector<double> e = engine.effective_params(p);
    double total = 0.0;
    for (std::size_t r = 0; r < xs.size(); ++r) {
      std::vector<double> out = engine.forward(e, xs[r]);
      for (std::size_t j = 0; j < out.size(); ++j) {
        double d = out[j] - ys[r][j];
        total += d * d;
      }
    }
    return total * weight;
  };

  for (std::size_t i = 0; i < params.size(); i += 7) {  // spot-check a spread of parameters
    double fd = oracles::central_difference(loss, params, i, 1e-6);
    double denom = std::max({std::abs(grad[i]), std::abs(fd), 1e-6});
    CHECK(std::abs(grad[i] - fd) / denom <= 1e-6);
  }
}

TEST_CASE("constant targets are fit to numerical zero", "[mlp]") {
  Dataset ds = toy_dataset(20, /*constant=*/true);
  MlpSpec spec;
  spec.hidden_widths = {4};
  TrainConfig cfg;
  cfg.max_epochs = 6000;
  cfg.patience = 5999;
  MlpModel m = train(spec, ds, cfg);
  CHECK(m.report.train_mse <= 1e-10);
  CHECK(mse(m, ds, Split::train) == Catch::Approx(m.report.train_mse).margin(1e-18));
}

TEST_CASE("early stopping restores the best epoch", "[mlp]") {
  Dataset ds = toy_dataset(20, /*constant=*/false, /*noise=*/1.0);  // val cannot keep improving
  MlpSpec spec;
  spec.hidden_widths = {6, 6};
  TrainConfig cfg;
  cfg.max_epochs = 4000;
  cfg.patience = 40;
  MlpModel m = train(spec, ds, cfg);
  CHECK(m.report.epochs_run < cfg.max_epochs);
  CHECK(m.report.best_epoch <= m.report.epochs_run);
  CHECK(m.report.epochs_run - m.report.best_epoch >= cfg.patience);
  // returned weights really are the best-val snapshot
  CHECK(mse(m, ds, Split::val) == Catch::Approx(m.report.val_mse).margin(1e-18));
}

TEST_CASE("training is deterministic in the seed", "[mlp]") {
  Dataset ds = toy_dataset(16);
  MlpSpec spec;
  spec.hidden_widths = {5};
  TrainConfig cfg;
  cfg.max_epochs = 50;
  cfg.patience = 49;
  MlpModel a = train(spec, ds, cfg);
  MlpModel b = train(spec, ds, cfg);
  for (std::size_t l = 0; l < a.layers.size(); ++l) {
    CHECK(a.layers[l].weights == b.layers[l].weights);  // bitwise
    CHECK(a.layers[l].biases == b.layers[l].biases);
  }

  cfg.seed = 2;
  MlpModel c = train(spec, ds, cfg);
  CHECK(c.layers[0].weights != a.layers[0].weights);
}

TEST_CASE("diverging training aborts with a diagnostic", "[mlp]") {
  Dataset ds = toy_dataset(16);
  MlpSpec spec;
  spec.hidden_widths = {6};
  TrainConfig cfg;
  cfg.max_epochs = 500;
  cfg.patience = 499;
  cfg.learning_rate = 1e308;  // overflow the forward pass within a couple of epochs
  CHECK_THROWS_AS(train(spec, ds, cfg), std::runtime_error);
}

TEST_CASE("train validates its inputs", "[mlp]") {
  Dataset ds = toy_dataset(16);
  for (DatasetRow& r : ds.rows) r.split = Split::train;  // no val split
  MlpSpec spec;
  spec.hidden_widths = {4};
  TrainConfig cfg;
  CHECK_THROWS_AS(train(spec, ds, cfg), std::invalid_argument);

  TrainConfig bad;
  bad.patience = bad.max_epochs;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("mse rejects an empty split", "[mlp]") {
  Dataset ds = toy_dataset(16);
  for (DatasetRow& r : ds.rows) r.split = Split::train;
  MlpModel m = zero_model({4}, 1.0);
  CHECK_THROWS_AS(mse(m, ds, Split::test), std::invalid_argument);
  // zero model on normalized data: mse equals the mean squared target
  double want = 0.0;
  for (const DatasetRow& r : ds.rows)
    for (double v : r.alpha.flat()) want += (v / ds.meta.alpha_scale) * (v / ds.meta.alpha_scale);
  want /= static_cast<double>(ds.rows.size()) * 20.0;
  MlpModel zm = zero_model({4}, ds.meta.alpha_scale);
  CHECK(mse(zm, ds, Split::train) == Catch::Approx(want).epsilon(1e-12));
}

TEST_CASE("lossless quantization formats reproduce float training", "[mlp]") {
  Dataset ds = toy_dataset(16);
  TrainConfig cfg;
  cfg.max_epochs = 200;
  cfg.patience = 199;

  MlpSpec fspec;
  fspec.hidden_widths = {5, 5};
  MlpModel fm = train(fspec, ds, cfg);

  MlpSpec qspec = fspec;
  QuantizationScheme scheme;
  scheme.input_format = FxFormat(2, 55);
  scheme.weight_formats.assign(3, FxFormat(2, 55));
  scheme.act_formats.assign(3, FxFormat(2, 55));
  qspec.quant = scheme;
  MlpModel qm = train_qat(qspec, ds, cfg);

  CHECK(qm.report.val_mse == Catch::Approx(fm.report.val_mse).epsilon(1e-10));
  for (std::size_t l = 0; l < fm.layers.size(); ++l)
    for (std::size_t i = 0; i < fm.layers[l].weights.size(); ++i)
      CHECK(qm.layers[l].weights[i] == Catch::Approx(fm.layers[l].weights[i]).margin(1e-9));
}

TEST_CASE("qat survives a degenerate 1-bit fractional format", "[mlp]") {
  Dataset ds = toy_dataset(16);
  MlpSpec spec;
  spec.hidden_widths = {4};
  QuantizationScheme scheme;
  scheme.input_format = FxFormat(2, 1);
  scheme.weight_formats.assign(2, FxFormat(2, 1));
  scheme.act_formats.assign(2, FxFormat(2, 1));
  spec.quant = scheme;
  TrainConfig cfg;
  cfg.max_epochs = 50;
  cfg.patience = 49;
  MlpModel m = train_qat(spec, ds, cfg);
  CHECK(std::isfinite(m.report.val_mse));
  CHECK(std::isfinite(mse(m, ds, Split::test)));
}

TEST_CASE("train_qat requires a quantization scheme", "[mlp]") {
  Dataset ds = toy_dataset(16);
  MlpSpec spec;
  spec.hidden_widths = {4};
  CHECK_THROWS_AS(train_qat(spec, ds, TrainConfig{}), std::invalid_argument);
}

TEST_CASE("model json round trip is bit exact", "[mlp]") {
  Dataset ds = toy_dataset(16);
  MlpSpec spec;
  spec.hidden_widths = {5, 4};
  QuantizationScheme scheme;
  scheme.input_format = FxFormat(2, 11);
  scheme.weight_formats = {FxFormat(2, 11), FxFormat(2, 9), FxFormat(0, 15)};
  scheme.act_formats = {FxFormat(2, 11), FxFormat(2, 9), FxFormat(0, 15)};
  spec.quant = scheme;
  TrainConfig cfg;
  cfg.max_epochs = 30;
  cfg.patience = 29;
  MlpModel m = train_qat(spec, ds, cfg);
  m.dataset_hash = "00ff00ff00ff00ff";

  MlpModel back = model_from_json(model_to_json(m));
  CHECK(back.spec.hidden_widths == m.spec.hidden_widths);
  CHECK(back.spec.alpha_scale == m.spec.alpha_scale);
  CHECK(back.dataset_hash == m.dataset_hash);
  CHECK(back.seed == m.seed);
  REQUIRE(back.spec.quant.has_value());
  CHECK(back.spec.quant->weight_formats[2] == FxFormat(0, 15));
  CHECK(back.report.best_epoch == m.report.best_epoch);
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    CHECK(back.layers[l].weights == m.layers[l].weights);  // bitwise
    CHECK(back.layers[l].biases == m.layers[l].biases);
  }

  // predictions agree exactly after the round trip
  for (double beta : {-3.0, 0.0, 1.5})
    CHECK(mlp_forward(back, beta).flat() == mlp_forward(m, beta).flat());
}
