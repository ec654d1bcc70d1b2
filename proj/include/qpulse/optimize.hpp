#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "qpulse/adam.hpp"
#include "qpulse/dataset.hpp"
#include "qpulse/pulse.hpp"
#include "qpulse/rng.hpp"
#include "qpulse/unitary.hpp"

namespace qpulse {

struct OptimizerConfig {
  int max_iterations = 5000;
  double target_fidelity = 0.999;
  double learning_rate = 0.02;  // rad/ns per Adam step
  double init_scale = 0.05;     // rad/ns, uniform random init amplitude
  std::uint64_t seed = 1;
  bool warm_start = true;

  // Internal schedule: halve the step size whenever the best fidelity has
  // not improved for this many iterations. Lets the same learning rate cover
  // both the far-from-optimum travel and the final approach.
  int plateau_window = 40;
  double min_learning_rate = 1e-7;

  void validate() const {
    if (!(target_fidelity > 0.0) || !(target_fidelity < 1.0))
      throw std::invalid_argument("OptimizerConfig: target_fidelity must be in (0, 1)");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("OptimizerConfig: learning_rate must be positive");
    if (max_iterations < 0) throw std::invalid_argument("OptimizerConfig: max_iterations must be >= 0");
    if (!(init_scale >= 0.0)) throw std::invalid_argument("OptimizerConfig: init_scale must be >= 0");
    if (plateau_window < 1) throw std::invalid_argument("OptimizerConfig: plateau_window must be >= 1");
  }
};

struct OptimizeResult {
  PulseParams alpha;   // best pulse seen
  double fidelity = 0.0;
  int iterations = 0;
  bool converged = false;
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(std::string what, std::vector<double> betas)
      : std::runtime_error(std::move(what)), failed_betas(std::move(betas)) {}
  std::vector<double> failed_betas;
};

inline PulseParams random_pulse(int spline_count, double scale, std::uint64_t seed) {
  SplitMix64 rng(seed);
  PulseParams a = PulseParams::zeros(spline_count);
  for (double& v : a.p_coeffs) v = rng.uniform(-scale, scale);
  for (double& v : a.q_coeffs) v = rng.uniform(-scale, scale);
  return a;
}

// Adam ascent on F(alpha) = gate_fidelity(rx_gate(beta), propagate(alpha)).
// Stops as soon as F reaches the target; otherwise reports the best pulse
// seen with converged = false.
inline OptimizeResult optimize_pulse(double beta, const PulseParams& init, const OptimizerConfig& cfg,
                                     const PulseConfig& pcfg) {
  cfg.validate();
  pcfg.validate();
  init.validate_for(pcfg);
  if (!std::isfinite(beta) || beta < -M_PI - 1e-12 || beta > M_PI + 1e-12)
    throw std::invalid_argument("optimize_pulse: beta must lie in [-pi, pi]");

  PulseSimulator sim(pcfg);
  Unitary2 target = rx_gate(beta);

  std::vector<double> x = init.flat();
  FidelityGradient fg = sim.fidelity_and_gradient(init, target);

  OptimizeResult best;
  best.alpha = init;
  best.fidelity = fg.fidelity;
  best.iterations = 0;
  if (fg.fidelity >= cfg.target_fidelity) {
    best.converged = true;
    return best;
  }

  // Start with steps well below the estimated distance to the optimum: near
  // the top the landscape is quadratic with 1 - F ~ (T d)^2 / 3 for a
  // coefficient-space offset d, so d ~ sqrt(3 (1 - F)) / T. Warm starts
  // that begin just below target then creep over the threshold instead of
  // jumping past it, which keeps the optimized pulses a smooth function of
  // beta and the achieved fidelities tightly grouped above the target.
  double distance = std::sqrt(3.0 * std::max(0.0, 1.0 - fg.fidelity)) / pcfg.duration_ns;
  Adam adam(x.size(), std::min(cfg.learning_rate, 0.15 * distance));
  std::vector<double> neg(x.size());
  int since_improve = 0;
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    for (std::size_t i = 0; i < x.size(); ++i) neg[i] = -fg.gradient[i];
    adam.step(x, neg);

    PulseParams current = PulseParams::from_flat(x);
    fg = sim.fidelity_and_gradient(current, target);

    if (fg.fidelity > best.fidelity) {
      best.fidelity = fg.fidelity;
      best.alpha = current;
      best.iterations = it;
      since_improve = 0;
    } else if (++since_improve >= cfg.plateau_window) {
      adam.set_learning_rate(std::max(cfg.min_learning_rate, adam.learning_rate() * 0.5));
      since_improve = 0;
    }

    if (fg.fidelity >= cfg.target_fidelity) {
      best.alpha = current;
      best.fidelity = fg.fidelity;
      best.iterations = it;
      best.converged = true;
      return best;
    }
  }
  best.iterations = cfg.max_iterations;
  return best;
}

inline std::vector<double> beta_grid(int grid_size) {
  if (grid_size < 2) throw std::invalid_argument("beta_grid: need at least 2 points");
  std::vector<double> betas(static_cast<std::size_t>(grid_size));
  for (int i = 0; i < grid_size; ++i)
    betas[static_cast<std::size_t>(i)] = -M_PI + 2.0 * M_PI * static_cast<double>(i) / (grid_size - 1);
  return betas;
}

// Optimize a pulse for every beta on the uniform grid over [-pi, pi], then
// drop the beta = -pi row: it realizes the same gate as +pi but with the
// opposite rotation direction, which poisons the angle-to-pulse regression.
//
// warm_start seeds each optimization with the previous solution, producing a
// smooth alpha-vs-beta curve; otherwise every row starts from its own seeded
// random pulse and `jobs` worker threads may be used.
inline Dataset generate_dataset(int grid_size, const OptimizerConfig& cfg, const PulseConfig& pcfg,
                                int jobs = 1) {
  cfg.validate();
  pcfg.validate();
  std::vector<double> betas = beta_grid(grid_size);
  std::vector<OptimizeResult> results(betas.size());

  if (cfg.warm_start) {
    PulseParams init = random_pulse(pcfg.spline_count, cfg.init_scale, derive_seed(cfg.seed, 0));
    for (std::size_t i = 0; i < betas.size(); ++i) {
      results[i] = optimize_pulse(betas[i], init, cfg, pcfg);
      init = results[i].alpha;  // next beta continues from here
    }
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
      while (true) {
        std::size_t i = next.fetch_add(1);
        if (i >= betas.size()) return;
        PulseParams init = random_pulse(pcfg.spline_count, cfg.init_scale, derive_seed(cfg.seed, i));
        results[i] = optimize_pulse(betas[i], init, cfg, pcfg);
      }
    };
    int n_threads = std::max(1, jobs);
    if (n_threads == 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      pool.reserve(static_cast<std::size_t>(n_threads));
      for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
      for (std::thread& t : pool) t.join();
    }
  }

  std::vector<double> failed;
  for (std::size_t i = 0; i < betas.size(); ++i)
    if (!results[i].converged) failed.push_back(betas[i]);
  if (!failed.empty()) {
    std::string msg = "optimizer failed to reach the target fidelity at beta =";
    for (double b : failed) msg += " " + format_g17(b);
    throw ConvergenceError(msg, failed);
  }

  Dataset ds;
  ds.meta.grid_size = grid_size;
  ds.meta.seed = cfg.seed;
  ds.meta.pulse = pcfg;
  ds.meta.target_fidelity = cfg.target_fidelity;
  ds.meta.warm_start = cfg.warm_start;
  for (std::size_t i = 0; i < betas.size(); ++i) {
    if (std::abs(betas[i] + M_PI) < 1e-12) continue;  // the -pi row
    DatasetRow row;
    row.beta = betas[i];
    row.alpha = results[i].alpha;
    row.fidelity = results[i].fidelity;
    ds.rows.push_back(std::move(row));
  }
  ds.meta.alpha_scale = ds.max_abs_alpha();
  ds.validate();
  return ds;
}

}  // namespace qpulse
