#pragma once

#include <cmath>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qpulse/dataset.hpp"
#include "qpulse/io.hpp"
#include "qpulse/pulse.hpp"
#include "qpulse/svg.hpp"
#include "qpulse/unitary.hpp"

namespace qpulse {

using PredictFn = std::function<PulseParams(double beta)>;

// One evaluated angle. Negative entries mean "not available" (the angle is
// not a dataset row, so there is no optimized pulse to compare against).
struct FidelityPoint {
  double beta = 0.0;
  double pred_golden = -1.0;
  double pred_optimized = -1.0;
  double optimized_golden = -1.0;
};

struct CurveSummary {
  double min = -1.0;
  double mean = -1.0;
  int count = 0;
};

struct FidelityReport {
  std::string run_id;
  std::string engine;  // "float" or "quantized"
  std::string model_hash, dataset_hash;
  std::vector<std::string> warnings;
  std::vector<FidelityPoint> rows;  // sorted by beta
  CurveSummary pred_golden, pred_optimized, optimized_golden;
  double mse_normalized = -1.0;    // filled by the eval command when known
  double mse_unnormalized = -1.0;
};

namespace detail {

inline CurveSummary summarize(const std::vector<FidelityPoint>& rows, double FidelityPoint::*field) {
  CurveSummary s;
  double total = 0.0;
  for (const FidelityPoint& r : rows) {
    double v = r.*field;
    if (v < 0.0) continue;
    if (s.count == 0) s.min = v;
    s.min = std::min(s.min, v);
    total += v;
    ++s.count;
  }
  if (s.count > 0) s.mean = total / s.count;
  return s;
}

}  // namespace detail

// The three pairwise fidelity curves: predicted vs golden on every grid
// angle, plus predicted vs optimized and optimized vs golden wherever the
// angle is a dataset row.
inline FidelityReport fidelity_curve(const PredictFn& predict, const Dataset& ds,
                                     std::span<const double> grid, const PulseConfig& pcfg) {
  if (grid.empty()) throw std::invalid_argument("fidelity_curve: empty grid");
  for (double b : grid)
    if (!std::isfinite(b) || b < -M_PI - 1e-12 || b > M_PI + 1e-12)
      throw std::invalid_argument("fidelity_curve: grid angle outside [-pi, pi]");

  PulseSimulator sim(pcfg);
  FidelityReport report;
  for (double beta : grid) {
    FidelityPoint pt;
    pt.beta = beta;
    Unitary2 golden = rx_gate(beta);
    Unitary2 predicted = sim.propagate(predict(beta));
    pt.pred_golden = gate_fidelity(predicted, golden);
    if (const DatasetRow* row = ds.find_beta(beta)) {
      Unitary2 optimized = sim.propagate(row->alpha);
      pt.pred_optimized = gate_fidelity(predicted, optimized);
      pt.optimized_golden = gate_fidelity(optimized, golden);
    }
    report.rows.push_back(pt);
  }
  std::sort(report.rows.begin(), report.rows.end(),
            [](const FidelityPoint& a, const FidelityPoint& b) { return a.beta < b.beta; });
  report.pred_golden = detail::summarize(report.rows, &FidelityPoint::pred_golden);
  report.pred_optimized = detail::summarize(report.rows, &FidelityPoint::pred_optimized);
  report.optimized_golden = detail::summarize(report.rows, &FidelityPoint::optimized_golden);
  return report;
}

// ---------------------------------------------------------------------------
// Lookup-table baselines
// ---------------------------------------------------------------------------

struct LutBaseline {
  enum class Mode { nearest, linear };

  std::vector<double> betas;        // strictly increasing
  std::vector<PulseParams> alphas;

  // Evenly spaced (by row index) subsample of a dataset.
  static LutBaseline from_dataset(const Dataset& ds, int entries) {
    if (entries < 1) throw std::invalid_argument("LutBaseline: need at least one entry");
    if (ds.rows.empty()) throw std::invalid_argument("LutBaseline: empty dataset");
    entries = std::min<int>(entries, static_cast<int>(ds.rows.size()));
    LutBaseline lb;
    for (int j = 0; j < entries; ++j) {
      std::size_t i = entries == 1
                          ? 0
                          : static_cast<std::size_t>(std::llround(
                                static_cast<double>(j) * (static_cast<double>(ds.rows.size()) - 1.0) /
                                (entries - 1)));
      lb.betas.push_back(ds.rows[i].beta);
      lb.alphas.push_back(ds.rows[i].alpha);
    }
    lb.validate();
    return lb;
  }

  void validate() const {
    if (betas.empty() || betas.size() != alphas.size())
      throw std::invalid_argument("LutBaseline: table must be nonempty with matching columns");
    for (std::size_t i = 0; i + 1 < betas.size(); ++i)
      if (!(betas[i] < betas[i + 1]))
        throw std::invalid_argument("LutBaseline: betas must be strictly increasing");
  }
};

// nearest: the row minimizing |beta - beta_i|, ties to the smaller beta.
// linear: componentwise interpolation between the bracketing rows, clamped
// at the table ends.
inline PulseParams lut_predict(const LutBaseline& lb, LutBaseline::Mode mode, double beta) {
  lb.validate();
  if (!std::isfinite(beta)) throw std::invalid_argument("lut_predict: beta must be finite");

  auto it = std::lower_bound(lb.betas.begin(), lb.betas.end(), beta);
  std::size_t hi = static_cast<std::size_t>(it - lb.betas.begin());
  if (hi < lb.betas.size() && lb.betas[hi] == beta) return lb.alphas[hi];  // exact row
  if (hi == 0) return lb.alphas.front();
  if (hi == lb.betas.size()) return lb.alphas.back();
  std::size_t lo = hi - 1;

  if (mode == LutBaseline::Mode::nearest) {
    double dlo = beta - lb.betas[lo];
    double dhi = lb.betas[hi] - beta;
    return dlo <= dhi ? lb.alphas[lo] : lb.alphas[hi];  // tie goes to the smaller beta
  }

  double t = (beta - lb.betas[lo]) / (lb.betas[hi] - lb.betas[lo]);
  std::vector<double> a = lb.alphas[lo].flat();
  std::vector<double> b = lb.alphas[hi].flat();
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += t * (b[i] - a[i]);
  return PulseParams::from_flat(a);
}

struct LutComparisonRow {
  double beta = 0.0;
  double nn = -1.0;
  double nearest = -1.0;
  double linear = -1.0;
};

struct LutComparison {
  std::string run_id;
  std::string model_hash, dataset_hash;
  int table_entries = 0;
  std::vector<LutComparisonRow> rows;
  CurveSummary nn, nearest, linear;
};

// Predicted-vs-golden fidelity of the network against both table modes on a
// common evaluation grid.
inline LutComparison compare_nn_vs_lut(const PredictFn& nn, const LutBaseline& table,
                                       std::span<const double> grid, const PulseConfig& pcfg) {
  if (grid.empty()) throw std::invalid_argument("compare_nn_vs_lut: empty grid");
  table.validate();
  PulseSimulator sim(pcfg);
  LutComparison cmp;
  cmp.table_entries = static_cast<int>(table.betas.size());
  for (double beta : grid) {
    LutComparisonRow row;
    row.beta = beta;
    Unitary2 golden = rx_gate(beta);
    row.nn = gate_fidelity(sim.propagate(nn(beta)), golden);
    row.nearest = gate_fidelity(sim.propagate(lut_predict(table, LutBaseline::Mode::nearest, beta)), golden);
    row.linear = gate_fidelity(sim.propagate(lut_predict(table, LutBaseline::Mode::linear, beta)), golden);
    cmp.rows.push_back(row);
  }
  std::sort(cmp.rows.begin(), cmp.rows.end(),
            [](const LutComparisonRow& a, const LutComparisonRow& b) { return a.beta < b.beta; });
  auto summary = [&](double LutComparisonRow::*field) {
    CurveSummary s;
    double total = 0.0;
    for (const LutComparisonRow& r : cmp.rows) {
      double v = r.*field;
      if (s.count == 0) s.min = v;
      s.min = std::min(s.min, v);
      total += v;
      ++s.count;
    }
    if (s.count) s.mean = total / s.count;
    return s;
  };
  cmp.nn = summary(&LutComparisonRow::nn);
  cmp.nearest = summary(&LutComparisonRow::nearest);
  cmp.linear = summary(&LutComparisonRow::linear);
  return cmp;
}

// ---------------------------------------------------------------------------
// Bloch-sphere trajectory export
// ---------------------------------------------------------------------------

struct BlochPathPoint {
  double t = 0.0;  // ns
  double x = 0.0, y = 0.0, z = 0.0;
};

struct BlochExport {
  double beta = 0.0;
  std::vector<BlochPathPoint> pulse_path;   // |0> driven by the pulse
  std::vector<BlochPathPoint> golden_path;  // Rx(beta t / T)|0>, the great circle
  double final_overlap = 0.0;               // |<golden final | pulse final>|^2
};

inline BlochExport bloch_trajectory(const PulseParams& alpha, double beta, const PulseConfig& pcfg,
                                    int samples) {
  if (!std::isfinite(beta)) throw std::invalid_argument("bloch_trajectory: beta must be finite");
  BlochExport ex;
  ex.beta = beta;
  std::vector<TrajectorySample> traj = propagate_trajectory(alpha, pcfg, QubitState::ground(), samples);
  for (const TrajectorySample& s : traj) {
    BlochVector v = bloch_coords(s.state);
    ex.pulse_path.push_back({s.t, v.x, v.y, v.z});
    double angle = beta * s.t / pcfg.duration_ns;
    QubitState g = apply(rx_gate(angle), QubitState::ground());
    BlochVector gv = bloch_coords(g);
    ex.golden_path.push_back({s.t, gv.x, gv.y, gv.z});
  }
  QubitState golden_final = apply(rx_gate(beta), QubitState::ground());
  const QubitState& pulse_final = traj.back().state;
  complexd overlap = std::conj(golden_final.x) * pulse_final.x + std::conj(golden_final.y) * pulse_final.y;
  ex.final_overlap = std::norm(overlap);
  return ex;
}

inline std::string bloch_to_csv(const BlochExport& ex) {
  std::string out = "t,x,y,z,source\n";
  for (const BlochPathPoint& p : ex.pulse_path)
    out += format_g17(p.t) + "," + format_g17(p.x) + "," + format_g17(p.y) + "," + format_g17(p.z) +
           ",pulse\n";
  for (const BlochPathPoint& p : ex.golden_path)
    out += format_g17(p.t) + "," + format_g17(p.x) + "," + format_g17(p.y) + "," + format_g17(p.z) +
           ",golden\n";
  return out;
}

// ---------------------------------------------------------------------------
// Emission
// ---------------------------------------------------------------------------

// Thresholds checked at emission time; negative = unchecked. Violations are
// listed in the JSON and make the CLI exit nonzero, which is what CI gates
// on.
struct ReportThresholds {
  double min_pred_golden = -1.0;
  double min_pred_optimized = -1.0;
  double min_optimized_golden = -1.0;
};

struct EmitResult {
  std::vector<std::filesystem::path> files;
  std::vector<std::string> violations;
};

inline std::string fidelity_report_to_csv(const FidelityReport& r) {
  std::string out = "beta,pred_golden,pred_optimized,optimized_golden\n";
  for (const FidelityPoint& p : r.rows) {
    out += format_g17(p.beta);
    out += ',';
    out += format_g17(p.pred_golden);
    out += ',';
    if (p.pred_optimized >= 0.0) out += format_g17(p.pred_optimized);
    out += ',';
    if (p.optimized_golden >= 0.0) out += format_g17(p.optimized_golden);
    out += '\n';
  }
  return out;
}

// Rows only; summaries and provenance live in the JSON emission.
inline std::vector<FidelityPoint> fidelity_rows_from_csv(const std::string& csv) {
  std::vector<FidelityPoint> rows;
  std::size_t pos = csv.find('\n');
  if (pos == std::string::npos) return rows;
  ++pos;
  while (pos < csv.size()) {
    std::size_t eol = csv.find('\n', pos);
    if (eol == std::string::npos) eol = csv.size();
    std::string line = csv.substr(pos, eol - pos);
    pos = eol + 1;
    if (line.empty()) continue;
    std::vector<std::string> f = split_csv_line(line);
    if (f.size() != 4) throw std::invalid_argument("fidelity CSV: wrong column count");
    FidelityPoint p;
    p.beta = parse_double(f[0]);
    p.pred_golden = parse_double(f[1]);
    p.pred_optimized = f[2].empty() ? -1.0 : parse_double(f[2]);
    p.optimized_golden = f[3].empty() ? -1.0 : parse_double(f[3]);
    rows.push_back(p);
  }
  return rows;
}

namespace detail {

inline void write_summary(JsonWriter& w, const char* name, const CurveSummary& s) {
  w.key(name).begin_object();
  w.key("count").value(s.count);
  if (s.count > 0) {
    w.key("min").value(s.min);
    w.key("mean").value(s.mean);
  }
  w.end_object();
}

}  // namespace detail

inline std::string fidelity_report_to_json(const FidelityReport& r,
                                           const std::vector<std::string>& violations) {
  JsonWriter w;
  w.begin_object();
  w.key("tool_version").value(kToolVersion);
  w.key("run_id").value(r.run_id);
  w.key("engine").value(r.engine);
  w.key("model_hash").value(r.model_hash);
  w.key("dataset_hash").value(r.dataset_hash);
  w.key("warnings").begin_array();
  for (const std::string& s : r.warnings) w.value(s);
  w.end_array();
  detail::write_summary(w, "pred_golden", r.pred_golden);
  detail::write_summary(w, "pred_optimized", r.pred_optimized);
  detail::write_summary(w, "optimized_golden", r.optimized_golden);
  if (r.mse_normalized >= 0.0) {
    w.key("mse_normalized").value(r.mse_normalized);
    w.key("mse_unnormalized").value(r.mse_unnormalized);
  }
  w.key("violations").begin_array();
  for (const std::string& v : violations) w.value(v);
  w.end_array();
  w.key("rows").begin_array();
  for (const FidelityPoint& p : r.rows) {
    w.begin_object();
    w.key("beta").value(p.beta);
    w.key("pred_golden").value(p.pred_golden);
    if (p.pred_optimized >= 0.0) w.key("pred_optimized").value(p.pred_optimized);
    if (p.optimized_golden >= 0.0) w.key("optimized_golden").value(p.optimized_golden);
    w.end_object();
  }
  w.end_array();
  w.end_object();
  return w.str();
}

inline std::string fidelity_report_to_svg(const FidelityReport& r) {
  std::vector<SvgSeries> series;
  SvgSeries pg{"predicted vs golden", {}};
  SvgSeries po{"predicted vs optimized", {}};
  SvgSeries og{"optimized vs golden", {}};
  for (const FidelityPoint& p : r.rows) {
    pg.points.emplace_back(p.beta, p.pred_golden);
    if (p.pred_optimized >= 0.0) po.points.emplace_back(p.beta, p.pred_optimized);
    if (p.optimized_golden >= 0.0) og.points.emplace_back(p.beta, p.optimized_golden);
  }
  series.push_back(std::move(pg));
  if (!po.points.empty()) series.push_back(std::move(po));
  if (!og.points.empty()) series.push_back(std::move(og));
  return svg_line_chart("Gate fidelity (" + r.engine + " engine)", "beta (rad)", "fidelity", series);
}

inline std::vector<std::string> check_thresholds(const FidelityReport& r, const ReportThresholds& th) {
  std::vector<std::string> violations;
  auto check = [&](const char* name, const CurveSummary& s, double bound) {
    if (bound < 0.0 || s.count == 0) return;
    if (s.min < bound)
      violations.push_back(std::string(name) + " min fidelity " + format_g17(s.min) +
                           " is below the threshold " + format_g17(bound));
  };
  check("pred_golden", r.pred_golden, th.min_pred_golden);
  check("pred_optimized", r.pred_optimized, th.min_pred_optimized);
  check("optimized_golden", r.optimized_golden, th.min_optimized_golden);
  return violations;
}

// Writes CSV + JSON + SVG for one fidelity report. Returns the files written
// and any threshold violations.
inline EmitResult emit_report(const std::filesystem::path& out_dir, const FidelityReport& r,
                              const ReportThresholds& th = {}) {
  EmitResult result;
  result.violations = check_thresholds(r, th);
  std::string stem = "fidelity_" + r.engine + (r.run_id.empty() ? "" : "_" + r.run_id);
  std::filesystem::path csv = out_dir / (stem + ".csv");
  std::filesystem::path json = out_dir / (stem + ".json");
  std::filesystem::path svg = out_dir / (stem + ".svg");
  write_file(csv, fidelity_report_to_csv(r));
  write_file(json, fidelity_report_to_json(r, result.violations));
  write_file(svg, fidelity_report_to_svg(r));
  result.files = {csv, json, svg};
  return result;
}

inline EmitResult emit_reports(const std::filesystem::path& out_dir,
                               std::span<const FidelityReport> reports, const ReportThresholds& th = {}) {
  EmitResult all;
  for (const FidelityReport& r : reports) {
    EmitResult one = emit_report(out_dir, r, th);
    all.files.insert(all.files.end(), one.files.begin(), one.files.end());
    all.violations.insert(all.violations.end(), one.violations.begin(), one.violations.end());
  }
  return all;
}

inline std::string lut_comparison_to_csv(const LutComparison& c) {
  std::string out = "beta,nn,nearest_lut,linear_lut\n";
  for (const LutComparisonRow& r : c.rows)
    out += format_g17(r.beta) + "," + format_g17(r.nn) + "," + format_g17(r.nearest) + "," +
           format_g17(r.linear) + "\n";
  return out;
}

inline std::string lut_comparison_to_json(const LutComparison& c) {
  JsonWriter w;
  w.begin_object();
  w.key("tool_version").value(kToolVersion);
  w.key("run_id").value(c.run_id);
  w.key("model_hash").value(c.model_hash);
  w.key("dataset_hash").value(c.dataset_hash);
  w.key("table_entries").value(c.table_entries);
  detail::write_summary(w, "nn", c.nn);
  detail::write_summary(w, "nearest_lut", c.nearest);
  detail::write_summary(w, "linear_lut", c.linear);
  w.key("rows").begin_array();
  for (const LutComparisonRow& r : c.rows) {
    w.begin_object();
    w.key("beta").value(r.beta);
    w.key("nn").value(r.nn);
    w.key("nearest_lut").value(r.nearest);
    w.key("linear_lut").value(r.linear);
    w.end_object();
  }
  w.end_array();
  w.end_object();
  return w.str();
}

inline EmitResult emit_lut_comparison(const std::filesystem::path& out_dir, const LutComparison& c) {
  EmitResult result;
  std::string stem = "lut_comparison" + (c.run_id.empty() ? "" : "_" + c.run_id);
  std::filesystem::path csv = out_dir / (stem + ".csv");
  std::filesystem::path json = out_dir / (stem + ".json");
  std::filesystem::path svg = out_dir / (stem + ".svg");
  write_file(csv, lut_comparison_to_csv(c));
  write_file(json, lut_comparison_to_json(c));
  std::vector<SvgSeries> series(3);
  series[0].name = "neural network";
  series[1].name = "nearest-entry table";
  series[2].name = "linear interpolation";
  for (const LutComparisonRow& r : c.rows) {
    series[0].points.emplace_back(r.beta, r.nn);
    series[1].points.emplace_back(r.beta, r.nearest);
    series[2].points.emplace_back(r.beta, r.linear);
  }
  write_file(svg, svg_line_chart("Network vs lookup-table baselines", "beta (rad)", "fidelity", series));
  result.files = {csv, json, svg};
  return result;
}

}  // namespace qpulse
