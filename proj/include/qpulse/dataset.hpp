#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qpulse/io.hpp"
#include "qpulse/pulse.hpp"
#include "qpulse/rng.hpp"

namespace qpulse {

enum class Split { train, val, test };

inline const char* split_name(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "train";
}

inline Split split_from_name(std::string_view name) {
  if (name == "train") return Split::train;
  if (name == "val") return Split::val;
  if (name == "test") return Split::test;
  throw std::invalid_argument("unknown split tag: '" + std::string(name) + "'");
}

struct DatasetRow {
  double beta = 0.0;        // target rotation angle, rad
  PulseParams alpha;        // optimized pulse coefficients
  double fidelity = 0.0;    // fidelity the optimizer achieved against Rx(beta)
  Split split = Split::train;
};

struct DatasetMeta {
  int grid_size = 0;
  std::uint64_t seed = 0;
  PulseConfig pulse;
  double alpha_scale = 0.0;  // max |alpha| over the rows, recorded for reference
  double target_fidelity = 0.0;
  bool warm_start = true;
  std::string tool_version = kToolVersion;
};

struct Dataset {
  std::vector<DatasetRow> rows;  // sorted by beta, strictly increasing
  DatasetMeta meta;

  const DatasetRow* find_beta(double beta, double tol = 1e-12) const {
    for (const DatasetRow& r : rows)
      if (std::abs(r.beta - beta) <= tol) return &r;
    return nullptr;
  }

  std::vector<std::size_t> indices(Split s) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (rows[i].split == s) out.push_back(i);
    return out;
  }

  std::size_t count(Split s) const { return indices(s).size(); }

  double max_abs_alpha() const {
    double m = 0.0;
    for (const DatasetRow& r : rows)
      for (double v : r.alpha.flat()) m = std::max(m, std::abs(v));
    return m;
  }

  double max_abs_alpha(Split s) const {
    double m = 0.0;
    for (const DatasetRow& r : rows) {
      if (r.split != s) continue;
      for (double v : r.alpha.flat()) m = std::max(m, std::abs(v));
    }
    return m;
  }

  void validate() const {
    for (std::size_t i = 0; i + 1 < rows.size(); ++i)
      if (!(rows[i].beta < rows[i + 1].beta))
        throw std::invalid_argument("Dataset: betas must be strictly increasing");
    for (const DatasetRow& r : rows) {
      r.alpha.validate_for(meta.pulse);
      if (std::abs(r.beta + M_PI) < 1e-12)
        throw std::invalid_argument("Dataset: beta = -pi row should have been removed");
    }
  }
};

// Shuffle by seed, then assign contiguous blocks. Counts are floor(n * f)
// per split with the remainder going to train.
inline void split_dataset(Dataset& ds, std::array<double, 3> fractions, std::uint64_t seed) {
  if (ds.rows.empty()) throw std::invalid_argument("split_dataset: empty dataset");
  double sum = fractions[0] + fractions[1] + fractions[2];
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("split_dataset: fractions must sum to 1");
  for (double f : fractions)
    if (f < 0.0) throw std::invalid_argument("split_dataset: fractions must be non-negative");

  std::size_t n = ds.rows.size();
  auto block = [n](double f) {
    return static_cast<std::size_t>(std::floor(static_cast<double>(n) * f + 1e-9));
  };
  std::size_t n_train = block(fractions[0]);
  std::size_t n_val = block(fractions[1]);
  std::size_t n_test = block(fractions[2]);
  n_train += n - (n_train + n_val + n_test);  // remainder

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  SplitMix64 rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    std::size_t j = static_cast<std::size_t>(rng.below(i + 1));
    std::swap(order[i], order[j]);
  }

  for (std::size_t i = 0; i < n; ++i) {
    Split s = i < n_train ? Split::train : (i < n_train + n_val ? Split::val : Split::test);
    ds.rows[order[i]].split = s;
  }
}

// ---------------------------------------------------------------------------
// Serialization. CSV column layout: beta,alpha_0..alpha_{2D-1},fidelity,split
// with 17-significant-digit decimals; the companion JSON carries the
// generation metadata.
// ---------------------------------------------------------------------------

inline std::string dataset_to_csv(const Dataset& ds) {
  int nalpha = ds.meta.pulse.param_count();
  std::string out = "beta";
  for (int i = 0; i < nalpha; ++i) out += ",alpha_" + std::to_string(i);
  out += ",fidelity,split\n";
  for (const DatasetRow& r : ds.rows) {
    out += format_g17(r.beta);
    for (double v : r.alpha.flat()) {
      out += ',';
      out += format_g17(v);
    }
    out += ',';
    out += format_g17(r.fidelity);
    out += ',';
    out += split_name(r.split);
    out += '\n';
  }
  return out;
}

inline std::string dataset_meta_to_json(const DatasetMeta& m) {
  JsonWriter w;
  w.begin_object();
  w.key("grid_size").value(m.grid_size);
  w.key("seed").value(static_cast<std::uint64_t>(m.seed));
  w.key("pulse").begin_object();
  w.key("duration_ns").value(m.pulse.duration_ns);
  w.key("spline_count").value(m.pulse.spline_count);
  w.key("carrier_count").value(m.pulse.carrier_count);
  w.key("time_steps").value(m.pulse.time_steps);
  w.end_object();
  w.key("alpha_scale").value(m.alpha_scale);
  w.key("target_fidelity").value(m.target_fidelity);
  w.key("warm_start").value(m.warm_start);
  w.key("tool_version").value(m.tool_version);
  w.end_object();
  return w.str();
}

inline DatasetMeta dataset_meta_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  DatasetMeta m;
  m.grid_size = j.at("grid_size").get<int>();
  m.seed = j.at("seed").get<std::uint64_t>();
  const auto& p = j.at("pulse");
  m.pulse.duration_ns = p.at("duration_ns").get<double>();
  m.pulse.spline_count = p.at("spline_count").get<int>();
  m.pulse.carrier_count = p.at("carrier_count").get<int>();
  m.pulse.time_steps = p.at("time_steps").get<int>();
  m.alpha_scale = j.at("alpha_scale").get<double>();
  m.target_fidelity = j.at("target_fidelity").get<double>();
  m.warm_start = j.at("warm_start").get<bool>();
  m.tool_version = j.value("tool_version", std::string());
  return m;
}

inline Dataset dataset_from_csv(const std::string& csv, const std::string& meta_json) {
  Dataset ds;
  ds.meta = dataset_meta_from_json(meta_json);
  int nalpha = ds.meta.pulse.param_count();

  std::size_t pos = 0;
  bool header = true;
  while (pos < csv.size()) {
    std::size_t eol = csv.find('\n', pos);
    if (eol == std::string::npos) eol = csv.size();
    std::string line = csv.substr(pos, eol - pos);
    pos = eol + 1;
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<std::string> f = split_csv_line(line);
    if (static_cast<int>(f.size()) != nalpha + 3)
      throw std::invalid_argument("dataset CSV: wrong column count");
    DatasetRow r;
    r.beta = parse_double(f[0]);
    std::vector<double> alpha(static_cast<std::size_t>(nalpha));
    for (int i = 0; i < nalpha; ++i) alpha[static_cast<std::size_t>(i)] = parse_double(f[static_cast<std::size_t>(i) + 1]);
    r.alpha = PulseParams::from_flat(alpha);
    r.fidelity = parse_double(f[static_cast<std::size_t>(nalpha) + 1]);
    r.split = split_from_name(f[static_cast<std::size_t>(nalpha) + 2]);
    ds.rows.push_back(std::move(r));
  }
  ds.validate();
  return ds;
}

inline std::filesystem::path dataset_meta_path(const std::filesystem::path& csv_path) {
  std::filesystem::path p = csv_path;
  p.replace_extension(".meta.json");
  return p;
}

inline void write_dataset(const std::filesystem::path& csv_path, const Dataset& ds) {
  write_file(csv_path, dataset_to_csv(ds));
  write_file(dataset_meta_path(csv_path), dataset_meta_to_json(ds.meta));
}

inline Dataset read_dataset(const std::filesystem::path& csv_path) {
  return dataset_from_csv(read_file(csv_path), read_file(dataset_meta_path(csv_path)));
}

}  // namespace qpulse
