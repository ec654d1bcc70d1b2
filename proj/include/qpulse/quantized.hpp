#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qpulse/fixed_point.hpp"
#include "qpulse/io.hpp"
#include "qpulse/mlp.hpp"

namespace qpulse {

struct QuantizedLayer {
  int in = 0, out = 0;
  FxFormat weight_format;  // also used for the biases
  FxFormat act_format;     // post-activation output format
  std::vector<std::int64_t> weight_codes;  // row-major, out x in
  std::vector<std::int64_t> bias_codes;
};

// Integer-only model: inference works purely on fixed-point codes (plus one
// final rescale by alpha_scale), so results are identical on every platform.
struct QuantizedModel {
  std::vector<QuantizedLayer> layers;
  FxFormat input_format;
  double beta_scale = M_PI;
  double alpha_scale = 0.0;
  std::string model_hash;  // hash of the float model file this came from

  const FxFormat& output_format() const { return layers.back().act_format; }

  void validate() const {
    if (layers.empty()) throw std::invalid_argument("QuantizedModel: no layers");
    if (!(alpha_scale > 0.0)) throw std::invalid_argument("QuantizedModel: alpha_scale must be positive");
    int prev_width = input_format.width();
    int prev_frac = input_format.frac_bits;
    for (const QuantizedLayer& l : layers) {
      if (l.weight_codes.size() != static_cast<std::size_t>(l.in) * static_cast<std::size_t>(l.out) ||
          l.bias_codes.size() != static_cast<std::size_t>(l.out))
        throw std::invalid_argument("QuantizedModel: code array size mismatch");
      for (std::int64_t c : l.weight_codes)
        if (c < l.weight_format.min_code() || c > l.weight_format.max_code())
          throw std::invalid_argument("QuantizedModel: weight code out of range");
      for (std::int64_t c : l.bias_codes)
        if (c < l.weight_format.min_code() || c > l.weight_format.max_code())
          throw std::invalid_argument("QuantizedModel: bias code out of range");
      // products and a fan-in sum must fit the 64-bit accumulator exactly
      int acc_bits = (l.weight_format.width() - 1) + (prev_width - 1);
      int fan = l.in;
      while (fan > 0) {
        ++acc_bits;
        fan >>= 1;
      }
      // the aligned bias can outgrow the product terms when the input
      // fraction is wide
      acc_bits = std::max(acc_bits, l.weight_format.width() + prev_frac);
      if (acc_bits > 62) throw std::invalid_argument("QuantizedModel: accumulator would overflow 64 bits");
      prev_width = l.act_format.width();
      prev_frac = l.act_format.frac_bits;
    }
  }
};

// Quantize a trained float model's weights and biases to the given formats.
inline QuantizedModel quantize_model(const MlpModel& m, const QuantizationScheme& scheme) {
  m.validate();
  scheme.validate(m.spec.layer_count());
  if (!(m.spec.alpha_scale > 0.0))
    throw std::invalid_argument("quantize_model: model has no alpha_scale (untrained?)");

  QuantizedModel qm;
  qm.input_format = scheme.input_format;
  qm.beta_scale = m.spec.beta_scale;
  qm.alpha_scale = m.spec.alpha_scale;
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    const MlpLayer& src = m.layers[l];
    QuantizedLayer out;
    out.in = src.in;
    out.out = src.out;
    out.weight_format = scheme.weight_formats[l];
    out.act_format = scheme.act_formats[l];
    out.weight_codes.reserve(src.weights.size());
    for (double w : src.weights) out.weight_codes.push_back(out.weight_format.quantize_code(w));
    out.bias_codes.reserve(src.biases.size());
    for (double b : src.biases) out.bias_codes.push_back(out.weight_format.quantize_code(b));
    qm.layers.push_back(std::move(out));
  }
  qm.validate();
  return qm;
}

// Preset by name; "model" reuses the scheme the model was trained with.
inline QuantizedModel quantize_model(const MlpModel& m, std::string_view preset) {
  if (preset == "model") {
    if (!m.spec.quant)
      throw std::invalid_argument("quantize_model: model carries no quantization scheme; pass a preset");
    return quantize_model(m, *m.spec.quant);
  }
  return quantize_model(m, quant_preset(preset, m.spec.layer_count()));
}

// Integer output codes for one input; the bit-exact surface.
inline std::vector<std::int64_t> quantized_infer_codes(const QuantizedModel& qm, double beta) {
  qm.validate();
  if (!std::isfinite(beta) || beta < -M_PI - 1e-12 || beta > M_PI + 1e-12)
    throw std::invalid_argument("quantized_infer: beta must lie in [-pi, pi]");

  std::vector<std::int64_t> act{qm.input_format.quantize_code(beta / qm.beta_scale)};
  int prev_frac = qm.input_format.frac_bits;

  for (std::size_t l = 0; l < qm.layers.size(); ++l) {
    const QuantizedLayer& layer = qm.layers[l];
    bool hidden = l + 1 != qm.layers.size();
    std::vector<std::int64_t> next(static_cast<std::size_t>(layer.out));
    int shift = layer.weight_format.frac_bits + prev_frac - layer.act_format.frac_bits;
    for (int i = 0; i < layer.out; ++i) {
      const std::int64_t* w =
          layer.weight_codes.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(layer.in);
      std::int64_t acc = layer.bias_codes[static_cast<std::size_t>(i)] << prev_frac;
      for (int j = 0; j < layer.in; ++j) acc += w[j] * act[static_cast<std::size_t>(j)];
      if (hidden && acc < 0) acc = 0;  // ReLU, exact on the accumulator
      next[static_cast<std::size_t>(i)] =
          saturate_code(shift_round_half_even(acc, shift), layer.act_format);
    }
    act = std::move(next);
    prev_frac = layer.act_format.frac_bits;
  }
  return act;
}

// Physical-units prediction: decode the output codes and rescale.
inline PulseParams quantized_infer(const QuantizedModel& qm, double beta) {
  std::vector<std::int64_t> codes = quantized_infer_codes(qm, beta);
  std::vector<double> out(codes.size());
  const FxFormat& of = qm.output_format();
  for (std::size_t i = 0; i < codes.size(); ++i) out[i] = of.decode(codes[i]) * qm.alpha_scale;
  return PulseParams::from_flat(out);
}

// ---------------------------------------------------------------------------
// FPGA resource estimate: one multiplier per weight (reuse factor 1, fully
// parallel). A multiplier maps to LUTs when both operand widths are 12 bits
// or fewer, otherwise to a DSP block.
// ---------------------------------------------------------------------------

inline constexpr int kLutMultiplierMaxBits = 12;

struct LayerResource {
  int index = 0;
  int fan_in = 0, fan_out = 0;
  std::int64_t multipliers = 0;
  int weight_width = 0;
  int input_act_width = 0;
  bool lut_mapped = false;
};

struct ResourceReport {
  std::vector<LayerResource> layers;
  std::int64_t dsp_multipliers = 0;
  std::int64_t lut_multipliers = 0;
  std::int64_t total_multipliers = 0;
  std::int64_t total_parameters = 0;
  int reuse_factor = 1;
};

inline ResourceReport resource_report(const QuantizedModel& qm) {
  qm.validate();
  ResourceReport r;
  int prev_width = qm.input_format.width();
  for (std::size_t l = 0; l < qm.layers.size(); ++l) {
    const QuantizedLayer& layer = qm.layers[l];
    LayerResource lr;
    lr.index = static_cast<int>(l);
    lr.fan_in = layer.in;
    lr.fan_out = layer.out;
    lr.multipliers = static_cast<std::int64_t>(layer.in) * layer.out;
    lr.weight_width = layer.weight_format.width();
    lr.input_act_width = prev_width;
    lr.lut_mapped = std::max(lr.weight_width, lr.input_act_width) <= kLutMultiplierMaxBits;
    r.layers.push_back(lr);

    r.total_multipliers += lr.multipliers;
    (lr.lut_mapped ? r.lut_multipliers : r.dsp_multipliers) += lr.multipliers;
    r.total_parameters += lr.multipliers + layer.out;
    prev_width = layer.act_format.width();
  }
  return r;
}

inline std::string resource_report_to_json(const ResourceReport& r) {
  JsonWriter w;
  w.begin_object();
  w.key("reuse_factor").value(r.reuse_factor);
  w.key("total_parameters").value(static_cast<std::int64_t>(r.total_parameters));
  w.key("total_multipliers").value(static_cast<std::int64_t>(r.total_multipliers));
  w.key("dsp_multipliers").value(static_cast<std::int64_t>(r.dsp_multipliers));
  w.key("lut_multipliers").value(static_cast<std::int64_t>(r.lut_multipliers));
  w.key("layers").begin_array();
  for (const LayerResource& l : r.layers) {
    w.begin_object();
    w.key("index").value(l.index);
    w.key("fan_in").value(l.fan_in);
    w.key("fan_out").value(l.fan_out);
    w.key("multipliers").value(static_cast<std::int64_t>(l.multipliers));
    w.key("weight_width").value(l.weight_width);
    w.key("input_act_width").value(l.input_act_width);
    w.key("mapped_to").value(l.lut_mapped ? "lut" : "dsp");
    w.end_object();
  }
  w.end_array();
  w.end_object();
  return w.str();
}

inline std::string resource_report_table(const ResourceReport& r) {
  char buf[160];
  std::string out;
  out += "layer  fan_in  fan_out  mults  w_bits  a_bits  mapped\n";
  for (const LayerResource& l : r.layers) {
    std::snprintf(buf, sizeof(buf), "%5d  %6d  %7d  %5lld  %6d  %6d  %s\n", l.index, l.fan_in,
                  l.fan_out, static_cast<long long>(l.multipliers), l.weight_width,
                  l.input_act_width, l.lut_mapped ? "lut" : "dsp");
    out += buf;
  }
  std::snprintf(buf, sizeof(buf),
                "total multipliers %lld (dsp %lld, lut %lld), parameters %lld, reuse factor %d\n",
                static_cast<long long>(r.total_multipliers), static_cast<long long>(r.dsp_multipliers),
                static_cast<long long>(r.lut_multipliers), static_cast<long long>(r.total_parameters),
                r.reuse_factor);
  out += buf;
  return out;
}

// ---------------------------------------------------------------------------
// Quantized model file
// ---------------------------------------------------------------------------

inline std::string quantized_model_to_json(const QuantizedModel& qm) {
  JsonWriter w;
  w.begin_object();
  w.key("tool_version").value(kToolVersion);
  w.key("model_hash").value(qm.model_hash);
  w.key("beta_scale").value(qm.beta_scale);
  w.key("alpha_scale").value(qm.alpha_scale);
  w.key("input_format");
  write_format(w, qm.input_format);
  w.key("layers").begin_array();
  for (const QuantizedLayer& l : qm.layers) {
    w.begin_object();
    w.key("in").value(l.in);
    w.key("out").value(l.out);
    w.key("weight_format");
    write_format(w, l.weight_format);
    w.key("act_format");
    write_format(w, l.act_format);
    w.key("weight_codes").begin_array();
    for (std::int64_t c : l.weight_codes) w.value(c);
    w.end_array();
    w.key("bias_codes").begin_array();
    for (std::int64_t c : l.bias_codes) w.value(c);
    w.end_array();
    w.end_object();
  }
  w.end_array();
  w.end_object();
  return w.str();
}

inline QuantizedModel quantized_model_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  QuantizedModel qm;
  qm.model_hash = j.value("model_hash", std::string());
  qm.beta_scale = j.at("beta_scale").get<double>();
  qm.alpha_scale = j.at("alpha_scale").get<double>();
  qm.input_format = read_format(j.at("input_format"));
  for (const auto& lj : j.at("layers")) {
    QuantizedLayer l;
    l.in = lj.at("in").get<int>();
    l.out = lj.at("out").get<int>();
    l.weight_format = read_format(lj.at("weight_format"));
    l.act_format = read_format(lj.at("act_format"));
    l.weight_codes = lj.at("weight_codes").get<std::vector<std::int64_t>>();
    l.bias_codes = lj.at("bias_codes").get<std::vector<std::int64_t>>();
    qm.layers.push_back(std::move(l));
  }
  qm.validate();
  return qm;
}

inline void write_quantized_model(const std::filesystem::path& path, const QuantizedModel& qm) {
  write_file(path, quantized_model_to_json(qm));
}

inline QuantizedModel read_quantized_model(const std::filesystem::path& path) {
  return quantized_model_from_json(read_file(path));
}

}  // namespace qpulse
