#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qpulse {

// Signed fixed-point format <W, I, Fr>: one sign bit, I integer bits, Fr
// fractional bits, W = 1 + I + Fr. Representable range [-2^I, 2^I - 2^-Fr]
// at resolution 2^-Fr. Rounding is half-to-even; overflow saturates. Both
// choices are pinned so quantized inference is bit-exact everywhere.
struct FxFormat {
  int int_bits = 0;   // excludes the sign bit
  int frac_bits = 0;

  FxFormat() = default;
  FxFormat(int i, int f) : int_bits(i), frac_bits(f) { validate(); }

  static FxFormat from_width(int width, int i) { return FxFormat(i, width - 1 - i); }

  void validate() const {
    if (int_bits < 0 || frac_bits < 0) throw std::invalid_argument("FxFormat: negative bit counts");
    if (width() < 2) throw std::invalid_argument("FxFormat: total width must be at least 2");
    if (int_bits + frac_bits > 61)
      throw std::invalid_argument("FxFormat: wider than the 64-bit code arithmetic supports");
  }

  int width() const { return 1 + int_bits + frac_bits; }
  double resolution() const { return std::ldexp(1.0, -frac_bits); }
  double min_value() const { return -std::ldexp(1.0, int_bits); }
  double max_value() const { return std::ldexp(1.0, int_bits) - resolution(); }
  std::int64_t min_code() const { return -(std::int64_t{1} << (int_bits + frac_bits)); }
  std::int64_t max_code() const { return (std::int64_t{1} << (int_bits + frac_bits)) - 1; }

  bool in_range(double x) const { return x >= min_value() && x <= max_value(); }

  // round-half-even to the nearest code, saturating at the range ends
  std::int64_t quantize_code(double x) const {
    if (!std::isfinite(x)) throw std::invalid_argument("FxFormat: cannot quantize a non-finite value");
    double y = std::ldexp(x, frac_bits);
    double lo = static_cast<double>(min_code());
    double hi = static_cast<double>(max_code());
    if (y <= lo) return min_code();
    if (y >= hi) return max_code();
    double f = std::floor(y);
    double r = y - f;
    std::int64_t q = static_cast<std::int64_t>(f);
    if (r > 0.5)
      ++q;
    else if (r == 0.5 && (q & 1))
      ++q;
    return q;
  }

  double decode(std::int64_t code) const { return std::ldexp(static_cast<double>(code), -frac_bits); }

  // quantize-then-decode; the fake-quantization step used during training
  double quantize_value(double x) const { return decode(quantize_code(x)); }

  bool operator==(const FxFormat& o) const = default;

  std::string describe() const {
    return "<" + std::to_string(width()) + "," + std::to_string(int_bits) + ">";
  }
};

// Per-layer fixed-point assignment for a network: one weight format and one
// post-activation format per dense layer, plus the format the normalized
// input is quantized to. Biases share the weight format of their layer.
struct QuantizationScheme {
  FxFormat input_format;
  std::vector<FxFormat> weight_formats;
  std::vector<FxFormat> act_formats;

  void validate(int layer_count) const {
    if (static_cast<int>(weight_formats.size()) != layer_count ||
        static_cast<int>(act_formats.size()) != layer_count)
      throw std::invalid_argument("QuantizationScheme: need one weight and one activation format per layer");
    input_format.validate();
    for (const FxFormat& f : weight_formats) f.validate();
    for (const FxFormat& f : act_formats) f.validate();
  }
};

// Built-in precision presets, named after the development boards they were
// sized for. Word widths count the sign bit; integer bits do not.
//
//   genesys16:  every layer <16,6>
//   ultra96:    2 integer bits everywhere; 11-bit words on the first and
//               last layers, 10-bit words in between
//   arty-mixed: words 14,12,12 on the first three layers, 10 in between,
//               16 on the output layer; 2 integer bits except the output,
//               which has zero
inline QuantizationScheme quant_preset(std::string_view name, int layer_count) {
  if (layer_count < 1) throw std::invalid_argument("quant_preset: need at least one layer");
  QuantizationScheme s;
  auto fill = [&](const std::vector<FxFormat>& per_layer, FxFormat input) {
    s.weight_formats = per_layer;
    s.act_formats = per_layer;
    s.input_format = input;
  };
  if (name == "genesys16") {
    FxFormat f = FxFormat::from_width(16, 6);
    fill(std::vector<FxFormat>(static_cast<std::size_t>(layer_count), f), f);
  } else if (name == "ultra96") {
    FxFormat wide = FxFormat::from_width(11, 2);
    FxFormat narrow = FxFormat::from_width(10, 2);
    std::vector<FxFormat> per(static_cast<std::size_t>(layer_count), narrow);
    per.front() = wide;
    per.back() = wide;
    fill(per, wide);
  } else if (name == "arty-mixed") {
    if (layer_count < 4)
      throw std::invalid_argument("quant_preset: arty-mixed needs at least 4 layers");
    std::vector<FxFormat> per(static_cast<std::size_t>(layer_count), FxFormat::from_width(10, 2));
    per[0] = FxFormat::from_width(14, 2);
    per[1] = FxFormat::from_width(12, 2);
    per[2] = FxFormat::from_width(12, 2);
    per[static_cast<std::size_t>(layer_count) - 1] = FxFormat::from_width(16, 0);
    fill(per, per[0]);
  } else {
    throw std::invalid_argument("quant_preset: unknown preset '" + std::string(name) +
                                "' (known: genesys16, ultra96, arty-mixed)");
  }
  return s;
}

// Round-half-even right shift by k bits (k >= 0), the integer twin of
// quantize_code for rescaling exact accumulator values.
inline std::int64_t shift_round_half_even(std::int64_t v, int k) {
  if (k <= 0) return v << (-k);
  std::int64_t q = v >> k;                       // arithmetic, floor
  std::int64_t r = v - (q << k);                 // non-negative remainder
  std::int64_t half = std::int64_t{1} << (k - 1);
  if (r > half)
    ++q;
  else if (r == half && (q & 1))
    ++q;
  return q;
}

inline std::int64_t saturate_code(std::int64_t v, const FxFormat& f) {
  if (v < f.min_code()) return f.min_code();
  if (v > f.max_code()) return f.max_code();
  return v;
}

}  // namespace qpulse
