#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qpulse {

inline constexpr const char* kToolVersion = "0.1.0";

// Thrown for filesystem problems; the CLI maps it to its I/O exit code.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Shortest text form that still round-trips a double exactly through strtod.
inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline double parse_double(std::string_view field) {
  std::string s(field);
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || s.empty())
    throw std::invalid_argument("not a number: '" + s + "'");
  return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

// FNV-1a, used for provenance hashes of emitted/consumed files.
inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string to_hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (!in.good() && !in.eof()) throw IoError("read failed: " + path.string());
  return ss.str();
}

// Whole-buffer write so that a failure never leaves a partial file behind.
inline void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out.good()) throw IoError("write failed: " + path.string());
}

inline std::string file_hash_hex(const std::filesystem::path& path) {
  return to_hex(fnv1a64(read_file(path)));
}

// Minimal JSON emitter. We write our own so every floating-point field goes
// out as %.17g; parsing is done with nlohmann::json, which accepts this
// output unchanged. Keys keep insertion order, making emissions byte-stable.
class JsonWriter {
 public:
  JsonWriter& begin_object() { return open('{', '}'); }
  JsonWriter& end_object() { return close('}'); }
  JsonWriter& begin_array() { return open('[', ']'); }
  JsonWriter& end_array() { return close(']'); }

  JsonWriter& key(std::string_view k) {
    comma();
    indent();
    out_ += '"';
    escape(k);
    out_ += "\": ";
    pending_value_ = true;
    return *this;
  }

  JsonWriter& value(double v) { return raw(format_g17(v)); }
  JsonWriter& value(std::int64_t v) { return raw(std::to_string(v)); }
  JsonWriter& value(std::uint64_t v) { return raw(std::to_string(v)); }
  JsonWriter& value(int v) { return raw(std::to_string(v)); }
  JsonWriter& value(bool v) { return raw(v ? "true" : "false"); }
  JsonWriter& value(std::string_view s) {
    comma_if_element();
    out_ += '"';
    escape(s);
    out_ += '"';
    pending_value_ = false;
    return *this;
  }
  JsonWriter& value(const char* s) { return value(std::string_view(s)); }

  std::string str() const { return out_ + "\n"; }

 private:
  JsonWriter& raw(const std::string& tok) {
    comma_if_element();
    out_ += tok;
    pending_value_ = false;
    return *this;
  }

  JsonWriter& open(char c, char closer) {
    comma_if_element();
    out_ += c;
    stack_.push_back(closer);
    first_.push_back(true);
    pending_value_ = false;
    return *this;
  }

  JsonWriter& close(char c) {
    out_ += '\n';
    stack_.pop_back();
    first_.pop_back();
    indent_raw();
    out_ += c;
    return *this;
  }

  void comma() {
    if (!first_.empty() && !first_.back()) out_ += ',';
    if (!first_.empty()) first_.back() = false;
    out_ += '\n';
  }

  void comma_if_element() {
    if (pending_value_) {
      pending_value_ = false;
      return;  // value follows a key on the same line
    }
    if (!stack_.empty() && stack_.back() == ']') {
      if (!first_.back()) out_ += ',';
      first_.back() = false;
      out_ += '\n';
      indent_raw();
    }
  }

  void indent() { /* called after comma() which already broke the line */ indent_raw(); }

  void indent_raw() {
    for (std::size_t i = 0; i < stack_.size(); ++i) out_ += "  ";
  }

  void escape(std::string_view s) {
    for (char c : s) {
      switch (c) {
        case '"': out_ += "\\\""; break;
        case '\\': out_ += "\\\\"; break;
        case '\n': out_ += "\\n"; break;
        case '\t': out_ += "\\t"; break;
        case '\r': out_ += "\\r"; break;
        default:
          if (static_cast<unsigned char>(c) < 0x20) {
            char buf[8];
            std::snprintf(buf, sizeof(buf), "\\u%04x", c);
            out_ += buf;
          } else {
            out_ += c;
          }
      }
    }
  }

  std::string out_;
  std::string stack_;
  std::vector<bool> first_;
  bool pending_value_ = false;
};

}  // namespace qpulse
