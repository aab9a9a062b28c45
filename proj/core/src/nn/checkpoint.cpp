#include "genrl/nn/checkpoint.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>

#include "genrl/errors.hpp"

namespace genrl::nn {

namespace {

constexpr const char* kMagic = "genrl-checkpoint";
constexpr int kVersion = 1;

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

double parse_double(const std::string& tok) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw ParseError("checkpoint: bad number '" + tok + "'");
  }
  return v;
}

void expect(std::istream& in, const std::string& word) {
  std::string tok;
  if (!(in >> tok) || tok != word) throw ParseError("checkpoint: expected '" + word + "'");
}

}  // namespace

void write_checkpoint(std::ostream& out, std::span<const Parameter* const> params,
                      const CheckpointMeta& meta) {
  out << kMagic << ' ' << kVersion << '\n';
  out << "meta " << meta.size() << '\n';
  for (const auto& [k, v] : meta) out << k << ' ' << format_double(v) << '\n';
  out << "params " << params.size() << '\n';
  for (const Parameter* p : params) {
    const Matrix& m = p->value();
    out << p->name() << ' ' << m.rows << ' ' << m.cols << '\n';
    for (std::size_t i = 0; i < m.rows; ++i) {
      for (std::size_t j = 0; j < m.cols; ++j) {
        if (j) out << ' ';
        out << format_double(m(i, j));
      }
      out << '\n';
    }
  }
}

CheckpointMeta read_checkpoint(std::istream& in, std::span<Parameter* const> params) {
  expect(in, kMagic);
  int version = 0;
  if (!(in >> version) || version != kVersion) throw ParseError("checkpoint: unsupported version");
  expect(in, "meta");
  std::size_t meta_count = 0;
  if (!(in >> meta_count)) throw ParseError("checkpoint: bad meta count");
  CheckpointMeta meta;
  for (std::size_t i = 0; i < meta_count; ++i) {
    std::string key, val;
    if (!(in >> key >> val)) throw ParseError("checkpoint: truncated meta");
    meta[key] = parse_double(val);
  }
  expect(in, "params");
  std::size_t count = 0;
  if (!(in >> count)) throw ParseError("checkpoint: bad parameter count");
  if (count != params.size()) {
    throw ShapeError("checkpoint: holds " + std::to_string(count) + " parameters, model has " +
                     std::to_string(params.size()));
  }
  for (Parameter* p : params) {
    std::string name;
    std::size_t rows = 0, cols = 0;
    if (!(in >> name >> rows >> cols)) throw ParseError("checkpoint: truncated header");
    if (name != p->name()) throw ShapeError("checkpoint: expected parameter " + p->name() + ", found " + name);
    if (rows != p->value().rows || cols != p->value().cols) {
      throw ShapeError("checkpoint: shape mismatch for " + name);
    }
    Matrix m(rows, cols);
    for (double& v : m.data) {
      std::string tok;
      if (!(in >> tok)) throw ParseError("checkpoint: truncated values for " + name);
      v = parse_double(tok);
    }
    p->value() = std::move(m);
    p->grad() = Matrix(rows, cols);
  }
  return meta;
}

void save_checkpoint(const std::filesystem::path& path, std::span<const Parameter* const> params,
                     const CheckpointMeta& meta) {
  std::ofstream out(path);
  if (!out) throw ConfigError("checkpoint: cannot write " + path.string());
  write_checkpoint(out, params, meta);
}

CheckpointMeta load_checkpoint(const std::filesystem::path& path, std::span<Parameter* const> params) {
  std::ifstream in(path);
  if (!in) throw ConfigError("checkpoint: cannot read " + path.string());
  return read_checkpoint(in, params);
}

}  // namespace genrl::nn
