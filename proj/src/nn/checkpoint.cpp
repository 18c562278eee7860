#include "wgflow/nn/checkpoint.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "wgflow/error.hpp"

namespace wgf::nn {

void write_checkpoint(std::ostream& out, const std::vector<NamedTensor>& tensors) {
  char buf[32];
  for (const auto& t : tensors) {
    if (static_cast<Eigen::Index>(t.values.size()) != t.rows * t.cols)
      throw InputError("write_checkpoint: tensor '" + t.name + "' has inconsistent size");
    out << t.name << ' ' << t.rows << ' ' << t.cols << '\n';
    for (Eigen::Index r = 0; r < t.rows; ++r) {
      for (Eigen::Index c = 0; c < t.cols; ++c) {
        std::snprintf(buf, sizeof buf, "%.17g", t.values[r * t.cols + c]);
        if (c) out << ' ';
        out << buf;
      }
      out << '\n';
    }
  }
}

void write_checkpoint(const std::filesystem::path& path, const std::vector<NamedTensor>& tensors) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open checkpoint for writing: " + path.string());
  write_checkpoint(out, tensors);
}

std::vector<NamedTensor> read_checkpoint(std::istream& in) {
  std::vector<NamedTensor> tensors;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    NamedTensor t;
    std::istringstream header(line);
    if (!(header >> t.name >> t.rows >> t.cols) || t.rows < 0 || t.cols < 0)
      throw ParseError("read_checkpoint: malformed header line '" + line + "'", line_no, 0);
    t.values.reserve(static_cast<std::size_t>(t.rows * t.cols));
    for (Eigen::Index r = 0; r < t.rows; ++r) {
      if (!std::getline(in, line)) throw ParseError("read_checkpoint: truncated tensor '" + t.name + "'", line_no + 1, 0);
      ++line_no;
      std::istringstream row(line);
      for (Eigen::Index c = 0; c < t.cols; ++c) {
        std::string tok;
        const auto col = static_cast<std::size_t>(c + 1);
        if (!(row >> tok)) throw ParseError("read_checkpoint: short row in tensor '" + t.name + "'", line_no, col);
        double v = 0.0;
        const char* end = tok.data() + tok.size();
        const auto res = std::from_chars(tok.data(), end, v);
        if (res.ec != std::errc() || res.ptr != end)
          throw ParseError("read_checkpoint: bad value '" + tok + "' in tensor '" + t.name + "'", line_no, col);
        t.values.push_back(v);
      }
    }
    tensors.push_back(std::move(t));
  }
  return tensors;
}

std::vector<NamedTensor> read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open checkpoint: " + path.string());
  return read_checkpoint(in);
}

std::vector<NamedTensor> to_tensors(const MlpParams& params, std::string_view prefix) {
  std::vector<NamedTensor> out;
  for (int l = 0; l < params.num_layers(); ++l) {
    const std::string base = std::string(prefix) + ".layer" + std::to_string(l);
    auto w = params.weight(l);
    NamedTensor tw{base + ".weight", w.rows(), w.cols(), {}};
    tw.values.assign(w.data(), w.data() + w.size());
    auto b = params.bias(l);
    NamedTensor tb{base + ".bias", b.size(), 1, {}};
    tb.values.assign(b.data(), b.data() + b.size());
    out.push_back(std::move(tw));
    out.push_back(std::move(tb));
  }
  return out;
}

void from_tensors(MlpParams& params, const std::vector<NamedTensor>& tensors, std::string_view prefix) {
  auto find = [&](const std::string& name) -> const NamedTensor& {
    for (const auto& t : tensors)
      if (t.name == name) return t;
    throw InputError("checkpoint has no tensor '" + name + "'");
  };
  for (int l = 0; l < params.num_layers(); ++l) {
    const std::string base = std::string(prefix) + ".layer" + std::to_string(l);
    const auto& tw = find(base + ".weight");
    const auto& tb = find(base + ".bias");
    auto w = params.weight(l);
    auto b = params.bias(l);
    if (tw.rows != w.rows() || tw.cols != w.cols() || tb.rows != b.size() || tb.cols != 1)
      throw InputError("checkpoint tensor shape mismatch at " + base);
    std::copy(tw.values.begin(), tw.values.end(), w.data());
    std::copy(tb.values.begin(), tb.values.end(), b.data());
  }
}

NamedTensor vector_tensor(std::string name, const Eigen::VectorXd& v) {
  NamedTensor t{std::move(name), v.size(), 1, {}};
  t.values.assign(v.data(), v.data() + v.size());
  return t;
}

}  // namespace wgf::nn
