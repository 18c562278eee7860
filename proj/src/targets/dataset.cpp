#include "wgflow/targets/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "wgflow/error.hpp"
#include "wgflow/rng.hpp"

namespace wgf::targets {
namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    cells.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_cell(const std::string& cell, std::size_t row, std::size_t col) {
  double v = 0.0;
  const auto* end = cell.data() + cell.size();
  const auto res = std::from_chars(cell.data(), end, v);
  if (cell.empty() || res.ec != std::errc() || res.ptr != end || !std::isfinite(v))
    throw ParseError("csv: non-numeric cell '" + cell + "' at row " + std::to_string(row) + ", column " +
                         std::to_string(col),
                     row, col);
  return v;
}

}  // namespace

RegressionDataset make_dataset(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets, double split_ratio,
                               std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(features.rows());
  if (static_cast<std::size_t>(targets.size()) != n) throw InputError("dataset: feature/target row mismatch");
  if (n < 10) throw InputError("dataset: need at least 10 rows, got " + std::to_string(n));
  if (!(split_ratio > 0.0 && split_ratio < 1.0)) throw InputError("dataset: split ratio must be in (0, 1)");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng = Rng::stream(seed, "split");
  std::shuffle(order.begin(), order.end(), rng.engine());
  auto n_train = static_cast<std::size_t>(std::llround(split_ratio * static_cast<double>(n)));
  n_train = std::clamp<std::size_t>(n_train, 1, n - 1);

  RegressionDataset d;
  d.train_index.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  d.test_index.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());

  const Eigen::Index dim = features.cols();
  Eigen::MatrixXd xtr(dim, static_cast<Eigen::Index>(n_train));
  Eigen::VectorXd ytr(static_cast<Eigen::Index>(n_train));
  for (std::size_t k = 0; k < n_train; ++k) {
    xtr.col(static_cast<Eigen::Index>(k)) = features.row(static_cast<Eigen::Index>(d.train_index[k])).transpose();
    ytr[static_cast<Eigen::Index>(k)] = targets[static_cast<Eigen::Index>(d.train_index[k])];
  }
  const auto nte = static_cast<Eigen::Index>(d.test_index.size());
  Eigen::MatrixXd xte(dim, nte);
  Eigen::VectorXd yte(nte);
  for (Eigen::Index k = 0; k < nte; ++k) {
    xte.col(k) = features.row(static_cast<Eigen::Index>(d.test_index[static_cast<std::size_t>(k)])).transpose();
    yte[k] = targets[static_cast<Eigen::Index>(d.test_index[static_cast<std::size_t>(k)])];
  }

  d.x_mean = xtr.rowwise().mean();
  d.x_std = ((xtr.colwise() - d.x_mean).array().square().rowwise().mean()).sqrt().matrix();
  for (Eigen::Index j = 0; j < dim; ++j)
    if (!(d.x_std[j] > 0.0)) d.x_std[j] = 1.0;
  d.y_mean = ytr.mean();
  d.y_std = std::sqrt((ytr.array() - d.y_mean).square().mean());
  if (!(d.y_std > 0.0)) d.y_std = 1.0;

  d.x_train = (xtr.colwise() - d.x_mean).array().colwise() / d.x_std.array();
  d.x_test = (xte.colwise() - d.x_mean).array().colwise() / d.x_std.array();
  d.y_train = (ytr.array() - d.y_mean) / d.y_std;
  d.y_test = (yte.array() - d.y_mean) / d.y_std;
  return d;
}

RegressionDataset load_csv_dataset(const std::string& path, const std::string& target_column, double split_ratio,
                                   std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw InputError("csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("csv: empty file " + path, 1, 0);
  const auto header = split_csv_line(line);
  const auto it = std::find(header.begin(), header.end(), target_column);
  if (it == header.end()) throw InputError("csv: no column named '" + target_column + "'");
  const auto target = static_cast<std::size_t>(it - header.begin());

  std::vector<std::vector<double>> rows;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw ParseError("csv: row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                           " cells, header has " + std::to_string(header.size()),
                       row, 0);
    std::vector<double> values(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) values[c] = parse_cell(cells[c], row, c + 1);
    rows.push_back(std::move(values));
  }
  if (rows.size() < 10) throw InputError("csv: need at least 10 data rows, got " + std::to_string(rows.size()));

  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto dim = static_cast<Eigen::Index>(header.size() - 1);
  Eigen::MatrixXd x(n, dim);
  Eigen::VectorXd y(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    Eigen::Index col = 0;
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c == target)
        y[r] = rows[static_cast<std::size_t>(r)][c];
      else
        x(r, col++) = rows[static_cast<std::size_t>(r)][c];
    }
  }
  return make_dataset(x, y, split_ratio, seed);
}

void synthetic_sine(int n, double noise_std, std::uint64_t seed, Eigen::MatrixXd& features, Eigen::VectorXd& targets) {
  if (n < 1) throw InputError("synthetic_sine: n must be positive");
  Rng rng = Rng::stream(seed, "data");
  features.resize(n, 1);
  targets.resize(n);
  for (int i = 0; i < n; ++i) {
    features(i, 0) = rng.uniform(-3.0, 3.0);
    targets[i] = std::sin(features(i, 0)) + noise_std * rng.normal();
  }
}

}  // namespace wgf::targets
