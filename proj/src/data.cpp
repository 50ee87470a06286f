#include "decmm/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace decmm {

namespace {

[[noreturn]] void parse_fail(int line_no, const std::string& what) {
  throw std::runtime_error("parse_libsvm: line " + std::to_string(line_no) +
                           ": " + what);
}

double parse_number(const std::string& tok, int line_no) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &pos);
  } catch (const std::exception&) {
    parse_fail(line_no, "non-numeric value '" + tok + "'");
  }
  if (pos != tok.size()) parse_fail(line_no, "non-numeric value '" + tok + "'");
  if (!std::isfinite(v)) parse_fail(line_no, "non-finite value '" + tok + "'");
  return v;
}

}  // namespace

Dataset parse_libsvm(std::istream& in) {
  std::vector<double> labels;
  std::vector<std::vector<std::pair<int, double>>> rows;
  int max_index = 0;
  bool warned_zero_labels = false;

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;  // blank line

    double label = parse_number(tok, line_no);
    if (label == 0.0) {
      if (!warned_zero_labels) {
        std::cerr << "parse_libsvm: remapping label 0 to -1\n";
        warned_zero_labels = true;
      }
      label = -1.0;
    }
    if (label != 1.0 && label != -1.0)
      parse_fail(line_no, "label must be -1, 0 or +1");

    std::vector<std::pair<int, double>> row;
    int prev_index = 0;
    while (ls >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 == tok.size())
        parse_fail(line_no, "malformed feature '" + tok + "'");
      const double idx_raw = parse_number(tok.substr(0, colon), line_no);
      const int idx = static_cast<int>(idx_raw);
      if (idx_raw != idx || idx < 1)
        parse_fail(line_no, "index must be a positive integer");
      if (idx <= prev_index)
        parse_fail(line_no, "indices must be strictly ascending");
      prev_index = idx;
      row.emplace_back(idx, parse_number(tok.substr(colon + 1), line_no));
      max_index = std::max(max_index, idx);
    }
    labels.push_back(label);
    rows.push_back(std::move(row));
  }

  Dataset ds;
  const int n = static_cast<int>(rows.size());
  ds.features = Mat::Zero(n, max_index);
  ds.labels = Vec::Zero(n);
  for (int i = 0; i < n; ++i) {
    ds.labels(i) = labels[i];
    for (const auto& [idx, val] : rows[i]) ds.features(i, idx - 1) = val;
  }
  return ds;
}

Dataset load_libsvm(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_libsvm: cannot open " + path);
  return parse_libsvm(in);
}

void write_libsvm(const Dataset& ds, std::ostream& out) {
  out.precision(17);
  for (int i = 0; i < ds.size(); ++i) {
    out << (ds.labels(i) > 0 ? "+1" : "-1");
    for (int k = 0; k < ds.dim(); ++k)
      if (ds.features(i, k) != 0.0)
        out << ' ' << (k + 1) << ':' << ds.features(i, k);
    out << '\n';
  }
}

std::vector<Dataset> partition_equal(const Dataset& ds, int m,
                                     std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("partition_equal: m must be >= 1");
  const int total = ds.size();
  if (total < m)
    throw std::invalid_argument("partition_equal: fewer samples than agents");

  std::vector<int> order(total);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(splitmix64(seed));
  std::shuffle(order.begin(), order.end(), rng);

  const int n = total / m;
  std::vector<Dataset> locals(m);
  for (int i = 0; i < m; ++i) {
    Dataset& local = locals[i];
    local.features = Mat::Zero(n, ds.dim());
    local.labels = Vec::Zero(n);
    for (int j = 0; j < n; ++j) {
      const int src = order[i * n + j];
      local.features.row(j) = ds.features.row(src);
      local.labels(j) = ds.labels(src);
    }
  }
  return locals;
}

Dataset generate_synthetic_classification(int N, int d, std::uint64_t seed,
                                          Vec* plane_out) {
  if (N < 1 || d < 1)
    throw std::invalid_argument("generate_synthetic_classification: N, d must be positive");
  std::mt19937_64 rng(splitmix64(seed));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  Vec plane(d);
  for (int k = 0; k < d; ++k) plane(k) = gauss(rng);
  if (plane_out != nullptr) *plane_out = plane;

  Dataset ds;
  ds.features = Mat(N, d);
  ds.labels = Vec(N);
  for (int i = 0; i < N; ++i) {
    for (int k = 0; k < d; ++k) ds.features(i, k) = gauss(rng);
    double label = ds.features.row(i).dot(plane) >= 0.0 ? 1.0 : -1.0;
    if (unif(rng) < 0.1) label = -label;  // 10% flip noise
    ds.labels(i) = label;
  }
  return ds;
}

}  // namespace decmm
