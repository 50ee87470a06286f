#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "decmm/common.hpp"

namespace decmm {

// Dense sample matrix with labels in {-1, +1}.
struct Dataset {
  Mat features;  // N x d
  Vec labels;    // length N

  int size() const { return static_cast<int>(features.rows()); }
  int dim() const { return static_cast<int>(features.cols()); }
};

// LIBSVM text format: "<label> <idx>:<val> ...", 1-based ascending indices.
// d = max index seen; missing entries are zero; labels "0" are remapped
// to -1. Malformed lines raise an error naming the line number.
Dataset parse_libsvm(std::istream& in);
Dataset load_libsvm(const std::string& path);
void write_libsvm(const Dataset& ds, std::ostream& out);

// Shuffles by seed and assigns floor(N/m) samples to each agent,
// dropping the remainder. Deterministic given seed.
std::vector<Dataset> partition_equal(const Dataset& ds, int m,
                                     std::uint64_t seed);

// Gaussian features, labels from a random hyperplane with 10% flip noise.
// plane_out, when given, receives the generating hyperplane.
Dataset generate_synthetic_classification(int N, int d, std::uint64_t seed,
                                          Vec* plane_out = nullptr);

}  // namespace decmm
