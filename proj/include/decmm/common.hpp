#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace decmm {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// SplitMix64 finalizer. Used to derive independent per-agent RNG streams
// from a single master seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t agent_stream_seed(std::uint64_t master, int agent) {
  return splitmix64(master ^ (0x9e3779b97f4a7c15ULL *
                              static_cast<std::uint64_t>(agent + 1)));
}

}  // namespace decmm
