#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace tailrisk {

// Deterministic random stream. All randomness in the project flows from one
// master seed split into named substreams, so any stage can be re-run in
// isolation and reproduce its draws exactly.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : gen_(seed) {}

  // Derives an independent stream from (master, name), e.g. "mcs/BTC-IXW/frank".
  static RngStream substream(std::uint64_t master, std::string_view name);

  // The sub-seed substream() is built on; for APIs that take a raw seed.
  static std::uint64_t derive_seed(std::uint64_t master, std::string_view name);

  // Uniform on the open interval (0,1); never returns an exact 0 or 1.
  double uniform();
  double normal();
  // Student-t with nu degrees of freedom, scaled to unit variance (nu > 2).
  double student_t_unit_variance(double nu);

  std::vector<double> uniforms(std::size_t n);

 private:
  std::mt19937_64 gen_;
};

}  // namespace tailrisk
