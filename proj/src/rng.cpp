#include "tailrisk/rng.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>

namespace tailrisk {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

RngStream RngStream::substream(std::uint64_t master, std::string_view name) {
  return RngStream(derive_seed(master, name));
}

std::uint64_t RngStream::derive_seed(std::uint64_t master, std::string_view name) {
  return splitmix64(master ^ fnv1a(name));
}

double RngStream::uniform() {
  // 53-bit mantissa scaling, then pinched into the open interval.
  double u = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  if (u <= 0.0) return 0x1.0p-53;
  if (u >= 1.0) return 1.0 - 0x1.0p-53;
  return u;
}

double RngStream::normal() {
  static const boost::math::normal_distribution<double> dist(0.0, 1.0);
  return boost::math::quantile(dist, uniform());
}

double RngStream::student_t_unit_variance(double nu) {
  boost::math::students_t_distribution<double> dist(nu);
  return boost::math::quantile(dist, uniform()) * std::sqrt((nu - 2.0) / nu);
}

std::vector<double> RngStream::uniforms(std::size_t n) {
  std::vector<double> out(n);
  for (auto& u : out) u = uniform();
  return out;
}

}  // namespace tailrisk
