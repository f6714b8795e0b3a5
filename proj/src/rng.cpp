#include "faris/rng.hpp"

#include <cmath>

namespace faris {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, Stream stream, std::uint64_t index) {
  std::uint64_t h = splitmix(seed);
  h = splitmix(h ^ static_cast<std::uint64_t>(stream));
  return splitmix(h ^ index);
}

Complex Rng::complex_normal() {
  const double re = normal();
  const double im = normal();
  return {re * M_SQRT1_2, im * M_SQRT1_2};
}

CVec Rng::complex_normal_vector(Eigen::Index n) {
  CVec z(n);
  for (Eigen::Index i = 0; i < n; ++i) z(i) = complex_normal();
  return z;
}

}  // namespace faris
