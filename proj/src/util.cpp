#include "apptopic/util.hpp"

#include <bit>
#include <cmath>
#include <fmt/format.h>

namespace apptopic {

void Fnv1a::update_double(double v) { update_u64(std::bit_cast<std::uint64_t>(v)); }

std::string Fnv1a::hex() const { return fmt::format("{:016x}", state_); }

std::uint64_t fnv1a(std::string_view bytes) {
  Fnv1a h;
  h.update(bytes);
  return h.digest();
}

double standard_normal(Rng& rng) {
  // Box-Muller; the first uniform is kept away from zero.
  const double u1 = 1.0 - uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(squared_distance(a, b));
}

int argmax(std::span<const double> values) {
  int best = -1;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (best < 0 || values[i] > values[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  }
  return best;
}

}  // namespace apptopic
