#include "ctxspell/stats.hpp"

#include <cmath>

namespace ctxspell::stats {

double chi_square_sf_1df(double x) {
  if (!(x > 0.0)) return 1.0;
  // P(X > x) = P(|Z| > sqrt(x)) for X ~ chi2(1).
  return std::erfc(std::sqrt(x / 2.0));
}

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

}  // namespace ctxspell::stats
