#pragma once

namespace ctxspell::stats {

// Upper tail of the chi-square distribution with one degree of freedom.
double chi_square_sf_1df(double x);

// Upper tail of the standard normal distribution.
double normal_sf(double z);

}  // namespace ctxspell::stats
