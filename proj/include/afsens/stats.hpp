#ifndef AFSENS_STATS_HPP
#define AFSENS_STATS_HPP

namespace afsens {

// Standard normal CDF, survival function and quantile, plus the chi-square
// survival function. Backed by boost::math; accurate to better than 1e-10
// relative error on [1e-12, 1 - 1e-12].
double normal_cdf(double z);
double normal_sf(double z);
double normal_quantile(double p);

double chi_squared_sf(double x, double degrees_of_freedom);

} // namespace afsens

#endif
