#include "afsens/stats.hpp"

#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

namespace afsens {

namespace {
const boost::math::normal_distribution<double> kStdNormal(0.0, 1.0);
}

double normal_cdf(double z) {
    return boost::math::cdf(kStdNormal, z);
}

double normal_sf(double z) {
    return boost::math::cdf(boost::math::complement(kStdNormal, z));
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::domain_error("normal_quantile: p must be in (0, 1)");
    return boost::math::quantile(kStdNormal, p);
}

double chi_squared_sf(double x, double degrees_of_freedom) {
    if (!(degrees_of_freedom > 0.0))
        throw std::domain_error("chi_squared_sf: degrees of freedom must be positive");
    if (x <= 0.0)
        return 1.0;
    boost::math::chi_squared_distribution<double> dist(degrees_of_freedom);
    return boost::math::cdf(boost::math::complement(dist, x));
}

} // namespace afsens
