#include <doctest.h>

#include <cmath>

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "marma/special.hpp"

using namespace marma::special;

TEST_SUITE("special") {

TEST_CASE("incomplete gamma matches boost on a grid") {
  for (double a : {0.5, 1.5, 2.5, 7.0}) {
    for (double x : {1e-8, 1e-3, 0.1, 0.5, 1.0, 1.5, 2.0, 5.0, 10.0, 30.0, 80.0}) {
      const double p = boost::math::gamma_p(a, x);
      const double q = boost::math::gamma_q(a, x);
      CAPTURE(a);
      CAPTURE(x);
      CHECK(gamma_p(a, x) == doctest::Approx(p).epsilon(1e-13));
      if (q > 1e-300) CHECK(gamma_q(a, x) == doctest::Approx(q).epsilon(1e-12));
    }
  }
}

TEST_CASE("incomplete gamma edge values") {
  CHECK(gamma_p(1.5, 0.0) == 0.0);
  CHECK(gamma_q(1.5, 0.0) == 1.0);
  CHECK(gamma_q(1.5, INFINITY) == 0.0);
  // Q(1, x) = exp(-x)
  CHECK(gamma_q(1.0, 3.0) == doctest::Approx(std::exp(-3.0)).epsilon(1e-14));
}

TEST_CASE("inverse incomplete gamma matches boost") {
  for (double q : {1e-12, 1e-6, 0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99, 1 - 1e-9}) {
    CAPTURE(q);
    CHECK(gamma_q_inv(1.5, q) == doctest::Approx(boost::math::gamma_q_inv(1.5, q)).epsilon(1e-12));
    CHECK(gamma_p_inv(1.5, q) == doctest::Approx(boost::math::gamma_p_inv(1.5, q)).epsilon(1e-12));
  }
  CHECK(gamma_q_inv(1.5, 1.0) == 0.0);
  CHECK(gamma_p_inv(1.5, 0.0) == 0.0);
  CHECK(std::isinf(gamma_q_inv(1.5, 0.0)));
}

TEST_CASE("gamma(3/2) median") {
  CHECK(gamma_p_inv(1.5, 0.5) == doctest::Approx(1.1829869421876689).epsilon(1e-14));
}

TEST_CASE("normal distribution functions") {
  CHECK(normal_cdf(0.0) == 0.5);
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-14));
  CHECK(normal_quantile(0.5) == 0.0);
  for (double p : {1e-300, 1e-20, 1e-8, 0.001, 0.02, 0.3, 0.6, 0.9, 0.999, 1 - 1e-12}) {
    const double z = normal_quantile(p);
    CAPTURE(p);
    CHECK(z == doctest::Approx(-std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p)).epsilon(1e-13));
  }
  for (double z : {-30.0, -8.0, -1.0, 0.3, 2.0, 9.0, 35.0}) {
    CHECK(normal_sf(z) == doctest::Approx(0.5 * boost::math::erfc(z / std::sqrt(2.0))).epsilon(1e-14));
  }
  CHECK(normal_quantile(0.0) == -INFINITY);
  CHECK(normal_quantile(1.0) == INFINITY);
}

}
