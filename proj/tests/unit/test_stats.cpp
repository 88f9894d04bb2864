#include <cmath>
#include <random>

#include "doctest.h"
#include "hwnet/error.hpp"
#include "hwnet/stats.hpp"

using namespace hwnet;
using doctest::Approx;

TEST_CASE("t quantiles") {
  CHECK(student_t_quantile(0.975, 10) == Approx(2.228138852).epsilon(1e-8));
  CHECK(student_t_quantile(0.975, 1) == Approx(12.70620474).epsilon(1e-8));
  CHECK(student_t_quantile(0.975, 0) == Approx(1.959963985).epsilon(1e-8));
}

TEST_CASE("sample estimate") {
  const Estimate e = sample_estimate({1.0, 2.0, 3.0, 4.0});
  CHECK(e.mean == Approx(2.5));
  CHECK(e.std_error == Approx(std::sqrt(5.0 / 3.0 / 4.0)));
  CHECK(e.half_width() == Approx(3.182446305 * e.std_error).epsilon(1e-8));
  CHECK(std::isinf(sample_estimate({1.0}).half_width()));
  CHECK(batch_estimate({{1.0, 2.0}, {3.0, 4.0}}).mean == Approx(2.5));
}

TEST_CASE("batch accumulator splits intervals across batches") {
  BatchAccumulator acc(2, 1.0, 5.0, 4);
  const double v[2] = {2.0, -1.0};
  acc.add(v, 0.0, 2.5);  // clipped to [1, 2.5)
  const double w[2] = {4.0, 1.0};
  acc.add(w, 2.5, 9.0);
  CHECK(acc.observed() == Approx(4.0));
  const auto m0 = acc.batch_means(0);
  CHECK(m0[0] == Approx(2.0));
  CHECK(m0[1] == Approx(3.0));
  CHECK(m0[2] == Approx(4.0));
  CHECK(m0[3] == Approx(4.0));
  CHECK(acc.batch_means(1)[1] == Approx(0.0));
}

TEST_CASE("histogram quantiles") {
  Histogram h(0.0, 10.0, 0.01);
  std::mt19937_64 rng(1);
  std::exponential_distribution<double> ex(1.0);
  for (int k = 0; k < 200000; ++k) h.add(ex(rng), 1.0);
  CHECK(h.quantile(0.5) == Approx(std::log(2.0)).epsilon(0.02));
  CHECK(h.quantile(0.9) == Approx(std::log(10.0)).epsilon(0.02));
  Histogram empty(0.0, 1.0, 0.1);
  CHECK(std::isnan(empty.quantile(0.5)));
}

TEST_CASE("line fit") {
  const LineFit f = fit_line({0, 1, 2, 3}, {1, 3, 5, 7});
  CHECK(f.slope == Approx(2.0));
  CHECK(f.intercept == Approx(1.0));
  CHECK(f.r2 == Approx(1.0));
  CHECK(f.slope_se == Approx(0.0));
  const LineFit g = fit_line({0, 1, 2, 3}, {0, 1, 0, 1});
  CHECK(g.slope == Approx(0.2));
  CHECK(g.r2 == Approx(0.2));
  CHECK_THROWS_AS(fit_line({1, 1}, {0, 1}), Error);
  CHECK_THROWS_AS(fit_line({1}, {0}), Error);
}
