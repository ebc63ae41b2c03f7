#include "doctest.h"

#include "dpca/commcost.hpp"

#include <sstream>

using namespace dpca::commcost;

TEST_CASE("c_hor") {
  CHECK(std::abs(c_hor({4, 20, 1406, 300}) - 0.0571) <= 1e-4);
  CHECK(c_hor({4, 0, 1406, 300}) == 0.0);
  CHECK(c_hor({2, 7, 100, 50}) == doctest::Approx(2.0 * 7 * 51 / 5000));
  CHECK(c_hor({2, 7, 100, 50}) == doctest::Approx(0.1428));
}

TEST_CASE("c_ver") {
  CHECK(std::abs(c_ver({4, 20, 1406, 300}) - 0.2809) <= 1e-4);
  CHECK(c_ver({4, 0, 1406, 300}) == 0.0);
  CHECK(c_ver({2, 5, 40, 20}) == doctest::Approx(0.625));
}

TEST_CASE("limits") {
  auto l = limits({4, 20, 1406, 300});
  CHECK(l.hor_n_inf == doctest::Approx(80.0 / 1406));
  CHECK(l.hor_n_inf == doctest::Approx(0.0569).epsilon(1e-3));
  CHECK(l.ver_n_inf == doctest::Approx(20.0 / 1406));
  CHECK(l.hor_m_inf == 0.0);
  CHECK(limits({2, 10, 1406, 300}).ver_m_inf == doctest::Approx(20.0 / 300));

  // finite n approaches the n -> infinity values
  double prev_gap = 1e9;
  for (std::uint64_t n : {1000ull, 1000000ull, 1000000000ull}) {
    const double gap = std::abs(c_hor({4, 20, 1406, n}) - l.hor_n_inf);
    CHECK(gap < prev_gap);
    prev_gap = gap;
  }
  CHECK(std::abs(c_hor({4, 20, 1406, 1000000}) - l.hor_n_inf) / l.hor_n_inf < 1e-5);
  // c_ver - r/m = s r / n exactly, so its relative gap is s m / n
  CHECK(c_ver({4, 20, 1406, 1000000}) - l.ver_n_inf ==
        doctest::Approx(80.0 / 1e6).epsilon(1e-9));
  // large m
  CHECK(c_hor({4, 20, 1000000000000ull, 300}) < 1e-9);
  CHECK(c_ver({4, 20, 1000000000000ull, 300}) ==
        doctest::Approx(limits({4, 20, 1, 300}).ver_m_inf).epsilon(1e-6));
}

TEST_CASE("vertical costs more when m > n + 1") {
  for (std::uint64_t s = 2; s <= 25; ++s)
    for (std::uint64_t r = 1; r <= 40; ++r)
      CHECK(c_ver({s, r, 1406, 300}) > c_hor({s, r, 1406, 300}));
}

TEST_CASE("cost table CSV") {
  auto rows = cost_table(100, 50, {2}, {0, 7});
  std::ostringstream os;
  write_cost_csv(os, rows);
  CHECK(os.str().rfind("s,r,c_hor,c_ver\n2,0,0,0\n2,7,", 0) == 0);
}
