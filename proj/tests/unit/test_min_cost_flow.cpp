#include <algorithm>
#include <numeric>
#include <random>

#include "doctest.h"
#include "hwnet/error.hpp"
#include "hwnet/min_cost_flow.hpp"

using hwnet::Error;
using hwnet::MinCostFlow;

TEST_CASE("assignment problems match permutation enumeration") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const int k = 2 + static_cast<int>(rng() % 4);
    std::vector<std::vector<long>> cost(k, std::vector<long>(k));
    for (auto& row : cost)
      for (auto& c : row) c = static_cast<long>(rng() % 21) - 10;

    MinCostFlow f(2 * k + 2);
    const int s = 2 * k, t = 2 * k + 1;
    std::vector<std::vector<int>> arc(k, std::vector<int>(k));
    for (int a = 0; a < k; ++a) {
      f.add_arc(s, a, 1, 0);
      f.add_arc(k + a, t, 1, 0);
      for (int b = 0; b < k; ++b) arc[a][b] = f.add_arc(a, k + b, 1, cost[a][b]);
    }
    CHECK(f.augment(s, t) == k);
    long got = 0;
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) got += f.flow(arc[a][b]) * cost[a][b];

    std::vector<int> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    long best = 1L << 40;
    do {
      long c = 0;
      for (int a = 0; a < k; ++a) c += cost[a][perm[a]];
      best = std::min(best, c);
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(got == best);
  }
}

TEST_CASE("augmenting from a preloaded flow") {
  // s -> a -> t and s -> b -> t, one unit already on the cheap route
  MinCostFlow f(4);
  const int s = 0, a = 1, b = 2, t = 3;
  const int sa = f.add_arc(s, a, 2, 0);
  f.add_arc(a, t, 2, 5);
  const int sb = f.add_arc(s, b, 2, 0, 1);
  f.add_arc(b, t, 2, 1, 1);
  CHECK(f.augment(s, t) == 3);
  CHECK(f.flow(sa) == 2);
  CHECK(f.flow(sb) == 2);
}

TEST_CASE("a non-optimal starting flow is rejected") {
  MinCostFlow f(4);
  const int s = 0, a = 1, b = 2, t = 3;
  f.add_arc(s, a, 2, 0, 1);
  f.add_arc(a, t, 2, 5, 1);
  f.add_arc(s, b, 2, 0);
  f.add_arc(b, t, 2, 1);
  CHECK_THROWS_AS(f.augment(s, t), Error);
}

TEST_CASE("no path") {
  MinCostFlow f(3);
  f.add_arc(0, 1, 5, 1);
  CHECK(f.augment(0, 2) == 0);
}
