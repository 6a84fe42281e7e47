#include "hwbench/median_filter.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>
#include <vector>

using hwbench::RunningMedian;

namespace {

// Sort the trailing window and take the middle (lower middle when even).
std::vector<double> brute_force_medians(const std::vector<double>& raw, std::size_t rank) {
  std::vector<double> out;
  const std::size_t cap = 2 * rank + 1;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const std::size_t lo = i + 1 >= cap ? i + 1 - cap : 0;
    std::vector<double> w(raw.begin() + static_cast<long>(lo), raw.begin() + static_cast<long>(i) + 1);
    std::sort(w.begin(), w.end());
    out.push_back(w[(w.size() - 1) / 2]);
  }
  return out;
}

}  // namespace

TEST_CASE("rank zero passes samples through") {
  RunningMedian m(0);
  for (double v : {3.0, -1.0, 1e9, 0.5}) CHECK(m.push(v) == v);
  CHECK(m.size() == 1);
}

TEST_CASE("constant stream stays constant") {
  RunningMedian m(5);
  for (int i = 0; i < 40; ++i) CHECK(m.push(2.5e-9) == 2.5e-9);
}

TEST_CASE("single outlier is removed everywhere") {
  RunningMedian m(5);
  for (int i = 0; i < 30; ++i) {
    const double raw = i == 12 ? 101e-9 : 1e-9;
    CHECK(m.push(raw) == 1e-9);
  }
}

TEST_CASE("window never exceeds 2R+1 entries") {
  RunningMedian m(3);
  for (int i = 0; i < 20; ++i) {
    m.push(i);
    CHECK(m.size() == std::min<std::size_t>(static_cast<std::size_t>(i) + 1, 7));
  }
  m.reset();
  CHECK(m.size() == 0);
}

TEST_CASE("startup uses the lower median of the samples present") {
  RunningMedian m(5);
  CHECK(m.push(4.0) == 4.0);
  CHECK(m.push(1.0) == 1.0);
  CHECK(m.push(3.0) == 3.0);
  CHECK(m.push(2.0) == 2.0);
}

TEST_CASE("matches sort-and-take-middle on random streams") {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::bernoulli_distribution spike(0.2);
  for (std::size_t rank : {0u, 1u, 2u, 5u, 8u}) {
    std::vector<double> raw;
    for (int i = 0; i < 500; ++i) raw.push_back(noise(rng) + (spike(rng) ? 100.0 : 0.0));
    const auto expected = brute_force_medians(raw, rank);
    RunningMedian m(rank);
    for (std::size_t i = 0; i < raw.size(); ++i) {
      REQUIRE(m.push(raw[i]) == expected[i]);
    }
  }
}
