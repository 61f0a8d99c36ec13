#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "franson/lhv.h"

using namespace franson;
using namespace franson::lhv;

namespace {

// Sign of cos(k pi/8) for odd k, by grid arithmetic only.
int grid_cos_sign(int k) {
  const int m = ((k % 16) + 16) % 16;
  return (m < 4 || m > 12) ? +1 : -1;
}

// Grid indices (units of pi/8) of the four station settings.
constexpr std::array<int, 2> kAliceGrid{0, 4};
constexpr std::array<int, 2> kBobGrid{-2, -6};

using Pair = std::array<std::array<double, 2>, 2>;

struct Tally {
  Pair coinc{}, product{};
};

// Fine midpoint grid over r; band edges at multiples of 0.01 fall between points.
Tally enumerate_grid(double p, int points, bool skip_noise_bands) {
  Tally t;
  const NoiseParam np{p};
  for (int n = 0; n < kAngles; ++n) {
    for (int i = 0; i < points; ++i) {
      const double r = (i + 0.5) / points;
      if (skip_noise_bands && slot_swap_active(r, np)) continue;
      const auto a = alice_plan({n, r}, np);
      const auto b = bob_plan({n, r}, np);
      for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y)
          if (a[x].slot == b[y].slot) {
            t.coinc[x][y] += 1.0;
            t.product[x][y] += sign_of(a[x].sign) * sign_of(b[y].sign);
          }
    }
  }
  return t;
}

double s2_of(const Pair& e) { return std::abs(e[0][0] + e[1][0]) + std::abs(e[1][1] - e[0][1]); }

}  // namespace

TEST_CASE("sign tables match grid arithmetic and the fixture vectors") {
  const auto& t = sign_tables();
  for (int n = 0; n < kAngles; ++n) {
    CHECK(t.alice(0, n) == grid_cos_sign(kAliceGrid[0] + 2 * n + 1));
    CHECK(t.alice(1, n) == grid_cos_sign(kAliceGrid[1] + 2 * n + 1));
    CHECK(t.bob(0, n) == grid_cos_sign(kBobGrid[0] - 2 * n - 1));
    CHECK(t.bob(1, n) == grid_cos_sign(kBobGrid[1] - 2 * n - 1));
  }
  CHECK(t.a1 == std::array<int, 8>{+1, +1, -1, -1, -1, -1, +1, +1});
  CHECK(t.a3 == std::array<int, 8>{-1, -1, -1, -1, +1, +1, +1, +1});
  CHECK(t.b2 == std::array<int, 8>{+1, -1, -1, -1, -1, +1, +1, +1});
  CHECK(t.b4 == std::array<int, 8>{-1, -1, -1, +1, +1, +1, +1, -1});
  CHECK(t.a1[0] == +1);
}

TEST_CASE("agreement groups partition the angles") {
  const auto& t = sign_tables();
  // brute force from the sign vectors
  std::array<std::vector<int>, 2> groups;
  for (int a = 0; a < 2; ++a)
    for (int n = 0; n < kAngles; ++n) {
      bool ok = true;
      for (int b = 0; b < 2; ++b)
        ok = ok && t.alice(a, n) * t.bob(b, n) == target_sign(a, b);
      if (ok) groups[a].push_back(n);
    }
  CHECK(groups[0] == t.g_a1);
  CHECK(groups[1] == t.g_a3);
  CHECK(t.g_a1 == std::vector<int>{0, 3, 4, 7});
  CHECK(t.g_a3 == std::vector<int>{1, 2, 5, 6});
  for (int n = 0; n < kAngles; ++n) CHECK(t.in_group(0, n) != t.in_group(1, n));
}

TEST_CASE("target correlation signs") {
  // sign cos(phi_A + phi_B) on the pi/8 grid: -pi/4, -3pi/4, pi/4, -pi/4
  CHECK(target_sign(0, 0) == +1);
  CHECK(target_sign(1, 0) == +1);
  CHECK(target_sign(1, 1) == +1);
  CHECK(target_sign(0, 1) == -1);
}

TEST_CASE("bob plans") {
  const NoiseParam p{0.1};
  auto plan = bob_plan({0, 0.3}, p);
  CHECK(plan[0] == PlannedClick{TimeSlot::Early, Port::Plus});
  CHECK(plan[1] == PlannedClick{TimeSlot::Early, Port::Minus});

  plan = bob_plan({5, 0.55}, p);
  CHECK(plan[0] == PlannedClick{TimeSlot::Late, Port::Plus});
  CHECK(plan[1] == PlannedClick{TimeSlot::Late, Port::Plus});

  for (int n = 0; n < kAngles; ++n) {
    const auto lo = bob_plan({n, 0.0}, NoiseParam{0.2});
    const auto hi = bob_plan({n, 0.999}, NoiseParam{0.2});
    CHECK(lo.single_slot());
    CHECK(lo[0].slot != hi[0].slot);
    CHECK(lo[0].sign == hi[0].sign);
    CHECK(lo[1].sign == hi[1].sign);
  }
}

TEST_CASE("alice plans") {
  auto plan = alice_plan({0, 0.3}, NoiseParam{0.1});
  CHECK(plan[0] == PlannedClick{TimeSlot::Early, Port::Plus});
  CHECK(plan[1] == PlannedClick{TimeSlot::Late, Port::Minus});

  CHECK(slot_swap_active(0.55, NoiseParam{0.1}));
  plan = alice_plan({5, 0.55}, NoiseParam{0.1});
  CHECK(plan[0] == PlannedClick{TimeSlot::Late, Port::Minus});
  CHECK(plan[1] == PlannedClick{TimeSlot::Early, Port::Plus});

  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const double r = u(gen);
    CHECK_FALSE(slot_swap_active(r, NoiseParam{0.0}));
    const HiddenVariable hv{i % kAngles, r};
    CHECK_FALSE(alice_plan(hv, NoiseParam{u(gen) / 4}).single_slot());
  }
}

TEST_CASE("domain validation") {
  CHECK_THROWS_AS(alice_plan({8, 0.1}, NoiseParam{0.1}), std::invalid_argument);
  CHECK_THROWS_AS(bob_plan({0, 1.0}, NoiseParam{0.1}), std::invalid_argument);
  CHECK_THROWS_AS(exact_stats(NoiseParam{0.26}), std::invalid_argument);
  CHECK_THROWS_AS(exact_stats(NoiseParam{-0.01}), std::invalid_argument);
  CHECK_THROWS_AS(alice_phase(2), std::out_of_range);
}

TEST_CASE("exact statistics at the classical, quantum and PR-box points") {
  CHECK(exact_stats(NoiseParam{0.0}).s2 == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(exact_stats(NoiseParam{0.25}).s2 == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::abs(exact_stats(NoiseParam::quantum()).s2 - 2.0 * std::sqrt(2.0)) < 1e-12);
}

TEST_CASE("exact statistics over the p grid agree with a fine r-grid enumeration") {
  for (int i = 0; i <= 25; ++i) {
    const double p = i / 100.0;
    const auto stats = exact_stats(NoiseParam{p});
    CHECK(std::abs(stats.s2 - (4.0 - 8.0 * p)) < 1e-12);
    CHECK(stats.local_detection_alice == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(stats.local_detection_bob == doctest::Approx(1.0).epsilon(1e-12));

    const Tally grid = enumerate_grid(p, 2000, false);
    for (int a = 0; a < 2; ++a) {
      CHECK(std::abs(stats.marginal_alice[a]) < 1e-12);
      CHECK(std::abs(stats.marginal_bob[a]) < 1e-12);
      for (int b = 0; b < 2; ++b) {
        const double expected = target_sign(a, b) * (1.0 - 2.0 * p);
        CHECK(std::abs(stats.correlation[a][b] - expected) < 1e-12);
        CHECK(std::abs(stats.coincidence_probability[a][b] - 0.5) < 1e-12);
        CHECK(std::abs(stats.correlation_early[a][b] - stats.correlation_late[a][b]) < 1e-12);
        // independent route
        CHECK(grid.coinc[a][b] / (kAngles * 2000.0) == doctest::Approx(0.5).epsilon(1e-9));
        CHECK(grid.product[a][b] / grid.coinc[a][b] == doctest::Approx(expected).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("outside the noise bands the model is a PR box") {
  for (double p : {0.05, 0.1, 0.25}) {
    const Tally t = enumerate_grid(p, 2000, true);
    Pair e{};
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) e[a][b] = t.product[a][b] / t.coinc[a][b];
    CHECK(s2_of(e) == doctest::Approx(4.0).epsilon(1e-12));
  }
}

TEST_CASE("sampled plans converge to the exact statistics") {
  const NoiseParam p = NoiseParam::quantum();
  const auto exact = exact_stats(p);
  Tally t;
  for (std::uint64_t i = 0; i < 100000; ++i) {
    CounterRng rng(17, i, CounterRng::Purpose::Source);
    std::uniform_int_distribution<int> setting(0, 1);
    const int a = setting(rng);
    const int b = setting(rng);
    const auto hv = sample_hidden(rng);
    const auto pa = alice_plan(hv, p);
    const auto pb = bob_plan(hv, p);
    if (pa[a].slot != pb[b].slot) continue;
    t.coinc[a][b] += 1.0;
    t.product[a][b] += sign_of(pa[a].sign) * sign_of(pb[b].sign);
  }
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      const double e = t.product[a][b] / t.coinc[a][b];
      const double se = std::sqrt((1.0 - e * e) / t.coinc[a][b]);
      CHECK(std::abs(e - exact.correlation[a][b]) <= 4.0 * se);
    }
}
