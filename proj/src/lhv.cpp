#include "franson/lhv.h"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace franson::lhv {

namespace {

int sign_of_cos(double angle) { return std::cos(angle) > 0.0 ? +1 : -1; }

SignTables build_tables() {
  SignTables t;
  constexpr double step = optics::kPi / 4.0;
  constexpr double offset = optics::kPi / 8.0;
  for (int n = 0; n < kAngles; ++n) {
    const auto i = static_cast<std::size_t>(n);
    t.a1[i] = sign_of_cos(alice_phase(0).value() + n * step + offset);
    t.a3[i] = sign_of_cos(alice_phase(1).value() + n * step + offset);
    t.b2[i] = sign_of_cos(bob_phase(0).value() - n * step - offset);
    t.b4[i] = sign_of_cos(bob_phase(1).value() - n * step - offset);
  }
  for (int a = 0; a < kSettings; ++a) {
    auto& group = a == 0 ? t.g_a1 : t.g_a3;
    for (int n = 0; n < kAngles; ++n) {
      bool matches = true;
      for (int b = 0; b < kSettings; ++b)
        matches = matches && t.alice(a, n) * t.bob(b, n) == target_sign(a, b);
      if (matches) group.push_back(n);
    }
  }
  return t;
}

}  // namespace

optics::Phase alice_phase(int setting) {
  if (setting == 0) return optics::Phase::grid(0);
  if (setting == 1) return optics::Phase::grid(4);
  throw std::out_of_range("alice setting index must be 0 or 1");
}

optics::Phase bob_phase(int setting) {
  if (setting == 0) return optics::Phase::grid(-2);
  if (setting == 1) return optics::Phase::grid(-6);
  throw std::out_of_range("bob setting index must be 0 or 1");
}

void HiddenVariable::validate() const {
  if (n < 0 || n >= kAngles) throw std::invalid_argument("hidden angle index must be in 0..7");
  if (!(r >= 0.0 && r < 1.0)) throw std::invalid_argument("hidden r must be in [0, 1)");
}

HiddenVariable sample_hidden(CounterRng& rng) {
  std::uniform_int_distribution<int> angle(0, kAngles - 1);
  HiddenVariable hv;
  hv.n = angle(rng);
  hv.r = rng.uniform();
  return hv;
}

void NoiseParam::validate() const {
  if (!(p >= 0.0 && p <= 0.25))
    throw std::invalid_argument("noise parameter p must be in [0, 1/4], got " + std::to_string(p));
}

NoiseParam NoiseParam::quantum() { return {(2.0 - std::sqrt(2.0)) / 4.0}; }

std::array<RBand, 4> r_bands(const NoiseParam& p) {
  p.validate();
  return {RBand{0.0, p.p}, RBand{p.p, 0.5}, RBand{0.5, 0.5 + p.p}, RBand{0.5 + p.p, 1.0}};
}

bool slot_swap_active(double r, const NoiseParam& p) {
  return (r >= 0.0 && r < p.p) || (r >= 0.5 && r < 0.5 + p.p);
}

int SignTables::alice(int setting, int n) const {
  return (setting == 0 ? a1 : a3).at(static_cast<std::size_t>(n));
}

int SignTables::bob(int setting, int n) const {
  return (setting == 0 ? b2 : b4).at(static_cast<std::size_t>(n));
}

bool SignTables::in_group(int alice_setting, int n) const {
  const auto& g = alice_setting == 0 ? g_a1 : g_a3;
  for (int m : g)
    if (m == n) return true;
  return false;
}

const SignTables& sign_tables() {
  static const SignTables tables = build_tables();
  return tables;
}

int target_sign(int alice_setting, int bob_setting) {
  return sign_of_cos(alice_phase(alice_setting).value() + bob_phase(bob_setting).value());
}

LocalPlan bob_plan(const HiddenVariable& hv, const NoiseParam& p) {
  hv.validate();
  p.validate();
  const auto& t = sign_tables();
  const TimeSlot h = hv.r < 0.5 ? TimeSlot::Early : TimeSlot::Late;
  LocalPlan plan;
  for (int b = 0; b < kSettings; ++b)
    plan.per_setting[static_cast<std::size_t>(b)] = {h, port_of(t.bob(b, hv.n))};
  return plan;
}

LocalPlan alice_plan(const HiddenVariable& hv, const NoiseParam& p) {
  hv.validate();
  p.validate();
  const auto& t = sign_tables();
  const TimeSlot h = hv.r < 0.5 ? TimeSlot::Early : TimeSlot::Late;
  const bool swap = slot_swap_active(hv.r, p);
  LocalPlan plan;
  for (int a = 0; a < kSettings; ++a) {
    const bool with_bob = t.in_group(a, hv.n) != swap;
    plan.per_setting[static_cast<std::size_t>(a)] = {with_bob ? h : opposite(h),
                                                     port_of(t.alice(a, hv.n))};
  }
  return plan;
}

ExactStats exact_stats(const NoiseParam& p) {
  p.validate();
  struct Acc {
    double coinc = 0.0, product = 0.0;
    double coinc_early = 0.0, product_early = 0.0;
    double coinc_late = 0.0, product_late = 0.0;
  };
  std::array<std::array<Acc, kSettings>, kSettings> acc{};
  ExactStats out;

  for (int n = 0; n < kAngles; ++n) {
    for (const auto& band : r_bands(p)) {
      const double w = band.weight() / kAngles;
      if (w == 0.0) continue;
      const HiddenVariable hv{n, band.representative()};
      const LocalPlan alice = alice_plan(hv, p);
      const LocalPlan bob = bob_plan(hv, p);
      out.local_detection_alice += w;
      out.local_detection_bob += w;
      for (int a = 0; a < kSettings; ++a) {
        out.marginal_alice[static_cast<std::size_t>(a)] += w * sign_of(alice[a].sign);
        out.marginal_bob[static_cast<std::size_t>(a)] += w * sign_of(bob[a].sign);
        for (int b = 0; b < kSettings; ++b) {
          if (alice[a].slot != bob[b].slot) continue;
          auto& c = acc[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
          const double prod = sign_of(alice[a].sign) * sign_of(bob[b].sign);
          c.coinc += w;
          c.product += w * prod;
          if (alice[a].slot == TimeSlot::Early) {
            c.coinc_early += w;
            c.product_early += w * prod;
          } else {
            c.coinc_late += w;
            c.product_late += w * prod;
          }
        }
      }
    }
  }

  for (std::size_t a = 0; a < kSettings; ++a) {
    for (std::size_t b = 0; b < kSettings; ++b) {
      const auto& c = acc[a][b];
      out.coincidence_probability[a][b] = c.coinc;
      out.correlation[a][b] = c.product / c.coinc;
      out.correlation_early[a][b] = c.coinc_early > 0.0 ? c.product_early / c.coinc_early : 0.0;
      out.correlation_late[a][b] = c.coinc_late > 0.0 ? c.product_late / c.coinc_late : 0.0;
    }
  }
  const auto& e = out.correlation;
  out.s2 = std::abs(e[0][0] + e[1][0]) + std::abs(e[1][1] - e[0][1]);
  return out;
}

}  // namespace franson::lhv
