#include <cmath>
#include <filesystem>
#include <sstream>
#include <string>

#include "doctest.h"
#include "franson/harness.h"

using namespace franson;
using namespace franson::harness;
using analysis::TrialRecord;

namespace {

ScenarioConfig attack(double p, double sigma, std::uint64_t trials, unsigned workers = 1) {
  ScenarioConfig c;
  AttackScenario s;
  s.p = p;
  s.detector.jitter_sigma = sigma;
  c.kind = s;
  c.trials = trials;
  c.window_size = 5000;
  c.workers = workers;
  return c;
}

std::string serialize(const std::vector<TrialRecord>& rs) {
  std::ostringstream out;
  write_records(out, rs);
  return out.str();
}

// Replaces line `n` (1-based) of a record file with `text`.
std::string with_line(const std::string& file, std::size_t n, const std::string& text) {
  std::istringstream in(file);
  std::ostringstream out;
  std::string line;
  for (std::size_t i = 1; std::getline(in, line); ++i) out << (i == n ? text : line) << '\n';
  return out.str();
}

void expect_parse_error(const std::string& file, std::size_t line) {
  std::istringstream in(file);
  try {
    (void)read_records(in);
    FAIL("expected a parse error");
  } catch (const RecordParseError& e) {
    CHECK(e.line() == line);
  }
}

}  // namespace

TEST_CASE("noiseless PR-box attack gives S2 = 4 exactly") {
  const auto result = run_scenario(attack(0.0, 0.0, 20000));
  REQUIRE(result.summary.value);
  CHECK(result.summary.value->value == 4.0);
  CHECK(result.summary.value->standard_error == 0.0);
  CHECK(result.summary.efficiency->coincidence_fraction == doctest::Approx(0.5).epsilon(0.02));
  CHECK(result.summary.efficiency->click_fraction_a == 1.0);
  CHECK(result.summary.efficiency->click_fraction_b == 1.0);
  CHECK(result.summary.efficiency->eta_a == result.summary.efficiency->coincidence_fraction);
  CHECK(result.summary.efficiency->eta_b == doctest::Approx(0.5).epsilon(0.02));
  CHECK(result.summary.violates_fast_switch);
  CHECK(result.summary.exceeds_quantum);
  REQUIRE(result.summary.efficiency_bound);
  CHECK(*result.summary.efficiency_bound == doctest::Approx(6.0).epsilon(0.05));
}

TEST_CASE("attack at the quantum noise point reproduces 2 sqrt 2") {
  const auto result = run_scenario(attack(lhv::NoiseParam::quantum().p, 0.0, 60000));
  const auto& v = *result.summary.value;
  CHECK(std::abs(v.value - 2 * std::sqrt(2.0)) < 4 * v.standard_error);
  CHECK(result.summary.violates_lhv);
  CHECK_FALSE(result.summary.violates_fast_switch);
  CHECK(result.summary.series.size() == 12);
}

TEST_CASE("one-second windows at the quantum noise point") {
  auto c = attack(lhv::NoiseParam::quantum().p, 0.0, 135000);
  const auto result = run_scenario(c);
  REQUIRE(result.summary.series.size() == 27);
  for (const auto& w : result.summary.series) {
    REQUIRE(w.value);
    CHECK(std::abs(w.value->value - 2 * std::sqrt(2.0)) < 4 * w.value->standard_error);
  }
  CHECK(result.summary.window_sd > 0.0);

  const auto whole = analysis::windowed_series(result.records, 135000);
  REQUIRE(whole.size() == 1);
  CHECK(whole[0].value->value == result.summary.value->value);
  CHECK(whole[0].value->standard_error == result.summary.value->standard_error);
  CHECK(run_scenario(c).summary.window_sd == result.summary.window_sd);
}

TEST_CASE("PR filter on attack records restores S2 = 4") {
  const auto result = run_scenario(attack(0.2, 0.0, 20000));
  const auto kept = analysis::pr_filter(result.records, lhv::NoiseParam{0.2});
  const auto s = analysis::chsh(analysis::CorrelationTable::from_records(kept, 2, 2));
  CHECK(s.value == 4.0);

  auto c = attack(0.2, 0.0, 100);
  c.store_hidden = false;
  const auto bare = run_scenario(c);
  CHECK_THROWS_AS(analysis::pr_filter(bare.records, lhv::NoiseParam{0.2}), std::invalid_argument);
}

TEST_CASE("honest source") {
  ScenarioConfig c;
  c.kind = HonestScenario{1.0, 1.0, 2};
  c.trials = 100000;
  c.workers = 2;
  const auto result = run_scenario(c);
  const auto& v = *result.summary.value;
  CHECK(std::abs(v.value - 2 * std::sqrt(2.0)) < 4 * v.standard_error);
  CHECK(std::abs(result.summary.efficiency->coincidence_fraction - 0.5) < 0.01);
  CHECK(result.summary.violates_lhv);

  c.kind = HonestScenario{1.0, 1.0, 4};
  const auto chained = run_scenario(c);
  CHECK(chained.table->alice_settings() == 4);
  CHECK_FALSE(chained.summary.efficiency_bound);
  const auto& cv = *chained.summary.value;
  CHECK(std::abs(cv.value - 8 * std::cos(optics::kPi / 8)) < 4 * cv.standard_error);
}

TEST_CASE("bounds scenario") {
  ScenarioConfig c;
  c.kind = BoundsScenario{2, 6};
  const auto result = run_scenario(c);
  CHECK(result.records.empty());
  REQUIRE(result.summary.bounds_table.size() == 5);
  CHECK(result.summary.bounds_table[3].n == 5);
  CHECK(result.summary.bounds_table[3].visibility_threshold ==
        doctest::Approx(0.9463160018144406).epsilon(1e-12));
  std::ostringstream out;
  write_bounds(out, result.summary.bounds_table);
  CHECK(out.str().rfind("N,lhv,fast_switch,quantum,algebraic,visibility_threshold\n2,2,3,", 0) == 0);
}

TEST_CASE("configuration validation fails before any trial") {
  CHECK_THROWS_AS(run_scenario(attack(0.3, 0.0, 10)), std::invalid_argument);
  CHECK_THROWS_AS(run_scenario(attack(0.1, -1.0, 10)), std::invalid_argument);
  CHECK_THROWS_AS(run_scenario(attack(0.1, 0.0, 0)), std::invalid_argument);
  ScenarioConfig c;
  c.kind = HonestScenario{1.2, 1.0, 2};
  CHECK_THROWS_AS(run_scenario(c), std::invalid_argument);
  c.kind = BoundsScenario{3, 2};
  CHECK_THROWS_AS(run_scenario(c), std::invalid_argument);
}

TEST_CASE("runs are deterministic and independent of the worker count") {
  const auto one = run_scenario(attack(0.1, 0.03, 30000, 1));
  const auto again = run_scenario(attack(0.1, 0.03, 30000, 1));
  const auto eight = run_scenario(attack(0.1, 0.03, 30000, 8));
  CHECK(one.records == again.records);
  CHECK(one.records == eight.records);
  CHECK(*one.table == *eight.table);
  CHECK(one.summary.value->value == eight.summary.value->value);

  auto other_seed = attack(0.1, 0.03, 30000, 1);
  other_seed.seed = 2;
  CHECK_FALSE(run_scenario(other_seed).records == one.records);

  // a trial depends only on (seed, index)
  const AttackScenario s = std::get<AttackScenario>(attack(0.1, 0.03, 1).kind);
  CHECK(attack_trial(s, 1, 12345, true) == one.records[12345]);
}

TEST_CASE("jitter lowers the click fraction and the Bell value") {
  const auto quiet = run_scenario(attack(lhv::NoiseParam::quantum().p, 0.0, 30000));
  const auto noisy = run_scenario(attack(lhv::NoiseParam::quantum().p, 0.05, 30000));
  CHECK(noisy.summary.efficiency->click_fraction_a < quiet.summary.efficiency->click_fraction_a);
  CHECK(noisy.summary.value->value < quiet.summary.value->value);
  // earliest policy still resolves every emission
  CHECK(noisy.summary.efficiency->resolved_fraction_a == 1.0);
}

TEST_CASE("sigma calibration") {
  CHECK(calibrate_sigma(1.0, 0.95) == 0.0);
  CHECK_THROWS_AS(calibrate_sigma(0.0, 0.95), std::invalid_argument);
  CHECK_THROWS_AS(calibrate_sigma(0.01, 0.95), std::invalid_argument);
  CHECK_THROWS_AS(calibrate_sigma(0.9, 0.4), std::invalid_argument);

  // Alice sees beta on both ports of her unrealized slot; Bob stays clean.
  // Mean clean fraction ((1 - q)^2 + 1) / 2 = 0.976 gives sigma = 0.0266871.
  const double closed_form = 0.02668714697500652;
  CHECK(station_click_fraction(closed_form, 0.95) == doctest::Approx(0.976).epsilon(0.002));
  CHECK(station_click_fraction(0.0, 0.95) == 1.0);
  const double sigma = calibrate_sigma(0.976, 0.95);
  CHECK(std::abs(sigma - closed_form) < 0.05 * closed_form);
  CHECK(std::abs(station_click_fraction(sigma, 0.95) - 0.976) <= 0.002);
}

TEST_CASE("record files round-trip byte for byte") {
  const std::string empty = serialize({});
  CHECK(empty == std::string(kRecordSchema) +
                     "\nindex,j,k,a_slot,a_port,b_slot,b_port,reject_reason,n,r,a_clicks,b_clicks\n");
  std::istringstream in_empty(empty);
  CHECK(read_records(in_empty).empty());

  auto c = attack(0.15, 0.04, 100000);
  c.kind = AttackScenario{0.15, {1.0, 0.95, 0.04}, detector::MultiClickPolicy::Discard};
  const auto result = run_scenario(c);
  const std::string text = serialize(result.records);
  std::istringstream in(text);
  const auto back = read_records(in);
  CHECK(back == result.records);
  CHECK(serialize(back) == text);

  ScenarioConfig h;
  h.kind = HonestScenario{0.9, 0.7, 3};
  h.trials = 5000;
  const auto honest = run_scenario(h);
  std::istringstream hin(serialize(honest.records));
  CHECK(read_records(hin) == honest.records);

  const auto dir = std::filesystem::temp_directory_path() / "franson_record_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "trials.csv";
  write_records(path, result.records);
  CHECK_FALSE(std::filesystem::exists(dir / "trials.csv.tmp"));
  CHECK(read_records(path) == result.records);
  std::filesystem::remove_all(dir);
}

TEST_CASE("malformed record files report the offending line") {
  const auto result = run_scenario(attack(0.1, 0.0, 5));
  const std::string good = serialize(result.records);

  expect_parse_error(with_line(good, 1, "# franson-trials v2"), 1);
  expect_parse_error(with_line(good, 2, "index,j,k"), 2);
  expect_parse_error(with_line(good, 4, "1,1,2,E,+,E,+,,3"), 4);
  expect_parse_error(with_line(good, 3, "0,2,2,E,+,E,+,,3,0.1,1,1"), 3);
  expect_parse_error(with_line(good, 3, "0,1,3,E,+,E,+,,3,0.1,1,1"), 3);
  expect_parse_error(with_line(good, 3, "0,1,2,E,+,E,+,slot-mismatch,3,0.1,1,1"), 3);
  expect_parse_error(with_line(good, 3, "0,1,2,E,+,L,+,,3,0.1,1,1"), 3);
  expect_parse_error(with_line(good, 3, "0,1,2,X,+,E,+,,3,0.1,1,1"), 3);
  expect_parse_error(with_line(good, 3, "0,1,2,E,+,E,+,,8,0.1,1,1"), 3);
  expect_parse_error(with_line(good, 3, "0,1,2,E,+,E,+,,3,1.5,1,1"), 3);
  expect_parse_error(with_line(good, 3, "0,1,2,E,+,E,+,,3,,1,1"), 3);
  expect_parse_error(with_line(good, 3, "0,1,2,,,E,+,single-sided,3,0.1,1,1"), 3);
  expect_parse_error(with_line(good, 3, "x,1,2,E,+,E,+,,3,0.1,1,1"), 3);
  expect_parse_error(with_line(good, 6, "5,1,2,E,+,E,+,,3,0.1,1,zero"), 6);

  std::istringstream ok(with_line(good, 3, "0,1,2,,,E,+,discarded-multiclick,3,0.1,2,1"));
  CHECK(read_records(ok)[0].a.kind == detector::ResolvedOutcome::Kind::Discarded);
  CHECK_THROWS_AS(read_records(std::filesystem::path("/nonexistent/franson.csv")), std::runtime_error);
}

TEST_CASE("summary and series output") {
  const auto result = run_scenario(attack(0.0, 0.0, 10000));
  std::ostringstream out;
  write_summary(out, result.summary);
  CHECK(out.str() ==
        "scenario,S2,SE,window_sd,click_frac_A,click_frac_B,coinc_frac,eta_A,eta_B,bound_lhv,"
        "bound_fast_switch,bound_quantum\nattack,4,0,0,1,1," +
            format_double(result.summary.efficiency->coincidence_fraction) + "," +
            format_double(result.summary.efficiency->eta_a) + "," +
            format_double(result.summary.efficiency->eta_b) + ",2,3," +
            format_double(2 * std::cos(optics::kPi / 4) * 2) + "\n");
  std::ostringstream series;
  write_series(series, result.summary.series);
  CHECK(series.str() == "window,S2,SE\n0,4,0\n1,4,0\n");
  CHECK(format_double(0.1) == "0.1");
}
