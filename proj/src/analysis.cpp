#include "franson/analysis.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

namespace franson::analysis {

namespace {

using detector::ResolvedOutcome;

std::string pair_name(int a, int b) {
  return "E(A" + std::to_string(2 * a + 1) + "B" + std::to_string(2 * b + 2) + ")";
}

bool in_pr_bands(double r, double p) {
  return (r >= p && r < 0.5 - p) || (r >= 0.5 + p && r < 1.0 - p);
}

}  // namespace

std::string_view to_string(RejectReason reason) {
  switch (reason) {
    case RejectReason::None: return "";
    case RejectReason::SingleSided: return "single-sided";
    case RejectReason::NoClick: return "no-click";
    case RejectReason::SlotMismatch: return "slot-mismatch";
    case RejectReason::DiscardedMulticlick: return "discarded-multiclick";
  }
  return "";
}

RejectReason parse_reject_reason(std::string_view text) {
  for (const auto r : {RejectReason::None, RejectReason::SingleSided, RejectReason::NoClick,
                       RejectReason::SlotMismatch, RejectReason::DiscardedMulticlick})
    if (to_string(r) == text) return r;
  throw std::invalid_argument("unknown reject reason '" + std::string(text) + "'");
}

Postselection postselect(const TrialRecord& record) {
  using Kind = ResolvedOutcome::Kind;
  Postselection out;
  const auto& a = record.a;
  const auto& b = record.b;
  if (a.kind == Kind::Discarded || b.kind == Kind::Discarded) {
    out.reason = RejectReason::DiscardedMulticlick;
  } else if (a.kind == Kind::NoClick && b.kind == Kind::NoClick) {
    out.reason = RejectReason::NoClick;
  } else if (a.kind == Kind::NoClick || b.kind == Kind::NoClick) {
    out.reason = RejectReason::SingleSided;
  } else if (a.slot != b.slot || !is_coincidence_slot(a.slot)) {
    out.reason = RejectReason::SlotMismatch;
  } else {
    out.slot = time_slot_of(a.slot);
    out.a = sign_of(a.port);
    out.b = sign_of(b.port);
  }
  return out;
}

Estimate PairCounts::correlation() const {
  const std::uint64_t n = coincidences();
  if (n == 0) throw UndefinedCorrelation("no coincidences");
  const double nd = static_cast<double>(n);
  const double e = (static_cast<double>(pp + mm) - static_cast<double>(pm + mp)) / nd;
  return {e, std::sqrt(std::max(0.0, 1.0 - e * e) / nd)};
}

PairCounts& PairCounts::operator+=(const PairCounts& other) {
  pp += other.pp;
  pm += other.pm;
  mp += other.mp;
  mm += other.mm;
  noncoincident += other.noncoincident;
  discarded += other.discarded;
  return *this;
}

CorrelationTable::CorrelationTable(int alice_settings, int bob_settings)
    : na_(alice_settings), nb_(bob_settings) {
  if (na_ < 1 || nb_ < 1) throw std::invalid_argument("correlation table needs settings");
  cells_.resize(static_cast<std::size_t>(na_ * nb_));
}

CorrelationTable CorrelationTable::from_records(std::span<const TrialRecord> records,
                                                int alice_settings, int bob_settings) {
  CorrelationTable table(alice_settings, bob_settings);
  for (const auto& r : records) table.add(r);
  return table;
}

const PairCounts& CorrelationTable::at(int a, int b) const {
  if (a < 0 || a >= na_ || b < 0 || b >= nb_) throw std::out_of_range("setting pair out of range");
  return cells_[static_cast<std::size_t>(a * nb_ + b)];
}

PairCounts& CorrelationTable::at(int a, int b) {
  return const_cast<PairCounts&>(std::as_const(*this).at(a, b));
}

void CorrelationTable::add(const TrialRecord& record) {
  auto& cell = at(record.setting_a, record.setting_b);
  const Postselection ps = postselect(record);
  if (ps.reason == RejectReason::DiscardedMulticlick) {
    ++cell.discarded;
  } else if (!ps.coincident()) {
    ++cell.noncoincident;
  } else if (ps.a > 0) {
    ps.b > 0 ? ++cell.pp : ++cell.pm;
  } else {
    ps.b > 0 ? ++cell.mp : ++cell.mm;
  }
}

void CorrelationTable::merge(const CorrelationTable& other) {
  if (other.na_ != na_ || other.nb_ != nb_)
    throw std::invalid_argument("cannot merge tables of different shape");
  for (std::size_t i = 0; i < cells_.size(); ++i) cells_[i] += other.cells_[i];
}

Estimate CorrelationTable::correlation(int a, int b) const {
  try {
    return at(a, b).correlation();
  } catch (const UndefinedCorrelation&) {
    throw UndefinedCorrelation(pair_name(a, b) + " is undefined: no coincidences");
  }
}

double chsh_value(double e12, double e32, double e34, double e14) {
  return std::abs(e12 + e32) + std::abs(e34 - e14);
}

Estimate chsh(const CorrelationTable& table, const ChshOrdering& o) {
  const Estimate e12 = table.correlation(o.a1, o.b2);
  const Estimate e32 = table.correlation(o.a3, o.b2);
  const Estimate e34 = table.correlation(o.a3, o.b4);
  const Estimate e14 = table.correlation(o.a1, o.b4);
  const double var = e12.standard_error * e12.standard_error +
                     e32.standard_error * e32.standard_error +
                     e34.standard_error * e34.standard_error +
                     e14.standard_error * e14.standard_error;
  return {chsh_value(e12.value, e32.value, e34.value, e14.value), std::sqrt(var)};
}

Estimate chained_value(const CorrelationTable& table, int n) {
  if (n < 2) throw std::invalid_argument("chained inequality needs N >= 2");
  if (table.alice_settings() < n || table.bob_settings() < n)
    throw std::invalid_argument("table has fewer than N settings per party");
  std::vector<std::vector<double>> e(static_cast<std::size_t>(n),
                                     std::vector<double>(static_cast<std::size_t>(n), 0.0));
  double var = 0.0;
  // Only the 2N pairs in the chain are required.
  auto use = [&](int a, int b) {
    const Estimate est = table.correlation(a, b);
    e[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = est.value;
    var += est.standard_error * est.standard_error;
  };
  for (int m = 0; m < n - 1; ++m) {
    use(m, m);
    use(m + 1, m);
  }
  use(n - 1, n - 1);
  use(0, n - 1);
  return {chained_value(e), std::sqrt(var)};
}

double chained_value(const std::vector<std::vector<double>>& e) {
  const std::size_t n = e.size();
  if (n < 2) throw std::invalid_argument("chained inequality needs N >= 2");
  double s = 0.0;
  for (std::size_t m = 0; m + 1 < n; ++m) s += std::abs(e[m][m] + e[m + 1][m]);
  s += std::abs(e[n - 1][n - 1] - e[0][n - 1]);
  return s;
}

ChainBounds chained_bounds(int n) {
  if (n < 2) throw std::invalid_argument("chained inequality needs N >= 2, got " + std::to_string(n));
  const double nd = n;
  return {2.0 * nd - 2.0, 2.0 * nd - 1.0, 2.0 * nd * std::cos(optics::kPi / (2.0 * nd)), 2.0 * nd};
}

double efficiency_adjusted_bound(double eta) {
  if (!(eta > 0.0 && eta <= 1.0))
    throw std::invalid_argument("efficiency must lie in (0, 1], got " + std::to_string(eta));
  return 4.0 / eta - 2.0;
}

double critical_efficiency() { return 2.0 * (std::sqrt(2.0) - 1.0); }

EfficiencyMetrics efficiency_metrics(std::span<const TrialRecord> records) {
  if (records.empty()) throw std::invalid_argument("efficiency metrics need at least one record");
  std::uint64_t clean_a = 0, clean_b = 0, local_a = 0, local_b = 0, coinc = 0;
  for (const auto& r : records) {
    clean_a += r.a.is_clean_click();
    clean_b += r.b.is_clean_click();
    local_a += r.a.is_click();
    local_b += r.b.is_click();
    coinc += postselect(r).coincident();
  }
  const double n = static_cast<double>(records.size());
  EfficiencyMetrics m;
  m.trials = records.size();
  m.click_fraction_a = static_cast<double>(clean_a) / n;
  m.click_fraction_b = static_cast<double>(clean_b) / n;
  m.resolved_fraction_a = static_cast<double>(local_a) / n;
  m.resolved_fraction_b = static_cast<double>(local_b) / n;
  m.coincidence_fraction = static_cast<double>(coinc) / n;
  m.eta_a = local_a ? static_cast<double>(coinc) / static_cast<double>(local_a) : 0.0;
  m.eta_b = local_b ? static_cast<double>(coinc) / static_cast<double>(local_b) : 0.0;
  return m;
}

std::vector<TrialRecord> pr_filter(std::span<const TrialRecord> records, const lhv::NoiseParam& p) {
  p.validate();
  std::vector<TrialRecord> kept;
  for (const auto& r : records) {
    if (!r.hidden)
      throw std::invalid_argument("record " + std::to_string(r.index) +
                                  " has no hidden variable; the PR filter needs ground truth");
    if (in_pr_bands(r.hidden->r, p.p)) kept.push_back(r);
  }
  return kept;
}

std::vector<WindowPoint> windowed_series(std::span<const TrialRecord> records,
                                         std::uint64_t window_size, int chain_n) {
  if (window_size < 1) throw std::invalid_argument("window size must be at least 1");
  if (chain_n < 2) throw std::invalid_argument("chain length must be at least 2");
  if (records.empty()) return {};
  std::uint64_t max_index = 0;
  for (const auto& r : records) max_index = std::max(max_index, r.index);
  const std::uint64_t windows = (max_index + 1) / window_size;

  std::vector<CorrelationTable> tables(windows, CorrelationTable(chain_n, chain_n));
  for (const auto& r : records) {
    const std::uint64_t w = r.index / window_size;
    if (w < windows) tables[w].add(r);
  }
  std::vector<WindowPoint> series;
  series.reserve(windows);
  for (std::uint64_t w = 0; w < windows; ++w) {
    WindowPoint point{w, std::nullopt};
    try {
      point.value = chain_n == 2 ? chsh(tables[w]) : chained_value(tables[w], chain_n);
    } catch (const UndefinedCorrelation&) {
    }
    series.push_back(point);
  }
  return series;
}

double window_spread(const std::vector<WindowPoint>& series) {
  std::vector<double> v;
  for (const auto& p : series)
    if (p.value) v.push_back(p.value->value);
  if (v.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace franson::analysis
