// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tensordec/lrat.hpp"

#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <sstream>

namespace tensordec::epi {

// ---------------------------------------------------------------------------
// Calendar dates (proleptic Gregorian, serial = days since 1970-01-01).

struct Date {
  int y = 1970;
  int m = 1;
  int d = 1;

  auto operator<=>(const Date&) const = default;

  long long serial() const {
    // Howard Hinnant's days_from_civil.
    const int yy = y - (m <= 2);
    const long long era = (yy >= 0 ? yy : yy - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(yy - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                         static_cast<unsigned>(d) - 1u;
    const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
    return era * 146097LL + static_cast<long long>(doe) - 719468LL;
  }

  static Date from_serial(long long z) {
    z += 719468;
    const long long era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const long long yy = static_cast<long long>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned dd = doy - (153 * mp + 2) / 5 + 1;
    const unsigned mm = mp + (mp < 10 ? 3 : -9);
    return Date{static_cast<int>(yy + (mm <= 2)), static_cast<int>(mm), static_cast<int>(dd)};
  }

  Date plus_days(long long n) const { return from_serial(serial() + n); }

  static bool valid(int y, int m, int d) {
    if (m < 1 || m > 12 || d < 1) return false;
    static constexpr int len[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    int n = len[m - 1];
    if (m == 2 && ((y % 4 == 0 && y % 100 != 0) || y % 400 == 0)) n = 29;
    return d <= n;
  }

  static std::optional<Date> parse(const std::string& s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
    for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
      if (s[i] < '0' || s[i] > '9') return std::nullopt;
    const int yy = std::stoi(s.substr(0, 4));
    const int mm = std::stoi(s.substr(5, 2));
    const int dd = std::stoi(s.substr(8, 2));
    if (!valid(yy, mm, dd)) return std::nullopt;
    return Date{yy, mm, dd};
  }

  std::string str() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", y, m, d);
    return buf;
  }
};

// ---------------------------------------------------------------------------
// Domain types.

struct CaseSeries {
  std::string region_id;
  std::vector<Date> dates;              // strictly increasing
  std::vector<long long> cumulative;    // nondecreasing after ingest cleaning
};

struct IngestResult {
  std::vector<CaseSeries> series;            // filter order
  std::vector<std::string> skipped_regions;  // filter entries with no rows
  long long monotonicity_fixes = 0;          // raw cumulative drops repaired by running max
};

struct EpiDataset {
  DenseTensor3 tensor;  // (weeks_per_quarter, quarters, regions)
  std::vector<std::string> week_labels;
  std::vector<std::string> quarter_labels;
  std::vector<std::string> region_labels;
  std::vector<long long> population;  // per region, strictly positive
  Date start_date;

  Index weeks() const { return tensor.dim(0); }
  Index quarters() const { return tensor.dim(1); }
  Index regions() const { return tensor.dim(2); }

  void validate() const {
    if (static_cast<Index>(week_labels.size()) != weeks() ||
        static_cast<Index>(quarter_labels.size()) != quarters() ||
        static_cast<Index>(region_labels.size()) != regions() ||
        static_cast<Index>(population.size()) != regions()) {
      throw std::invalid_argument("EpiDataset: label lengths do not match tensor dims");
    }
    for (long long p : population) {
      if (p <= 0) throw std::invalid_argument("EpiDataset: population entries must be positive");
    }
  }
};

struct HotspotFlag {
  Index region = 0;
  Index quarter = 0;
  Index week = 0;
  double residual = 0.0;
  double threshold = 0.0;
};

struct HotspotReport {
  std::vector<HotspotFlag> flags;
  std::string threshold_rule;  // "mean + k*std"
  double k = 5.0;
  DenseTensor3 residuals;
  std::vector<double> region_mean;  // over each region's full week series
  std::vector<double> region_std;   // sample standard deviation
  std::vector<std::string> region_labels;
};

// ---------------------------------------------------------------------------
// Ingestion.

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

inline long long parse_count(const std::string& s, std::size_t line_no, const char* what) {
  if (s.empty()) throw std::runtime_error("line " + std::to_string(line_no) + ": empty " + what);
  long long v = 0;
  for (char ch : s) {
    if (ch < '0' || ch > '9')
      throw std::runtime_error("line " + std::to_string(line_no) + ": bad " + what + " '" + s + "'");
    v = v * 10 + (ch - '0');
  }
  return v;
}

}  // namespace detail

/// Reads a cumulative-case CSV with header date,county,state,fips,cases,deaths
/// and returns one daily series per filter region over [first, last]. Days
/// with no row carry the last reported cumulative value forward (0 before the
/// first report); raw cumulative drops are repaired with a running max and
/// counted. Filter regions that never appear are listed as skipped. Malformed
/// rows abort with their line number.
inline IngestResult ingest_cases(std::istream& csv, const std::vector<std::string>& region_filter,
                                 const Date& first, const Date& last) {
  IngestResult out;
  if (last < first) return out;

  std::string line;
  if (!std::getline(csv, line)) throw std::runtime_error("line 1: missing header");
  {
    const auto cols = detail::split_csv_line(line);
    const std::vector<std::string> expect = {"date", "county", "state", "fips", "cases", "deaths"};
    if (cols != expect) throw std::runtime_error("line 1: expected header date,county,state,fips,cases,deaths");
  }

  std::map<std::string, std::size_t> region_pos;
  for (std::size_t i = 0; i < region_filter.size(); ++i) region_pos.emplace(region_filter[i], i);

  // Per region: date serial -> last reported cumulative count.
  std::vector<std::map<long long, long long>> reports(region_filter.size());
  std::vector<char> seen(region_filter.size(), 0);

  const long long first_serial = first.serial();
  const long long last_serial = last.serial();

  std::size_t line_no = 1;
  while (std::getline(csv, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cols = detail::split_csv_line(line);
    if (cols.size() != 6)
      throw std::runtime_error("line " + std::to_string(line_no) + ": expected 6 fields, got " +
                               std::to_string(cols.size()));
    const auto date = Date::parse(cols[0]);
    if (!date) throw std::runtime_error("line " + std::to_string(line_no) + ": bad date '" + cols[0] + "'");
    const auto it = region_pos.find(cols[1]);
    if (it == region_pos.end()) continue;
    const long long cases = detail::parse_count(cols[4], line_no, "case count");
    detail::parse_count(cols[5], line_no, "death count");  // validated, unused downstream

    seen[it->second] = 1;
    const long long s = date->serial();
    if (s <= last_serial) reports[it->second][s] = cases;  // pre-range rows seed the forward fill
  }

  for (std::size_t r = 0; r < region_filter.size(); ++r) {
    if (!seen[r]) {
      out.skipped_regions.push_back(region_filter[r]);
      continue;
    }
    CaseSeries s;
    s.region_id = region_filter[r];
    long long value = 0;
    auto it = reports[r].begin();
    // Roll forward through pre-range reports.
    while (it != reports[r].end() && it->first < first_serial) {
      value = std::max(value, it->second);
      ++it;
    }
    for (long long day = first_serial; day <= last_serial; ++day) {
      while (it != reports[r].end() && it->first == day) {
        if (it->second < value) {
          ++out.monotonicity_fixes;
        } else {
          value = it->second;
        }
        ++it;
      }
      s.dates.push_back(Date::from_serial(day));
      s.cumulative.push_back(value);
    }
    out.series.push_back(std::move(s));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Weekly aggregation and tensor assembly.

struct WeeklyCounts {
  std::vector<double> totals;
  long long clamped_negatives = 0;
};

/// Weekly totals as differences of the cumulative series sampled at week
/// boundaries: week w spans boundary days 7w and 7(w+1), and a boundary past
/// the series end takes the last value (forward fill). Emits ceil(days/7)
/// weeks. Negative differences are clamped to zero and counted.
inline WeeklyCounts cumulative_to_weekly(const CaseSeries& series, const Date& week_start) {
  if (series.dates.empty()) throw std::invalid_argument("cumulative_to_weekly: empty series");
  const long long start = week_start.serial();
  if (series.dates.front().serial() > start) {
    throw std::invalid_argument("cumulative_to_weekly: series for " + series.region_id +
                                " starts after the requested week start");
  }
  const long long days = series.dates.back().serial() - start + 1;
  if (days < 1) {
    throw std::invalid_argument("cumulative_to_weekly: series for " + series.region_id +
                                " ends before the requested week start");
  }
  const long long weeks = (days + 6) / 7;

  // Cumulative value at the last date <= the boundary day.
  auto value_at = [&](long long day_offset) -> long long {
    const long long target = start + day_offset;
    std::size_t lo = 0, hi = series.dates.size();
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (series.dates[mid].serial() <= target) lo = mid + 1;
      else hi = mid;
    }
    if (lo == 0)
      throw std::invalid_argument("cumulative_to_weekly: no data at or before week boundary");
    return series.cumulative[lo - 1];
  };

  WeeklyCounts out;
  out.totals.reserve(static_cast<std::size_t>(weeks));
  for (long long w = 0; w < weeks; ++w) {
    const long long diff = value_at(7 * (w + 1)) - value_at(7 * w);
    if (diff < 0) {
      ++out.clamped_negatives;
      out.totals.push_back(0.0);
    } else {
      out.totals.push_back(static_cast<double>(diff));
    }
  }
  return out;
}

/// Stacks per-region weekly series into the (week, quarter, region) tensor:
/// entry (w, q, r) = series r at global week q * weeks_per_quarter + w.
inline EpiDataset build_tensor(const std::vector<std::string>& region_names,
                               const std::vector<std::vector<double>>& weekly_by_region,
                               const std::vector<long long>& population,
                               Index weeks_per_quarter, Index quarters, const Date& start_date) {
  if (region_names.size() != weekly_by_region.size() || region_names.size() != population.size()) {
    throw std::invalid_argument("build_tensor: region name/series/population counts differ");
  }
  if (region_names.empty()) throw std::invalid_argument("build_tensor: no regions");
  const Index expected = weeks_per_quarter * quarters;
  for (std::size_t r = 0; r < region_names.size(); ++r) {
    if (static_cast<Index>(weekly_by_region[r].size()) != expected) {
      throw std::invalid_argument("build_tensor: region " + region_names[r] + " supplies " +
                                  std::to_string(weekly_by_region[r].size()) + " weeks, expected " +
                                  std::to_string(expected));
    }
  }

  EpiDataset ds;
  ds.tensor = DenseTensor3(weeks_per_quarter, quarters, static_cast<Index>(region_names.size()));
  for (Index r = 0; r < ds.regions(); ++r)
    for (Index q = 0; q < quarters; ++q)
      for (Index w = 0; w < weeks_per_quarter; ++w)
        ds.tensor(w, q, r) = weekly_by_region[static_cast<std::size_t>(r)]
                                             [static_cast<std::size_t>(q * weeks_per_quarter + w)];

  ds.region_labels = region_names;
  ds.population = population;
  ds.start_date = start_date;
  for (Index w = 0; w < weeks_per_quarter; ++w) ds.week_labels.push_back("w" + std::to_string(w + 1));
  for (Index q = 0; q < quarters; ++q) {
    const Date qs = start_date.plus_days(q * weeks_per_quarter * 7);
    const Date qe = start_date.plus_days((q + 1) * weeks_per_quarter * 7 - 1);
    ds.quarter_labels.push_back(qs.str() + ".." + qe.str());
  }
  ds.validate();
  return ds;
}

/// Divides every entry by its region's population.
inline EpiDataset normalize_by_population(const EpiDataset& ds) {
  ds.validate();
  EpiDataset out = ds;
  for (Index r = 0; r < ds.regions(); ++r) {
    const double pop = static_cast<double>(ds.population[static_cast<std::size_t>(r)]);
    for (Index q = 0; q < ds.quarters(); ++q)
      for (Index w = 0; w < ds.weeks(); ++w) out.tensor(w, q, r) = ds.tensor(w, q, r) / pop;
  }
  return out;
}

struct RateResult {
  EpiDataset rates;
  long long zero_baseline_skips = 0;  // entries where the prior week was 0
};

/// Week-over-week relative increments along each region's flattened
/// (quarter, week) timeline: (current - previous) / previous. The first week
/// is 0 by convention; a zero previous week yields 0 and bumps the counter.
inline RateResult rate_of_change(const EpiDataset& ds) {
  ds.validate();
  RateResult out;
  out.rates = ds;
  const Index wq = ds.weeks() * ds.quarters();
  for (Index r = 0; r < ds.regions(); ++r) {
    double prev = 0.0;
    for (Index g = 0; g < wq; ++g) {
      const Index w = g % ds.weeks();
      const Index q = g / ds.weeks();
      const double cur = ds.tensor(w, q, r);
      if (g == 0) {
        out.rates.tensor(w, q, r) = 0.0;
      } else if (prev == 0.0) {
        out.rates.tensor(w, q, r) = 0.0;
        ++out.zero_baseline_skips;
      } else {
        out.rates.tensor(w, q, r) = (cur - prev) / prev;
      }
      prev = cur;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Hotspots.

/// Thresholding stage: per region, flags entries whose residual strictly
/// exceeds mean + k * std over that region's own series. Standard deviation
/// is the sample (N-1) form.
inline HotspotReport flag_residuals(const DenseTensor3& residuals,
                                    const std::vector<std::string>& region_labels, double k) {
  const Index W = residuals.dim(0), Q = residuals.dim(1), R = residuals.dim(2);
  if (static_cast<Index>(region_labels.size()) != R) {
    throw std::invalid_argument("flag_residuals: label count does not match region count");
  }
  HotspotReport rep;
  rep.k = k;
  rep.threshold_rule = "mean + k*std";
  rep.residuals = residuals;
  rep.region_labels = region_labels;
  const Index n = W * Q;
  for (Index r = 0; r < R; ++r) {
    double mean = 0.0;
    for (Index q = 0; q < Q; ++q)
      for (Index w = 0; w < W; ++w) mean += residuals(w, q, r);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (Index q = 0; q < Q; ++q)
      for (Index w = 0; w < W; ++w) {
        const double d = residuals(w, q, r) - mean;
        var += d * d;
      }
    const double sd = n > 1 ? std::sqrt(var / static_cast<double>(n - 1)) : 0.0;
    rep.region_mean.push_back(mean);
    rep.region_std.push_back(sd);
    const double threshold = mean + k * sd;
    for (Index q = 0; q < Q; ++q)
      for (Index w = 0; w < W; ++w)
        if (residuals(w, q, r) > threshold) rep.flags.push_back({r, q, w, residuals(w, q, r), threshold});
  }
  return rep;
}

/// Fits the sparse low-rank model to the rate-of-change tensor and flags the
/// entries whose absolute fit residual exceeds the per-region threshold.
inline HotspotReport hotspot_detect(const EpiDataset& ds, const LratConfig& model_cfg, double k = 5.0,
                                    std::uint64_t seed = 0) {
  ds.validate();
  const RateResult rate = rate_of_change(ds);
  const LratFitResult fit = lrat_fit(rate.rates.tensor, model_cfg, seed);
  const DenseTensor3 rec = cp_reconstruct(fit.model);
  DenseTensor3 resid = rate.rates.tensor;
  for (Index idx = 0; idx < resid.size(); ++idx) {
    resid.data()[static_cast<std::size_t>(idx)] =
        std::abs(resid.data()[static_cast<std::size_t>(idx)] - rec.data()[static_cast<std::size_t>(idx)]);
  }
  return flag_residuals(resid, ds.region_labels, k);
}

// ---------------------------------------------------------------------------
// Prediction by masked completion.

struct PredictTarget {
  enum class Kind { last_week, quarter };
  Kind kind = Kind::last_week;
  std::vector<Index> regions;  // last_week: which regions lose their final week
  Index region = -1;           // quarter: which region
  Index quarter = -1;          // quarter: which quarter (0-based)

  static PredictTarget last_week_of(std::vector<Index> regions) {
    PredictTarget t;
    t.kind = Kind::last_week;
    t.regions = std::move(regions);
    return t;
  }
  static PredictTarget quarter_of(Index region, Index quarter) {
    PredictTarget t;
    t.kind = Kind::quarter;
    t.region = region;
    t.quarter = quarter;
    return t;
  }
};

struct PredictionRow {
  Index region = 0;
  Index quarter = 0;
  Index week = 0;
  double actual = 0.0;
  double predicted = 0.0;
};

struct PredictionResult {
  EpiDataset completed;
  std::vector<PredictionRow> rows;
  Index estimated_rank = 0;
  FitTrace trace;
};

/// Hides the target fiber(s), seeds them with the region's observed mean,
/// and completes the tensor under the observation constraints. Observed
/// entries pass through untouched; each hidden entry is reported against the
/// value it replaced.
inline PredictionResult predict_missing(const EpiDataset& ds, const PredictTarget& target,
                                        const LratConfig& cfg, std::uint64_t seed = 0) {
  ds.validate();
  const Index W = ds.weeks(), Q = ds.quarters(), R = ds.regions();

  ObservationMask mask(W, Q, R, true);
  if (target.kind == PredictTarget::Kind::last_week) {
    if (target.regions.empty()) throw std::invalid_argument("predict_missing: no target regions");
    for (Index r : target.regions) {
      if (r < 0 || r >= R) throw std::invalid_argument("predict_missing: region index out of range");
      mask.set(W - 1, Q - 1, r, false);
    }
  } else {
    if (target.region < 0 || target.region >= R)
      throw std::invalid_argument("predict_missing: region index out of range");
    if (target.quarter < 0 || target.quarter >= Q)
      throw std::invalid_argument("predict_missing: quarter index out of range");
    for (Index w = 0; w < W; ++w) mask.set(w, target.quarter, target.region, false);
  }
  if (mask.count_observed() == 0) throw std::invalid_argument("predict_missing: target hides all data");

  // Mean-fill the hidden entries from each region's observed entries.
  DenseTensor3 working = ds.tensor;
  for (Index r = 0; r < R; ++r) {
    double sum = 0.0;
    Index n = 0;
    for (Index q = 0; q < Q; ++q)
      for (Index w = 0; w < W; ++w)
        if (mask(w, q, r)) {
          sum += ds.tensor(w, q, r);
          ++n;
        }
    const double mean = n > 0 ? sum / static_cast<double>(n) : 0.0;
    for (Index q = 0; q < Q; ++q)
      for (Index w = 0; w < W; ++w)
        if (!mask(w, q, r)) working(w, q, r) = mean;
  }

  const LratCompletionResult comp = lrat_complete(working, mask, cfg, seed);

  PredictionResult out;
  out.completed = ds;
  out.completed.tensor = comp.completed;
  out.estimated_rank = comp.estimated_rank;
  out.trace = comp.trace;
  for (Index r = 0; r < R; ++r)
    for (Index q = 0; q < Q; ++q)
      for (Index w = 0; w < W; ++w)
        if (!mask(w, q, r)) out.rows.push_back({r, q, w, ds.tensor(w, q, r), comp.completed(w, q, r)});
  return out;
}

}  // namespace tensordec::epi
