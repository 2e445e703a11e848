// Copyright 2026 The lecsettle Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "lec/errors.hpp"
#include "lec/time.hpp"

namespace lec {

/// Energy per interval in kWh on a fixed-resolution, interval-start UTC grid.
class IntervalSeries {
 public:
  IntervalSeries(Timestamp start, int resolution_minutes,
                 std::vector<double> values)
      : start_(start),
        resolution_minutes_(resolution_minutes),
        values_(std::move(values)) {
    if (resolution_minutes_ <= 0)
      throw DataError("interval resolution must be positive, got " +
                      std::to_string(resolution_minutes_) + " minutes");
    if (values_.empty()) throw DataError("interval series must not be empty");
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (!std::isfinite(values_[i]) || values_[i] < 0.0)
        throw DataError("invalid energy value " + format_double(values_[i]) +
                        " kWh at " + format_rfc3339(timestamp_at(i)));
    }
  }

  static IntervalSeries zeros(Timestamp start, int resolution_minutes,
                              std::size_t n) {
    return IntervalSeries(start, resolution_minutes, std::vector<double>(n, 0.0));
  }

  Timestamp start() const { return start_; }
  int resolution_minutes() const { return resolution_minutes_; }
  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  Timestamp timestamp_at(std::size_t i) const {
    return start_ + std::chrono::minutes{static_cast<long long>(i) *
                                         resolution_minutes_};
  }

  /// Sum in index order.
  double total() const {
    double s = 0.0;
    for (double v : values_) s += v;
    return s;
  }

  bool aligned_with(const IntervalSeries& other) const {
    return start_ == other.start_ &&
           resolution_minutes_ == other.resolution_minutes_ &&
           values_.size() == other.values_.size();
  }

  friend bool operator==(const IntervalSeries&, const IntervalSeries&) = default;

 private:
  Timestamp start_;
  int resolution_minutes_;
  std::vector<double> values_;
};

/// One participant. Non-PV units carry an all-zero generation series.
class HouseholdMeter {
 public:
  HouseholdMeter(std::string id, IntervalSeries consumption,
                 IntervalSeries generation)
      : id_(std::move(id)),
        consumption_(std::move(consumption)),
        generation_(std::move(generation)) {
    if (id_.empty()) throw DataError("household id must not be empty");
    if (!consumption_.aligned_with(generation_))
      throw AlignmentError("unit " + id_ +
                           ": consumption and generation series are not aligned");
  }

  const std::string& id() const { return id_; }
  const IntervalSeries& consumption() const { return consumption_; }
  const IntervalSeries& generation() const { return generation_; }

  friend bool operator==(const HouseholdMeter&, const HouseholdMeter&) = default;

 private:
  std::string id_;
  IntervalSeries consumption_;
  IntervalSeries generation_;
};

/// Ordered, non-empty set of aligned household meters with unique ids.
class Community {
 public:
  explicit Community(std::vector<HouseholdMeter> households)
      : households_(std::move(households)) {
    if (households_.empty())
      throw DataError("a community needs at least one household");
    std::unordered_set<std::string> ids;
    const auto& ref = households_.front().consumption();
    for (const auto& h : households_) {
      if (!ids.insert(h.id()).second)
        throw DataError("duplicate household id " + h.id());
      if (!h.consumption().aligned_with(ref))
        throw AlignmentError("unit " + h.id() + " is not aligned with unit " +
                             households_.front().id());
    }
  }

  std::span<const HouseholdMeter> households() const { return households_; }
  std::size_t size() const { return households_.size(); }
  const HouseholdMeter& operator[](std::size_t i) const { return households_[i]; }
  std::size_t intervals() const { return households_.front().consumption().size(); }
  Timestamp start() const { return households_.front().consumption().start(); }
  int resolution_minutes() const {
    return households_.front().consumption().resolution_minutes();
  }
  Timestamp timestamp_at(std::size_t t) const {
    return households_.front().consumption().timestamp_at(t);
  }

  friend bool operator==(const Community&, const Community&) = default;

 private:
  std::vector<HouseholdMeter> households_;
};

enum class FillGaps { none, zero };

struct LoadOptions {
  FillGaps fill_gaps = FillGaps::none;
  /// Used as the file prefix in error messages.
  std::string source = "meter csv";
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
    s.remove_prefix(1);
    s.remove_suffix(1);
  }
  return s;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    auto comma = line.find(',', pos);
    out.push_back(trim(line.substr(pos, comma == std::string_view::npos
                                            ? std::string_view::npos
                                            : comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

struct MeterRow {
  Timestamp ts;
  double consumption;
  double generation;
  std::size_t line;
};

}  // namespace detail

/// Reads `timestamp,unit_id,consumption_kwh[,generation_kwh]` rows.
/// Households appear in order of first occurrence in the file.
inline Community load_community(std::istream& in, const LoadOptions& opts = {}) {
  using namespace std::chrono;
  const std::string& src = opts.source;
  auto where = [&](std::size_t line) { return src + ":" + std::to_string(line) + ": "; };

  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw DataError(src + ": missing header row");
  ++line_no;
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);

  int col_ts = -1, col_unit = -1, col_con = -1, col_gen = -1;
  auto header = detail::split_csv_line(line);
  for (std::size_t c = 0; c < header.size(); ++c) {
    auto name = header[c];
    int* slot = name == "timestamp"         ? &col_ts
                : name == "unit_id"         ? &col_unit
                : name == "consumption_kwh" ? &col_con
                : name == "generation_kwh"  ? &col_gen
                                            : nullptr;
    if (slot == nullptr)
      throw DataError(where(1) + "unknown column '" + std::string(name) + "'");
    if (*slot != -1)
      throw DataError(where(1) + "duplicate column '" + std::string(name) + "'");
    *slot = static_cast<int>(c);
  }
  if (col_ts < 0 || col_unit < 0 || col_con < 0)
    throw DataError(where(1) +
                    "header must contain timestamp, unit_id and consumption_kwh");

  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<detail::MeterRow>> rows;

  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    auto fields = detail::split_csv_line(line);
    if (fields.size() != header.size())
      throw DataError(where(line_no) + "expected " + std::to_string(header.size()) +
                      " fields, found " + std::to_string(fields.size()));
    std::string unit(fields[col_unit]);
    if (unit.empty()) throw DataError(where(line_no) + "empty unit_id");
    auto ts = parse_rfc3339(fields[col_ts]);
    if (!ts)
      throw DataError(where(line_no) + "unit " + unit + ": bad timestamp '" +
                      std::string(fields[col_ts]) + "'");
    auto value = [&](int col, const char* name, bool optional_blank) {
      if (col < 0 || (optional_blank && fields[col].empty())) return 0.0;
      auto v = parse_double(fields[col]);
      std::string at = "unit " + unit + " at " + format_rfc3339(*ts) + ": ";
      if (!v)
        throw DataError(where(line_no) + at + name + " '" +
                        std::string(fields[col]) + "' is not a number");
      if (!std::isfinite(*v))
        throw DataError(where(line_no) + at + name + " is not finite");
      if (*v < 0.0)
        throw DataError(where(line_no) + at + name + " = " + format_double(*v) +
                        " is negative");
      return *v;
    };
    double con = value(col_con, "consumption_kwh", false);
    double gen = value(col_gen, "generation_kwh", true);

    auto [it, inserted] = rows.try_emplace(unit);
    if (inserted) order.push_back(unit);
    auto& series = it->second;
    if (!series.empty() && *ts <= series.back().ts) {
      bool duplicate = std::any_of(series.begin(), series.end(),
                                   [&](const auto& r) { return r.ts == *ts; });
      if (duplicate)
        throw DataError(where(line_no) + "duplicate row for unit " + unit + " at " +
                        format_rfc3339(*ts));
      throw AlignmentError(where(line_no) + "unit " + unit +
                           ": timestamps not strictly increasing at " +
                           format_rfc3339(*ts));
    }
    series.push_back({*ts, con, gen, line_no});
  }
  if (order.empty()) throw DataError(src + ": no meter rows");

  // Resolution is the GCD of all spacings; single-row files default to 15 min.
  seconds step{0};
  for (const auto& unit : order) {
    const auto& s = rows[unit];
    for (std::size_t k = 1; k < s.size(); ++k)
      step = seconds{std::gcd(step.count(), (s[k].ts - s[k - 1].ts).count())};
  }
  if (step.count() == 0) step = minutes{15};
  if (step.count() % 60 != 0)
    throw AlignmentError(src + ": interval spacing of " + std::to_string(step.count()) +
                         " s is not a whole number of minutes");
  const int resolution = static_cast<int>(step.count() / 60);

  std::vector<HouseholdMeter> households;
  households.reserve(order.size());

  if (opts.fill_gaps == FillGaps::none) {
    const auto& first = rows[order.front()];
    for (const auto& unit : order) {
      const auto& s = rows[unit];
      for (std::size_t k = 1; k < s.size(); ++k) {
        if (s[k].ts - s[k - 1].ts != step)
          throw AlignmentError(where(s[k].line) + "unit " + unit +
                               ": missing interval(s) before " +
                               format_rfc3339(s[k].ts) + " (expected " +
                               std::to_string(resolution) + "-minute spacing)");
      }
      if (s.front().ts != first.front().ts || s.size() != first.size())
        throw AlignmentError(src + ": unit " + unit + " covers " +
                             format_rfc3339(s.front().ts) + " +" +
                             std::to_string(s.size()) + " intervals, unit " +
                             order.front() + " covers " +
                             format_rfc3339(first.front().ts) + " +" +
                             std::to_string(first.size()));
      std::vector<double> con, gen;
      con.reserve(s.size());
      gen.reserve(s.size());
      for (const auto& r : s) {
        con.push_back(r.consumption);
        gen.push_back(r.generation);
      }
      households.emplace_back(unit, IntervalSeries(s.front().ts, resolution, std::move(con)),
                              IntervalSeries(s.front().ts, resolution, std::move(gen)));
    }
  } else {
    Timestamp lo = rows[order.front()].front().ts, hi = lo;
    for (const auto& unit : order) {
      lo = std::min(lo, rows[unit].front().ts);
      hi = std::max(hi, rows[unit].back().ts);
    }
    const auto n = static_cast<std::size_t>((hi - lo) / step) + 1;
    for (const auto& unit : order) {
      std::vector<double> con(n, 0.0), gen(n, 0.0);
      for (const auto& r : rows[unit]) {
        auto offset = r.ts - lo;
        if (offset % step != seconds{0})
          throw AlignmentError(where(r.line) + "unit " + unit + ": " +
                               format_rfc3339(r.ts) + " is off the " +
                               std::to_string(resolution) + "-minute grid");
        auto k = static_cast<std::size_t>(offset / step);
        con[k] = r.consumption;
        gen[k] = r.generation;
      }
      households.emplace_back(unit, IntervalSeries(lo, resolution, std::move(con)),
                              IntervalSeries(lo, resolution, std::move(gen)));
    }
  }
  return Community(std::move(households));
}

inline Community load_community_file(const std::string& path,
                                     FillGaps fill_gaps = FillGaps::none) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open meter csv " + path);
  return load_community(in, LoadOptions{fill_gaps, path});
}

/// Time-major rows, households in community order. Values use the shortest
/// round-trip representation so that reading the file back is bit-exact.
inline void write_meter_csv(const Community& community, std::ostream& out) {
  out << "timestamp,unit_id,consumption_kwh,generation_kwh\n";
  for (std::size_t t = 0; t < community.intervals(); ++t) {
    const std::string ts = format_rfc3339(community.timestamp_at(t));
    for (const auto& h : community.households()) {
      out << ts << ',' << h.id() << ',' << format_double(h.consumption()[t]) << ','
          << format_double(h.generation()[t]) << '\n';
    }
  }
}

struct HouseholdTotals {
  std::string id;
  double consumption_kwh = 0.0;
  double generation_kwh = 0.0;
};

inline std::vector<HouseholdTotals> annual_totals(const Community& community) {
  std::vector<HouseholdTotals> out;
  out.reserve(community.size());
  for (const auto& h : community.households())
    out.push_back({h.id(), h.consumption().total(), h.generation().total()});
  return out;
}

}  // namespace lec
