#include "rampsched/profiles.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "rampsched/errors.hpp"

namespace rampsched {

namespace {

std::size_t wrap_index(std::int64_t i, std::size_t n) noexcept {
  const auto m = static_cast<std::int64_t>(n);
  auto r = i % m;
  if (r < 0) r += m;
  return static_cast<std::size_t>(r);
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, pos == std::string::npos ? std::string::npos : pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last && std::isfinite(out);
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

// Integral of the periodic piecewise-linear interpolant from 0 to t.
class PeriodicIntegral {
 public:
  explicit PeriodicIntegral(const SampledProfile& p) : p_(p), prefix_(p.size() + 1, 0.0) {
    const auto v = p.values();
    const std::size_t n = v.size();
    for (std::size_t i = 0; i < n; ++i) {
      prefix_[i + 1] = prefix_[i] + 0.5 * p.dt() * (v[i] + v[(i + 1) % n]);
    }
  }

  double operator()(double t) const {
    const double period = p_.period();
    const double k = std::floor(t / period);
    double r = t - k * period;
    const double s = r / p_.dt();
    auto i = static_cast<std::size_t>(std::floor(s));
    if (i >= p_.size()) i = p_.size() - 1;
    const double f = s - static_cast<double>(i);
    const double a = p_.sample(static_cast<std::int64_t>(i));
    const double b = p_.sample(static_cast<std::int64_t>(i) + 1);
    const double partial = p_.dt() * (a * f + 0.5 * (b - a) * f * f);
    return k * prefix_.back() + prefix_[i] + partial;
  }

 private:
  const SampledProfile& p_;
  std::vector<double> prefix_;
};

}  // namespace

SampledProfile::SampledProfile(double dt_h, std::vector<double> values, Quantity quantity)
    : dt_(dt_h), values_(std::move(values)), quantity_(quantity) {
  if (!(dt_ > 0.0) || !std::isfinite(dt_)) throw ValidationError("profile dt must be positive and finite");
  if (values_.size() < kMinSamples) {
    throw ShortSeriesError("profile needs at least 4 samples, got " + std::to_string(values_.size()));
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) throw ValidationError("non-finite sample at index " + std::to_string(i));
    if (quantity_ == Quantity::power && values_[i] < 0.0) {
      throw ValidationError("negative power sample at index " + std::to_string(i));
    }
  }
}

double SampledProfile::sample(std::int64_t i) const noexcept { return values_[wrap_index(i, values_.size())]; }

double SampledProfile::at(double t_h) const noexcept {
  const double s = t_h / dt_;
  const double fl = std::floor(s);
  const double f = s - fl;
  const auto i = static_cast<std::int64_t>(fl);
  const double a = sample(i);
  if (f == 0.0) return a;
  return a + f * (sample(i + 1) - a);
}

double SampledProfile::mean() const noexcept {
  return std::accumulate(values_.begin(), values_.end(), 0.0) / static_cast<double>(values_.size());
}

double SampledProfile::min() const noexcept { return *std::min_element(values_.begin(), values_.end()); }
double SampledProfile::max() const noexcept { return *std::max_element(values_.begin(), values_.end()); }

bool SampledProfile::same_grid(const SampledProfile& other) const noexcept {
  return size() == other.size() && std::abs(dt_ - other.dt_) <= 1e-12 * dt_;
}

const SampledProfile& ProfileTable::at(const std::string& name) const {
  const auto it = columns.find(name);
  if (it == columns.end()) throw ValidationError("column '" + name + "' not present");
  return it->second;
}

ColumnMap default_column_map() {
  return {{"load_kw", ColumnRole::load}, {"pv_kw", ColumnRole::pv}, {"price_usd_kwh", ColumnRole::price}};
}

double parse_timestamp(const std::string& field) {
  if (field.empty()) throw ValidationError("empty timestamp");
  const bool iso = field.find(':') != std::string::npos || field.find('-', 1) != std::string::npos;
  if (!iso) {
    double v = 0.0;
    if (!parse_double(field, v)) throw ValidationError("bad epoch timestamp '" + field + "'");
    return v;
  }
  int y = 0, mo = 0, d = 0, h = 0, mi = 0;
  double sec = 0.0;
  char sep = 0;
  int consumed = 0;
  const int n = std::sscanf(field.c_str(), "%4d-%2d-%2d%c%2d:%2d%n", &y, &mo, &d, &sep, &h, &mi, &consumed);
  if (n < 6 || (sep != 'T' && sep != ' ')) throw ValidationError("bad ISO-8601 timestamp '" + field + "'");
  std::string rest = field.substr(static_cast<std::size_t>(consumed));
  if (!rest.empty() && rest.back() == 'Z') rest.pop_back();
  if (!rest.empty()) {
    if (rest.front() != ':' || !parse_double(rest.substr(1), sec)) {
      throw ValidationError("bad ISO-8601 timestamp '" + field + "'");
    }
  }
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || sec < 0.0 || sec >= 61.0) {
    throw ValidationError("out-of-range ISO-8601 timestamp '" + field + "'");
  }
  std::tm tm{};
  tm.tm_year = y - 1900;
  tm.tm_mon = mo - 1;
  tm.tm_mday = d;
  tm.tm_hour = h;
  tm.tm_min = mi;
  return static_cast<double>(timegm(&tm)) + sec;
}

std::string format_timestamp(double epoch_s) {
  const double whole = std::round(epoch_s);
  if (std::abs(whole - epoch_s) > 1e-6) return format_double(epoch_s);
  const auto t = static_cast<std::time_t>(whole);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%S", &tm);
  return buf;
}

ProfileTable load_csv(std::istream& in, const ColumnMap& column_map, const CsvReadOptions& options) {
  std::string line;
  std::size_t line_no = 0;
  // Header
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) break;
  }
  if (line_no == 0 || trim(line).empty()) throw ValidationError("CSV is empty (header row required)");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);
  const auto header = split_fields(line);

  std::size_t ts_col = header.size();
  struct Mapped {
    std::size_t col;
    std::string name;
    ColumnRole role;
    std::vector<double> values;
  };
  std::vector<Mapped> mapped;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == options.timestamp_column) {
      ts_col = c;
      continue;
    }
    const auto it = column_map.find(header[c]);
    if (it != column_map.end()) mapped.push_back({c, header[c], it->second, {}});
  }
  if (ts_col == header.size()) {
    throw ValidationError("line 1: missing timestamp column '" + options.timestamp_column + "'");
  }
  if (mapped.empty()) throw ValidationError("line 1: no mapped numeric columns in header");

  std::vector<double> stamps;
  std::vector<std::size_t> stamp_lines;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (fields.size() != header.size()) {
      throw ValidationError(where + "expected " + std::to_string(header.size()) + " fields, got " +
                            std::to_string(fields.size()));
    }
    try {
      stamps.push_back(parse_timestamp(fields[ts_col]));
    } catch (const ValidationError& e) {
      throw ValidationError(where + e.what());
    }
    stamp_lines.push_back(line_no);
    for (auto& m : mapped) {
      const auto& f = fields[m.col];
      if (f.empty()) throw ValidationError(where + "missing value in column '" + m.name + "'");
      double v = 0.0;
      if (!parse_double(f, v)) throw ValidationError(where + "non-numeric value '" + f + "' in column '" + m.name + "'");
      if (m.role != ColumnRole::price) {
        v *= options.power_scale;
        if (v < 0.0) throw ValidationError(where + "negative power value in column '" + m.name + "'");
      }
      m.values.push_back(v);
    }
  }

  if (stamps.size() < SampledProfile::kMinSamples) {
    throw ShortSeriesError("CSV has " + std::to_string(stamps.size()) + " data rows; at least 4 required");
  }

  std::vector<double> gaps(stamps.size() - 1);
  for (std::size_t i = 0; i + 1 < stamps.size(); ++i) {
    gaps[i] = stamps[i + 1] - stamps[i];
    if (!(gaps[i] > 0.0)) {
      throw SpacingError("line " + std::to_string(stamp_lines[i + 1]) + ": timestamps not strictly increasing");
    }
  }
  auto sorted = gaps;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2), sorted.end());
  const double median = sorted[sorted.size() / 2];
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    if (std::abs(gaps[i] - median) > options.spacing_jitter * median) {
      throw SpacingError("line " + std::to_string(stamp_lines[i + 1]) + ": gap of " + format_double(gaps[i]) +
                         " s deviates from median spacing " + format_double(median) + " s");
    }
  }

  ProfileTable table;
  table.start_epoch_s = stamps.front();
  const double dt_h = median / 3600.0;
  for (auto& m : mapped) {
    const Quantity q = m.role == ColumnRole::price ? Quantity::price : Quantity::power;
    table.columns.emplace(m.name, SampledProfile(dt_h, std::move(m.values), q));
  }
  return table;
}

void write_csv(std::ostream& out, std::span<const std::pair<std::string, const SampledProfile*>> columns,
               double start_epoch_s) {
  if (columns.empty()) throw ValidationError("write_csv needs at least one column");
  const SampledProfile& first = *columns.front().second;
  for (const auto& [name, p] : columns) {
    if (!p->same_grid(first)) throw DimensionError("write_csv: column '" + name + "' is on a different grid");
  }
  out << "timestamp";
  for (const auto& c : columns) out << ',' << c.first;
  out << '\n';
  for (std::size_t i = 0; i < first.size(); ++i) {
    out << format_timestamp(start_epoch_s + static_cast<double>(i) * first.dt() * 3600.0);
    for (const auto& c : columns) out << ',' << format_double(c.second->values()[i]);
    out << '\n';
  }
}

SampledProfile resample_periodic(const SampledProfile& p, double new_dt_h, int smooth_window) {
  if (!(new_dt_h > 0.0)) throw GridError("new dt must be positive");
  if (smooth_window < 1 || smooth_window % 2 == 0) throw ValidationError("smoothing window must be odd and >= 1");
  const double period = p.period();
  const double ratio = period / new_dt_h;
  const double m_round = std::round(ratio);
  if (m_round < static_cast<double>(SampledProfile::kMinSamples) ||
      std::abs(m_round * new_dt_h - period) > 1e-6 * period) {
    throw GridError("dt " + format_double(new_dt_h) + " h does not divide the period " + format_double(period) + " h");
  }
  const auto m = static_cast<std::size_t>(m_round);
  if (static_cast<std::size_t>(smooth_window) > m) throw ValidationError("smoothing window exceeds sample count");
  const double h = period / m_round;

  // Cell averages of the piecewise-linear interpolant, centered on the new nodes.
  const PeriodicIntegral integral(p);
  std::vector<double> cells(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double t = h * static_cast<double>(j);
    cells[j] = (integral(t + 0.5 * h) - integral(t - 0.5 * h)) / h;
  }

  std::vector<double> out(m);
  const auto half = static_cast<std::int64_t>(smooth_window / 2);
  for (std::size_t j = 0; j < m; ++j) {
    double acc = 0.0;
    for (std::int64_t k = -half; k <= half; ++k) {
      acc += cells[wrap_index(static_cast<std::int64_t>(j) + k, m)];
    }
    out[j] = acc / static_cast<double>(smooth_window);
    if (p.quantity() == Quantity::power && out[j] < 0.0) out[j] = 0.0;  // round-off below zero
  }
  return SampledProfile(h, std::move(out), p.quantity());
}

DuckCurve synth_duck_curve(double base_kw, double evening_peak_kw, double pv_peak_kw, double dt_h) {
  if (base_kw < 0.0 || evening_peak_kw < 0.0 || pv_peak_kw < 0.0) {
    throw ValidationError("duck curve magnitudes must be non-negative");
  }
  constexpr double kDay = 24.0;
  if (!(dt_h > 0.0) || std::abs(std::round(kDay / dt_h) * dt_h - kDay) > 1e-9 * kDay) {
    throw GridError("dt must divide 24 h");
  }
  const auto n = static_cast<std::size_t>(std::round(kDay / dt_h));
  constexpr double kPi = 3.14159265358979323846;
  constexpr double kPeakHour = 19.0;
  constexpr double kSigma = 2.0;

  auto load_at = [&](double t) {
    // Wrapped distance so the bump is periodic over the day.
    const double d = std::remainder(t - kPeakHour, kDay);
    return base_kw + evening_peak_kw * std::exp(-0.5 * (d / kSigma) * (d / kSigma));
  };
  auto pv_at = [&](double t) {
    if (t < 6.0 || t > 18.0) return 0.0;
    return pv_peak_kw * std::max(0.0, std::sin(kPi * (t - 6.0) / 12.0));
  };

  std::vector<double> load(n), pv(n), net(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = dt_h * static_cast<double>(i);
    load[i] = load_at(t);
    pv[i] = pv_at(t);
    net[i] = std::max(0.0, load[i] - pv[i]);
  }
  return {SampledProfile(dt_h, std::move(load)), SampledProfile(dt_h, std::move(pv)),
          SampledProfile(dt_h, std::move(net))};
}

}  // namespace rampsched
