#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace rampsched {

/// What a profile's samples measure. Power profiles must be non-negative.
enum class Quantity { power, price };

/// A uniformly sampled periodic time series covering one period.
///
/// Samples sit at t_i = i * dt for i in [0, size). The period is
/// dt * size and index arithmetic wraps, so sample(-1) is the last sample.
/// Values are immutable after construction.
class SampledProfile {
 public:
  static constexpr std::size_t kMinSamples = 4;

  SampledProfile(double dt_h, std::vector<double> values, Quantity quantity = Quantity::power);

  double dt() const noexcept { return dt_; }
  std::size_t size() const noexcept { return values_.size(); }
  double period() const noexcept { return dt_ * static_cast<double>(values_.size()); }
  Quantity quantity() const noexcept { return quantity_; }
  std::span<const double> values() const noexcept { return values_; }

  double sample(std::int64_t i) const noexcept;
  /// Periodic linear interpolation at time t (hours, any real value).
  double at(double t_h) const noexcept;

  double mean() const noexcept;
  double min() const noexcept;
  double max() const noexcept;

  bool same_grid(const SampledProfile& other) const noexcept;

 private:
  double dt_;
  std::vector<double> values_;
  Quantity quantity_;
};

/// Column roles understood by the CSV loader.
enum class ColumnRole { load, pv, price };

using ColumnMap = std::map<std::string, ColumnRole>;

/// Default mapping for `timestamp,load_kw[,pv_kw][,price_usd_kwh]` files.
ColumnMap default_column_map();

struct CsvReadOptions {
  std::string timestamp_column = "timestamp";
  /// Multiplies every power column (load, pv); lets callers normalize
  /// system-level data to a single plant.
  double power_scale = 1.0;
  /// Allowed relative deviation of any timestamp gap from the median gap.
  double spacing_jitter = 0.01;
};

/// Profiles read from one CSV file, keyed by column name.
struct ProfileTable {
  double start_epoch_s = 0.0;
  std::map<std::string, SampledProfile> columns;

  const SampledProfile& at(const std::string& name) const;
  bool contains(const std::string& name) const { return columns.count(name) != 0; }
};

/// Parse a header-prefixed CSV. Timestamps are ISO-8601 (naive or `Z`) or
/// epoch seconds. Only columns present in `column_map` are read; each
/// becomes one profile with dt inferred from the median timestamp gap.
ProfileTable load_csv(std::istream& in, const ColumnMap& column_map = default_column_map(),
                      const CsvReadOptions& options = {});

/// Write `timestamp,<name>...` rows. All profiles must share one grid.
/// Values use the shortest representation that round-trips exactly.
void write_csv(std::ostream& out, std::span<const std::pair<std::string, const SampledProfile*>> columns,
               double start_epoch_s = 0.0);

/// Parse a timestamp field to epoch seconds; throws ValidationError.
double parse_timestamp(const std::string& field);
/// ISO-8601 `YYYY-MM-DDTHH:MM:SS` for whole seconds, plain epoch seconds otherwise.
std::string format_timestamp(double epoch_s);

/// Cell-averaged periodic linear interpolation onto a grid of step
/// `new_dt_h`, followed by a centered circular moving average of
/// `smooth_window` samples. Preserves the mean.
SampledProfile resample_periodic(const SampledProfile& p, double new_dt_h, int smooth_window = 1);

struct DuckCurve {
  SampledProfile load;
  SampledProfile pv;
  SampledProfile net;
};

/// 24 h synthetic duck curve: base load plus a Gaussian evening bump
/// (19:00, sigma 2 h), half-sine PV between 06:00 and 18:00, and the
/// net load floored at zero.
DuckCurve synth_duck_curve(double base_kw, double evening_peak_kw, double pv_peak_kw, double dt_h = 0.25);

/// Samples a callable f(t_h) on a periodic grid of `n` nodes over `period_h`.
template <class F>
SampledProfile sample_function(F&& f, double period_h, std::size_t n, Quantity q = Quantity::power) {
  std::vector<double> v(n);
  const double dt = period_h / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = f(dt * static_cast<double>(i));
  return SampledProfile(dt, std::move(v), q);
}

}  // namespace rampsched
