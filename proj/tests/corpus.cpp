#include "corpus.hpp"

#include <cmath>
#include <numbers>

namespace rampsched::testing {

Scenario make_case(SampledProfile load, double x_star, double pbar, double d, std::vector<double> schedule) {
  CostModel c;
  c.g = kG;
  c.d = d;
  c.alpha = schedule.back();
  c.pbar_kw = pbar;
  c.cm = 2.0 * kG * x_star;
  Scenario sc = make_scenario(std::move(load), c, fleet_for_bound(pbar));
  sc.alpha_schedule = std::move(schedule);
  return sc;
}

SampledProfile sinusoid(std::size_t n, double mean, double amp) {
  return sample_function([=](double t) { return mean + amp * std::sin(2.0 * std::numbers::pi * t / 24.0); }, 24.0, n);
}

SampledProfile two_peak(std::size_t n) {
  return sample_function(
      [](double t) {
        auto bump = [t](double c, double s) {
          const double r = std::remainder(t - c, 24.0);
          return std::exp(-0.5 * r * r / (s * s));
        };
        return 80.0 + 30.0 * bump(8.0, 1.5) + 40.0 * bump(19.0, 1.5);
      },
      24.0, n);
}

SampledProfile constant(std::size_t n, double v) {
  return sample_function([v](double) { return v; }, 24.0, n);
}

SampledProfile duck(std::size_t n) { return synth_duck_curve(100.0, 50.0, 120.0, 24.0 / static_cast<double>(n)).net; }

std::vector<CorpusEntry> corpus(std::size_t n) {
  std::vector<CorpusEntry> c;
  c.push_back({"duck-active", make_case(duck(n), 120.0, 150.0, 1.0)});
  c.push_back({"duck-interior", make_case(duck(n), 200.0, 300.0, 1.0), true});
  c.push_back({"duck-stiff-ramp", make_case(duck(n), 120.0, 150.0, 10.0)});
  c.push_back({"duck-soft-ramp", make_case(duck(n), 120.0, 150.0, 0.1)});
  c.push_back({"sinusoid-interior", make_case(sinusoid(n, 100.0, 40.0), 150.0, 100.0, 1.0), true});
  c.push_back({"sinusoid-active", make_case(sinusoid(n, 100.0, 40.0), 120.0, 50.0, 1.0)});
  c.push_back({"two-peak", make_case(two_peak(n), 150.0, 120.0, 1.0)});
  c.push_back({"two-peak-tight", make_case(two_peak(n), 130.0, 40.0, 0.1)});
  c.push_back({"constant-interior", make_case(constant(n, 100.0), 150.0, 100.0, 1.0), true});
  c.push_back({"constant-upper", make_case(constant(n, 100.0), 250.0, 100.0, 1.0)});
  c.push_back({"constant-lower", make_case(constant(n, 100.0), 50.0, 100.0, 1.0)});

  // Time-varying revenue rate on the sinusoid grid.
  Scenario tv = make_case(sinusoid(n, 100.0, 40.0), 150.0, 80.0, 1.0);
  tv.cost.cm = sample_function(
      [](double t) { return 2.0 * kG * (150.0 + 20.0 * std::cos(2.0 * std::numbers::pi * t / 24.0)); }, 24.0, n,
      Quantity::price);
  c.push_back({"sinusoid-varying-cm", tv});
  return c;
}

}  // namespace rampsched::testing
