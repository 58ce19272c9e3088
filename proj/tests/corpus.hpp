#pragma once

// Shared scenario corpus for unit, property and acceptance tests.

#include <string>
#include <vector>

#include "rampsched/pmp.hpp"

namespace rampsched::testing {

struct CorpusEntry {
  std::string name;
  Scenario scenario;
  bool interior = false;  // c_m/2g - p_L stays inside [0, P̄] everywhere
};

/// g used throughout the corpus, $/(kW^2 h).
inline constexpr double kG = 1e-3;

/// Scenario with constant c_m chosen so that c_m / 2g = x_star.
Scenario make_case(SampledProfile load, double x_star, double pbar, double d,
                   std::vector<double> schedule = default_alpha_schedule());

SampledProfile sinusoid(std::size_t n, double mean, double amp);
SampledProfile two_peak(std::size_t n);
SampledProfile constant(std::size_t n, double v);
SampledProfile duck(std::size_t n);

/// At least ten scenarios on an n-node day (n must divide into 24 h evenly
/// for the duck-curve entries: 48, 96, 192, ...).
std::vector<CorpusEntry> corpus(std::size_t n = 96);

}  // namespace rampsched::testing
