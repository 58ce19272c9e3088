#include "rampsched/errors.hpp"

namespace rampsched {

DivergenceError::DivergenceError(const std::string& what, double time_h, double x0, double lambda0)
    : Error(what), time_h_(time_h), x0_(x0), lambda0_(lambda0) {}

}  // namespace rampsched
