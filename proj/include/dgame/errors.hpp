#pragma once

#include <stdexcept>
#include <string>

namespace dgame {

/// Invalid model or call parameter (bad m, out-of-range config value, ...).
class ParameterError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// The price left the representable range; the realization cannot continue.
class PriceOverflow : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A fit could not be carried out or did not converge.
class FitError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace dgame
