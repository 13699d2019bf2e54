#pragma once

#include <stdexcept>
#include <string>

namespace sslcox {

// Bad user input: malformed files, invalid flags, degenerate data.
class input_error : public std::runtime_error {
public:
  explicit input_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical breakdown: non-finite working quantities, failed calibration.
class numerical_error : public std::runtime_error {
public:
  explicit numerical_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Cross-validation could not produce a usable model.
class tuning_error : public std::runtime_error {
public:
  explicit tuning_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace sslcox
