#pragma once
#include <stdexcept>
#include <string>

namespace grankin {

// bad or inconsistent user input (config file, parameter ranges)
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// a numerical invariant did not hold; `check` names it
struct NumericError : std::runtime_error {
  std::string check;
  NumericError(std::string name, const std::string& what)
      : std::runtime_error(name + ": " + what), check(std::move(name)) {}
};

// file input/output
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace grankin
