#pragma once

#include <stdexcept>
#include <string>

namespace mslab {

/// Bad user input: malformed config, unknown key, out-of-contract argument.
/// The CLI maps this to exit code 1.
struct config_error : std::runtime_error {
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

/// A computation left its validity envelope (solver divergence, Lipschitz
/// gate, non-finite values).  The CLI maps this to exit code 2.
struct numerical_error : std::runtime_error {
  explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

/// A --check style assertion on produced results failed.  Exit code 3.
struct check_failure : std::runtime_error {
  explicit check_failure(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mslab
