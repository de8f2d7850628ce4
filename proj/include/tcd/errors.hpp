// Error hierarchy shared by the library and the CLI. The CLI maps each
// category to a distinct exit code (usage 1, I/O 2, numeric 3).
#pragma once

#include <stdexcept>
#include <string>

namespace tcd {

struct UsageError : std::runtime_error {
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace tcd
