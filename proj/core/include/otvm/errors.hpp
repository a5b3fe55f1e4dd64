#pragma once

#include <stdexcept>
#include <string>

namespace otvm {

// bad invocations, unreadable inputs, mismatched artifacts -> exit code 2;
// anything else that throws -> exit code 1
struct UsageError : std::runtime_error {
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace otvm
