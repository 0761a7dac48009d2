#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace homotop {

inline constexpr const char* kVersion = "0.1.0";

// Failure categories. The CLI maps these onto exit codes 1/2/3.
struct validation_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct compute_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Non-fatal diagnostics. Callers that care pass a sink; nullptr discards.
using Warnings = std::vector<std::string>;

inline void warn(Warnings* sink, std::string msg) {
  if (sink) sink->push_back(std::move(msg));
}

}  // namespace homotop
