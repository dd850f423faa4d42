#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace coxbo {

/// Failure categories. The CLI prints `category_name()` and exits nonzero.
enum class ErrorCategory {
  kInput,
  kParse,
  kDomain,
  kIndex,
  kDegenerateKernel,
  kOptimization,
  kConditioning,
  kNumeric,
  kBoundViolation,
  kIo,
};

constexpr std::string_view category_name(ErrorCategory c) noexcept {
  switch (c) {
    case ErrorCategory::kInput: return "input_error";
    case ErrorCategory::kParse: return "parse_error";
    case ErrorCategory::kDomain: return "domain_error";
    case ErrorCategory::kIndex: return "index_error";
    case ErrorCategory::kDegenerateKernel: return "degenerate_kernel_error";
    case ErrorCategory::kOptimization: return "optimization_error";
    case ErrorCategory::kConditioning: return "conditioning_error";
    case ErrorCategory::kNumeric: return "numeric_error";
    case ErrorCategory::kBoundViolation: return "bound_violation_error";
    case ErrorCategory::kIo: return "io_error";
  }
  return "unknown_error";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

[[noreturn]] inline void fail(ErrorCategory category, const std::string& what) {
  throw Error(category, what);
}

inline void require(bool condition, ErrorCategory category, const std::string& what) {
  if (!condition) fail(category, what);
}

}  // namespace coxbo
