#include "plrsq/error.hpp"

namespace plrsq {

const char* to_string(ErrorCategory category) noexcept {
  switch (category) {
    case ErrorCategory::validation: return "validation";
    case ErrorCategory::numerical: return "numerical";
    case ErrorCategory::domain: return "domain";
    case ErrorCategory::config: return "config";
    case ErrorCategory::parse: return "parse";
    case ErrorCategory::io: return "io";
  }
  return "unknown";
}

int exit_code(ErrorCategory category) noexcept {
  switch (category) {
    case ErrorCategory::config: return 2;
    case ErrorCategory::parse: return 3;
    case ErrorCategory::numerical: return 4;
    case ErrorCategory::domain: return 5;
    case ErrorCategory::validation: return 6;
    case ErrorCategory::io: return 7;
  }
  return 1;
}

}  // namespace plrsq
