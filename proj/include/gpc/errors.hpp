#ifndef GPC_ERRORS_HPP
#define GPC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace gpc {

// Bad experiment/problem setup: wrong dimensions, invalid parameters.
struct ConfigError : std::invalid_argument {
  explicit ConfigError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Non-finite or out-of-domain arguments at evaluation time.
struct DomainError : std::domain_error {
  explicit DomainError(const std::string& msg) : std::domain_error(msg) {}
};

// Gram matrix could not be factorized even after jitter escalation.
struct SingularDesignError : std::runtime_error {
  explicit SingularDesignError(const std::string& msg) : std::runtime_error(msg) {}
};

// Posterior covariance indefinite beyond jitter repair.
struct DegeneratePosteriorError : std::runtime_error {
  explicit DegeneratePosteriorError(const std::string& msg) : std::runtime_error(msg) {}
};

// Fixed-point iterate blew up (NaN or norm overflow).
struct DivergenceError : std::runtime_error {
  explicit DivergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

struct InsufficientDataError : std::runtime_error {
  explicit InsufficientDataError(const std::string& msg) : std::runtime_error(msg) {}
};

// A configured quality threshold was not met (used for CI gating).
struct AcceptanceError : std::runtime_error {
  explicit AcceptanceError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace gpc

#endif
