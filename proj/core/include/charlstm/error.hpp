#pragma once

#include <stdexcept>
#include <string>

namespace charlstm {

// Caller broke a documented precondition.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A run/plan setting is unusable (corpus too small, bad split, ...).
// Raised at setup time, before any training work starts.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ContractViolation(msg);
}

inline void require_config(bool cond, const std::string& msg) {
  if (!cond) throw ConfigError(msg);
}

}  // namespace charlstm
