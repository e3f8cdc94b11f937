#pragma once

#include <stdexcept>
#include <string>

namespace moralbench {

// Bad input data or arguments: malformed records, violated preconditions.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Missing or unreadable resource files (lexicons, models, indexes).
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace moralbench
