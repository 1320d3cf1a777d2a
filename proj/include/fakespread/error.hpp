#pragma once

#include <stdexcept>
#include <string>

namespace fakespread {

// Exception hierarchy. Each class maps onto one C API status / CLI exit code.

/// Bad arguments, bad configuration, misuse of an API.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input data that cannot be used: missing files, unparsable headers, duplicate keys.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An internal consistency check failed.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace fakespread
