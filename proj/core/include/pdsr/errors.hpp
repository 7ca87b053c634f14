#pragma once

#include <stdexcept>
#include <string>

namespace pdsr {

// A byte stream that cannot be parsed back into a signature message.
class DecodeError : public std::runtime_error {
 public:
  explicit DecodeError(const std::string& what) : std::runtime_error(what) {}
};

// Selection was asked to run on an empty candidate pool.
class EmptyCandidatesError : public std::runtime_error {
 public:
  explicit EmptyCandidatesError(const std::string& what) : std::runtime_error(what) {}
};

// An exhaustive-search request whose combination count exceeds the safety cap.
class TooLargeError : public std::runtime_error {
 public:
  explicit TooLargeError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed or incomplete run configuration (bad key, missing file, ...).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Unreadable or malformed dataset files.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pdsr
