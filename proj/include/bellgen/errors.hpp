#pragma once

#include <stdexcept>
#include <string>

namespace bellgen {

// Invalid physical input (non-PSD matrix, negative power, bad efficiency, ...).
class validation_error : public std::invalid_argument {
 public:
  explicit validation_error(const std::string& msg) : std::invalid_argument(msg) {}
};

// Structurally valid input that carries no usable signal (zero-norm state,
// all-zero T parameters, ...).
class degenerate_input_error : public std::invalid_argument {
 public:
  explicit degenerate_input_error(const std::string& msg) : std::invalid_argument(msg) {}
};

// Requested value outside the reachable range of a device model.
class saturation_error : public std::range_error {
 public:
  explicit saturation_error(const std::string& msg) : std::range_error(msg) {}
};

// A numerical fit or reconstruction failed to converge.
class fit_error : public std::runtime_error {
 public:
  explicit fit_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed configuration file; `path` is a JSON-pointer-style location.
class config_error : public std::runtime_error {
 public:
  config_error(std::string path, const std::string& msg)
      : std::runtime_error(msg + " (at " + path + ")"), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace bellgen
