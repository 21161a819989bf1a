#pragma once

#include <stdexcept>
#include <string>

namespace dichotome {

/// Base of every error raised by the library. The CLI maps these to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input outside the mathematical domain (sample not in [0,1], negative gamma, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// gamma == 1: the dichotomy function is identically zero and cannot be normalized.
class DegenerateGamma : public Error {
 public:
  explicit DegenerateGamma(const std::string& where)
      : Error(where + ": gamma = 1 is degenerate (|x^g - x| is identically zero)") {}
};

class SingularPoint : public Error {
 public:
  using Error::Error;
};

class NoConvergence : public Error {
 public:
  using Error::Error;
};

class BranchMismatch : public Error {
 public:
  using Error::Error;
};

class RecordMismatch : public Error {
 public:
  using Error::Error;
};

class AlreadyGray : public Error {
 public:
  AlreadyGray() : Error("image already has a single channel") {}
};

class ImageTooSmall : public Error {
 public:
  using Error::Error;
};

class GeometryMismatch : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration or command-line parameters (exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace dichotome
