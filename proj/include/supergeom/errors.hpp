#pragma once

#include <stdexcept>
#include <string>

namespace supergeom {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// A block (or matrix) whose inverse was required is singular or too badly
// conditioned to invert reliably.
class SingularBlock : public Error {
 public:
  using Error::Error;
};

class NonSymmetric : public Error {
 public:
  using Error::Error;
};

class NotPositiveDefinite : public Error {
 public:
  using Error::Error;
};

// The linear connection does not parallelize the bilinear form in use.
class IncompatibleConnection : public Error {
 public:
  using Error::Error;
};

class IncompatibleFrame : public Error {
 public:
  using Error::Error;
};

class OutsideChartDomain : public Error {
 public:
  using Error::Error;
};

class ExtractionAmbiguous : public Error {
 public:
  using Error::Error;
};

class ScenarioError : public Error {
 public:
  using Error::Error;
};

}  // namespace supergeom
