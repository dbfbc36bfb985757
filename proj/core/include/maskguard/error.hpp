#pragma once

#include <stdexcept>
#include <string>

namespace maskguard {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularNetwork : public Error {
 public:
  using Error::Error;
};

class UnsupportedFault : public Error {
 public:
  using Error::Error;
};

class InvalidScenario : public Error {
 public:
  using Error::Error;
};

class InvalidAttackParams : public Error {
 public:
  using Error::Error;
};

class InvalidConfig : public Error {
 public:
  using Error::Error;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

class NonFiniteLoss : public Error {
 public:
  using Error::Error;
};

class DegenerateCurve : public Error {
 public:
  using Error::Error;
};

// Raised by the pipeline when too many consecutive frames hit the MI guards.
class DegenerateMeasurementBurst : public Error {
 public:
  using Error::Error;
};

class MissingArtifact : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace maskguard
