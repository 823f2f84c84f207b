#pragma once

#include <stdexcept>
#include <string>

namespace apmm {

enum class ErrorKind {
  NonAlignedMesh,
  NonPositiveStep,
  StripModeRequiresLEqualOne,
  InvalidParameter,
  OutOfDomain,
  MissingNeighbor,
  GridTooCoarse,
  SingularStructure,
  NonFiniteSource,
  EtaZeroUndefined,
  SingularPivot,
  DimensionMismatch,
  NonFiniteInitial,
  LogDomain,
  ParseError,
  UnknownKey,
  IoError,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonAlignedMesh: return "NonAlignedMesh";
    case ErrorKind::NonPositiveStep: return "NonPositiveStep";
    case ErrorKind::StripModeRequiresLEqualOne: return "StripModeRequiresLEqualOne";
    case ErrorKind::InvalidParameter: return "InvalidParameter";
    case ErrorKind::OutOfDomain: return "OutOfDomain";
    case ErrorKind::MissingNeighbor: return "MissingNeighbor";
    case ErrorKind::GridTooCoarse: return "GridTooCoarse";
    case ErrorKind::SingularStructure: return "SingularStructure";
    case ErrorKind::NonFiniteSource: return "NonFiniteSource";
    case ErrorKind::EtaZeroUndefined: return "EtaZeroUndefined";
    case ErrorKind::SingularPivot: return "SingularPivot";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NonFiniteInitial: return "NonFiniteInitial";
    case ErrorKind::LogDomain: return "LogDomain";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::UnknownKey: return "UnknownKey";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

/// Numerical failures map to CLI exit code 2, everything else to 1.
inline bool is_numerical(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::SingularStructure:
    case ErrorKind::NonFiniteSource:
    case ErrorKind::EtaZeroUndefined:
    case ErrorKind::SingularPivot:
    case ErrorKind::NonFiniteInitial:
    case ErrorKind::LogDomain:
      return true;
    default:
      return false;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace apmm
