#include "hmtraj/error.hpp"

namespace hmtraj {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid argument";
    case ErrorKind::Coverage: return "coverage";
    case ErrorKind::Degenerate: return "degenerate";
    case ErrorKind::EmptyInput: return "empty input";
    case ErrorKind::ZeroMass: return "zero mass";
    case ErrorKind::InsufficientBins: return "insufficient bins";
    case ErrorKind::IdMismatch: return "id mismatch";
    case ErrorKind::NonUniformSampling: return "non-uniform sampling";
    case ErrorKind::Io: return "io";
    case ErrorKind::Parse: return "parse";
  }
  return "unknown";
}

}  // namespace hmtraj
