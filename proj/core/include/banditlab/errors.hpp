#pragma once

#include <stdexcept>
#include <string>

namespace banditlab {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Cholesky factorization hit a non-positive pivot (or the matrix is
/// not symmetric to working tolerance).
struct NotSPD : Error {
  using Error::Error;
};

struct ZeroVector : Error {
  using Error::Error;
};

struct ZeroTarget : Error {
  using Error::Error;
};

struct IndexOutOfRange : Error {
  using Error::Error;
};

struct WrongDimension : Error {
  using Error::Error;
};

/// ||theta_parallel|| exceeds the unit ball, so the perturbation program
/// has no feasible point at all.
struct InfeasibleNorm : Error {
  using Error::Error;
};

struct ExhaustedTries : Error {
  using Error::Error;
};

struct ParseError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

}  // namespace banditlab
