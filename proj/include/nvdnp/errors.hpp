#pragma once
#include <stdexcept>
#include <string>

namespace nvdnp {

// Inputs violate a documented precondition.
struct InvalidArgument : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A solver could not deliver its advertised accuracy.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The relaxation structure admits more than one stationary state; the caller
// has to add a dissipator (or pick an initial state and evolve) to break the tie.
struct DegenerateSteadyState : NumericError {
  int null_dimension;
  explicit DegenerateSteadyState(int dim)
      : NumericError("steady state is not unique: stationary subspace has dimension " +
                     std::to_string(dim)),
        null_dimension(dim) {}
};

// A requested operation does not apply to the given model (for example a
// time-dependent generator handed to a static solver).
struct UnsupportedConfiguration : InvalidArgument {
  using InvalidArgument::InvalidArgument;
};

// Problem in a config file. line == 0 means "not tied to a specific line".
struct ConfigError : std::runtime_error {
  int line;
  explicit ConfigError(const std::string& msg, int line_no = 0)
      : std::runtime_error(line_no > 0 ? "line " + std::to_string(line_no) + ": " + msg
                                       : msg),
        line(line_no) {}
};

// Filesystem trouble: unreadable input, unwritable output directory.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace nvdnp
