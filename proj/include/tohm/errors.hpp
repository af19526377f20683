#ifndef TOHM_ERRORS_HPP
#define TOHM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace tohm {

// Base class for everything thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad user input: malformed files, inconsistent configuration, violated
// preconditions.  The CLI maps these to exit code 2.
struct ValidationError : Error {
  using Error::Error;
};

// Syntax error in an input file; carries path and 1-based line number.
struct ParseError : ValidationError {
  ParseError(const std::string& path, long line, const std::string& what)
      : ValidationError(path + ":" + std::to_string(line) + ": " + what) {}
};

// Numerical failure inside an otherwise valid computation (factorization
// breakdown, non-convergence, ill-conditioning).  The CLI maps these to
// exit code 1.
struct NumericError : Error {
  using Error::Error;
};

}  // namespace tohm

#endif
