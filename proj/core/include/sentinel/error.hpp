#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sentinel {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Invalid parameters, schedules, window shapes or run configuration.
class ConfigError : public Error {
  public:
    using Error::Error;
};

/// Malformed input files. Carries the 1-based line number when known.
class ParseError : public Error {
  public:
    ParseError(const std::string& what, std::size_t line = 0)
        : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

  private:
    std::size_t line_;
};

/// A series or matrix is too small for the requested operation.
class SizeError : public Error {
  public:
    using Error::Error;
};

/// Function evaluated outside its domain (e.g. log of a non-positive eigenvalue).
class DomainError : public Error {
  public:
    using Error::Error;
};

/// Quadrature, eigen-solver or scoring failure.
class NumericError : public Error {
  public:
    using Error::Error;
};

/// A data row (channel) has no variance, so it cannot be standardized.
class ZeroVarianceError : public NumericError {
  public:
    ZeroVarianceError(const std::string& what, std::size_t channel)
        : NumericError(what), channel_(channel) {}
    std::size_t channel() const noexcept { return channel_; }

  private:
    std::size_t channel_;
};

/// ODE right-hand side produced a non-finite derivative.
class IntegrationError : public NumericError {
  public:
    IntegrationError(const std::string& what, std::size_t component)
        : NumericError(what), component_(component) {}
    std::size_t component() const noexcept { return component_; }

  private:
    std::size_t component_;
};

/// Simulated state left the admissible region.
class SimulationDiverged : public NumericError {
  public:
    SimulationDiverged(const std::string& what, double time_s)
        : NumericError(what), time_s_(time_s) {}
    double time() const noexcept { return time_s_; }

  private:
    double time_s_;
};

} // namespace sentinel
