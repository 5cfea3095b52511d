#pragma once

#include <stdexcept>
#include <string>

namespace panelfe {

/* All library failures derive from Error so callers can catch one base. */
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
  virtual const char* name() const { return "Error"; }
};

/* Malformed input file: bad header, non-numeric field, duplicate cell. */
class ParseError : public Error {
public:
  using Error::Error;
  const char* name() const override { return "ParseError"; }
};

/* Panel is not a complete N x T grid. */
class BalanceError : public Error {
public:
  using Error::Error;
  const char* name() const override { return "BalanceError"; }
};

/* Argument outside its admissible range, or required field missing. */
class DomainError : public Error {
public:
  using Error::Error;
  const char* name() const override { return "DomainError"; }
};

/* Regressor cross-product matrix is rank deficient. */
class SingularDesignError : public Error {
public:
  using Error::Error;
  const char* name() const override { return "SingularDesignError"; }
};

/* A half-sample re-estimation failed inside the jackknife. */
class JackknifeError : public Error {
public:
  using Error::Error;
  const char* name() const override { return "JackknifeError"; }
};

/* Too many bootstrap resamples failed to estimate. */
class BootstrapError : public Error {
public:
  using Error::Error;
  const char* name() const override { return "BootstrapError"; }
};

/* File system failure (open/read/write). */
class IoError : public Error {
public:
  using Error::Error;
  const char* name() const override { return "IoError"; }
};

}  // namespace panelfe
