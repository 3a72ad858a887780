#pragma once

#include <stdexcept>
#include <string>

namespace arbiter {

// Base for every error the library raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A record or config is missing a field or carries the wrong type.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// Arbitration needs at least two basins.
class NoChallengerError : public Error {
 public:
  NoChallengerError() : Error("no challenger") {}
};

// The endpoint rejected our credentials; collection must stop.
class AuthError : public Error {
 public:
  using Error::Error;
};

}  // namespace arbiter
