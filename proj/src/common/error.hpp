#pragma once

#include <stdexcept>
#include <string>

#include "common/config.hpp"

BNAS_NS_BEGIN

enum class ErrorKind {
  InvalidArgument = 1,
  Contract = 2,
  Geometry = 3,
  Parse = 4,
  Io = 5,
  Numeric = 6,
  Usage = 7,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct InvalidArgument : Error {
  explicit InvalidArgument(const std::string& w) : Error(ErrorKind::InvalidArgument, w) {}
};
struct ContractViolation : Error {
  explicit ContractViolation(const std::string& w) : Error(ErrorKind::Contract, w) {}
};
struct GeometryError : Error {
  explicit GeometryError(const std::string& w) : Error(ErrorKind::Geometry, w) {}
};
struct ParseError : Error {
  explicit ParseError(const std::string& w) : Error(ErrorKind::Parse, w) {}
};
struct IoError : Error {
  explicit IoError(const std::string& w) : Error(ErrorKind::Io, w) {}
};
struct NumericError : Error {
  explicit NumericError(const std::string& w) : Error(ErrorKind::Numeric, w) {}
};
struct UsageError : Error {
  explicit UsageError(const std::string& w) : Error(ErrorKind::Usage, w) {}
};

#define BNAS_EXPECT(cond, ExcType, msg)      \
  do {                                       \
    if (!(cond)) throw ExcType(msg);         \
  } while (0)

BNAS_NS_END
