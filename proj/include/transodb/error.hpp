#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace transodb {

enum class ErrorKind {
  Validation,      // record or model does not satisfy the class model
  Structure,       // malformed XML or document outside the accepted grammar
  HeaderMismatch,  // data document or store bound to a different schema
  ModelMismatch,   // two operands bound to different class models
  DanglingRef,
  DuplicateOid,
  RefTypeMismatch,
  Io,
  Usage,
};

const char* to_string(ErrorKind kind);

/// Source position, 1-based. Line 0 means "no location".
struct Location {
  std::size_t line = 0;
  std::size_t column = 0;
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, Location where = {});

  ErrorKind kind() const noexcept { return kind_; }
  const Location& where() const noexcept { return where_; }

 private:
  ErrorKind kind_;
  Location where_;
};

}  // namespace transodb
