#include "transodb/error.hpp"

namespace transodb {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Validation: return "validation error";
    case ErrorKind::Structure: return "structural error";
    case ErrorKind::HeaderMismatch: return "schema hash mismatch";
    case ErrorKind::ModelMismatch: return "model mismatch";
    case ErrorKind::DanglingRef: return "dangling reference";
    case ErrorKind::DuplicateOid: return "duplicate OID";
    case ErrorKind::RefTypeMismatch: return "reference type mismatch";
    case ErrorKind::Io: return "I/O error";
    case ErrorKind::Usage: return "usage error";
  }
  return "error";
}

namespace {

std::string decorate(ErrorKind kind, const std::string& message, const Location& where) {
  std::string out = to_string(kind);
  if (where.line != 0) {
    out += " at line " + std::to_string(where.line) + ", column " + std::to_string(where.column);
  }
  out += ": ";
  out += message;
  return out;
}

}  // namespace

Error::Error(ErrorKind kind, const std::string& message, Location where)
    : std::runtime_error(decorate(kind, message, where)), kind_(kind), where_(where) {}

}  // namespace transodb
