#pragma once

// XML Schema (subset) to class model, and back.
//
// Accepted subset: top-level xs:complexType declarations whose content is an
// xs:sequence of xs:element, single inheritance through
// xs:complexContent/xs:extension, scalar types xs:string, xs:boolean,
// xs:int/xs:integer/xs:long and xs:double, and references to other declared
// complex types. minOccurs="0" marks a field optional and
// maxOccurs="unbounded" makes it a list. Everything else is rejected.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "transodb/error.hpp"
#include "transodb/schema_model.hpp"

namespace transodb {

inline constexpr std::string_view kXsdNamespace = "http://www.w3.org/2001/XMLSchema";

enum class Severity { Error, Warning };

struct SchemaDiagnostic {
  Severity severity = Severity::Error;
  Location where;
  std::string message;
};

struct SchemaParseResult {
  std::optional<ClassModel> model;  // set iff there are no errors
  std::vector<SchemaDiagnostic> diagnostics;
  /// Largest number of simultaneously open element contexts during the pass.
  std::size_t max_open_elements = 0;

  bool ok() const { return model.has_value(); }
  std::size_t error_count() const;
};

SchemaParseResult parse_schema(std::string_view xsd_text, std::string model_name);
SchemaParseResult parse_schema(std::istream& xsd, std::string model_name);

/// Parses and compiles in one step; throws Error(Validation) carrying the
/// first error diagnostic on failure.
Schema load_schema(std::string_view xsd_text, std::string model_name);

/// Deterministic XSD rendering of `model`: classes sorted by name, fields in
/// declaration order, two-space indentation, trailing newline.
/// Throws Error(Validation) for an invalid model.
std::string emit_schema(const ClassModel& model);

std::string format_diagnostic(const SchemaDiagnostic& diagnostic);

}  // namespace transodb
