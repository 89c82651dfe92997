#pragma once

// Canonical lightweight object-XML data document.
//
//   <?xml version="1.0" encoding="UTF-8"?>
//   <objects schema="NAME" schemaHash="HEX16">
//   <o c="CLASS" id="OID"><field>text</field><ref r="OID"/></o>
//   ...
//   </objects>
//
// One line per record, records sorted by OID byte-wise, fields in resolved
// layout order, absent optionals omitted, list fields as repeated elements.

#include <compare>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "transodb/schema_model.hpp"

namespace transodb {

class XmlScanner;
struct XmlEvent;

/// Object identifier: non-empty token over [A-Za-z0-9_.-], ordered byte-wise.
class Oid {
 public:
  Oid() = default;
  /// Throws Error(Validation) for a malformed token.
  explicit Oid(std::string token);

  static bool is_valid(std::string_view token);

  const std::string& str() const { return token_; }
  bool empty() const { return token_.empty(); }

  friend bool operator==(const Oid&, const Oid&) = default;
  friend std::strong_ordering operator<=>(const Oid& a, const Oid& b) { return a.token_ <=> b.token_; }

 private:
  std::string token_;
};

using Item = std::variant<std::string, bool, std::int64_t, double, Oid>;
using ValueList = std::vector<Item>;
using Value = std::variant<std::string, bool, std::int64_t, double, Oid, ValueList>;

/// Equality with Float64 compared bit-wise.
bool same_item(const Item& a, const Item& b);
bool same_value(const Value& a, const Value& b);

struct ObjectRecord {
  std::string class_name;
  Oid oid;
  std::map<std::string, Value, std::less<>> values;  // absent optionals omitted

  friend bool operator==(const ObjectRecord& a, const ObjectRecord& b);
};

/// Calls `fn(field_name, oid)` for every reference held by `record`.
void for_each_ref(const ObjectRecord& record, const std::function<void(const std::string&, const Oid&)>& fn);

struct DocumentHeader {
  std::string schema_name;
  std::string schema_hash;
};

/// FNV-1a-64 of dump_model(model) as 16 lowercase hex digits.
std::string schema_hash(const ClassModel& model);

/// Checks one record against the class model: known class and fields, value
/// kinds, required fields, finite floats. Throws Error(Validation).
void validate_record(const Schema& schema, const ObjectRecord& record);

/// Appends the single-line `<o ...>...</o>` rendering (no newline).
/// The record must already be valid.
void render_record(std::string& out, const Schema& schema, const ObjectRecord& record);

/// Shortest decimal string that parses back to the same binary64 value.
std::string format_float(double value);

/// Streaming canonical writer; records must arrive in strictly ascending OID
/// order (the order scan() produces).
class CanonicalWriter {
 public:
  CanonicalWriter(std::ostream& out, const Schema& schema);

  void write(const ObjectRecord& record);
  void finish();
  std::size_t records_written() const { return count_; }

 private:
  std::ostream& out_;
  Schema schema_;
  std::string line_;
  Oid last_;
  std::size_t count_ = 0;
  bool finished_ = false;
};

/// Validates, sorts by OID and renders `records`. Throws Error(Validation) or
/// Error(DuplicateOid).
std::string write_canonical(std::span<const ObjectRecord> records, const Schema& schema);
void write_canonical(std::ostream& out, std::span<const ObjectRecord> records, const Schema& schema);

using RecordSink = std::function<void(ObjectRecord&&)>;

/// Streaming decode. Checks the header hash before any record is delivered and
/// hands each record to `sink` as soon as its closing tag is read.
DocumentHeader read_canonical(std::string_view document, const Schema& schema, const RecordSink& sink);
DocumentHeader read_canonical(std::istream& document, const Schema& schema, const RecordSink& sink);

/// Decodes a standalone `<o ...>...</o>` line.
ObjectRecord parse_record(std::string_view line, const Schema& schema);

/// Verbose multi-file baseline: the storage-detail-heavy layout used only as
/// a size reference.
struct VerboseDocuments {
  std::string schema_dtd;
  std::string schema_xml;
  std::string data_dtd;
  std::string data_xml;

  std::size_t total_bytes() const {
    return schema_dtd.size() + schema_xml.size() + data_dtd.size() + data_xml.size();
  }
  /// (file name, content) pairs in a fixed order.
  std::vector<std::pair<std::string, const std::string*>> files() const;
};

VerboseDocuments write_verbose(std::span<const ObjectRecord> records, const Schema& schema);

}  // namespace transodb
