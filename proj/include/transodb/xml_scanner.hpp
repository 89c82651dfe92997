#pragma once

// Event-driven (SAX-style) XML pull scanner. Reads either an in-memory buffer
// or an input stream in fixed-size chunks; never builds a document tree.
//
// Supported: elements, attributes, character/entity references, CDATA,
// comments and processing instructions (skipped). DOCTYPE is rejected.
// Namespace prefixes are reported verbatim; resolution is up to the caller.

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "transodb/error.hpp"

namespace transodb {

enum class XmlEventType { StartElement, EndElement, Text };

struct XmlAttribute {
  std::string name;
  std::string value;  // entity references decoded
  Location where;
};

struct XmlEvent {
  XmlEventType type = XmlEventType::Text;
  std::string name;  // element name for Start/End
  std::vector<XmlAttribute> attributes;
  std::string text;  // decoded character data for Text
  bool self_closing = false;
  Location where;

  const XmlAttribute* attribute(std::string_view attr_name) const;
};

class XmlScanner {
 public:
  explicit XmlScanner(std::string_view document);
  explicit XmlScanner(std::istream& input, std::size_t chunk_size = 1 << 16);

  XmlScanner(const XmlScanner&) = delete;
  XmlScanner& operator=(const XmlScanner&) = delete;

  /// Fetches the next event. Returns false once the root element has closed
  /// and only trailing whitespace, comments or PIs remain.
  /// Throws Error(Structure) on malformed markup.
  bool next(XmlEvent& event);

  /// Number of currently open elements.
  std::size_t depth() const { return open_.size(); }
  /// Largest depth() observed so far.
  std::size_t max_depth() const { return max_depth_; }
  /// Lines consumed so far (1-based line of the current position).
  std::size_t current_line();

  [[noreturn]] void fail(const std::string& message, Location where) const;

 private:
  bool fill();
  bool ensure(std::size_t n);
  char at(std::size_t i) const { return data()[i]; }
  std::string_view data() const { return stream_ ? std::string_view(buffer_) : view_; }
  std::size_t find(std::size_t from, std::string_view pattern);
  Location location_at(std::size_t offset);
  void compact();

  std::string read_name();
  void skip_whitespace();
  std::string decode_until(char terminator, bool attribute);
  void append_reference(std::string& out, Location where);
  void parse_start_tag(XmlEvent& event);
  void parse_end_tag(XmlEvent& event);

  std::string_view view_;
  std::istream* stream_ = nullptr;
  std::string buffer_;
  std::size_t chunk_size_ = 0;
  bool stream_eof_ = false;

  std::size_t pos_ = 0;
  std::size_t mark_ = 0;  // offset up to which line/column are counted
  std::size_t line_ = 1;
  std::size_t column_ = 1;

  std::vector<std::string> open_;
  std::size_t max_depth_ = 0;
  bool seen_root_ = false;
  bool root_closed_ = false;
  bool pending_end_ = false;
};

/// Escapes `&`, `<`, `>` and line breaks for element content.
void append_escaped_text(std::string& out, std::string_view text);
/// As append_escaped_text, additionally escaping `"`.
void append_escaped_attribute(std::string& out, std::string_view text);

}  // namespace transodb
