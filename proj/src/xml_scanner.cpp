#include "transodb/xml_scanner.hpp"

#include <algorithm>
#include <charconv>
#include <istream>

namespace transodb {

const XmlAttribute* XmlEvent::attribute(std::string_view attr_name) const {
  for (const XmlAttribute& attr : attributes) {
    if (attr.name == attr_name) return &attr;
  }
  return nullptr;
}

namespace {

bool is_space(char ch) { return ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r'; }

bool is_name_start(char ch) {
  auto u = static_cast<unsigned char>(ch);
  return (ch >= 'A' && ch <= 'Z') || (ch >= 'a' && ch <= 'z') || ch == '_' || ch == ':' || u >= 0x80;
}

bool is_name_char(char ch) {
  return is_name_start(ch) || (ch >= '0' && ch <= '9') || ch == '-' || ch == '.';
}

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

bool is_blank(std::string_view text) { return std::all_of(text.begin(), text.end(), is_space); }

}  // namespace

XmlScanner::XmlScanner(std::string_view document) : view_(document) {}

XmlScanner::XmlScanner(std::istream& input, std::size_t chunk_size)
    : stream_(&input), chunk_size_(std::max<std::size_t>(chunk_size, 16)) {}

void XmlScanner::fail(const std::string& message, Location where) const {
  throw Error(ErrorKind::Structure, message, where);
}

bool XmlScanner::fill() {
  if (!stream_ || stream_eof_) return false;
  std::size_t old = buffer_.size();
  buffer_.resize(old + chunk_size_);
  stream_->read(buffer_.data() + old, static_cast<std::streamsize>(chunk_size_));
  auto got = static_cast<std::size_t>(stream_->gcount());
  buffer_.resize(old + got);
  if (got < chunk_size_) {
    if (stream_->bad()) throw Error(ErrorKind::Io, "read failure while scanning XML");
    stream_eof_ = true;
  }
  return got > 0;
}

bool XmlScanner::ensure(std::size_t n) {
  while (data().size() - pos_ < n) {
    if (!fill()) return false;
  }
  return true;
}

std::size_t XmlScanner::find(std::size_t from, std::string_view pattern) {
  while (true) {
    std::size_t hit = data().find(pattern, from);
    if (hit != std::string_view::npos) return hit;
    std::size_t size = data().size();
    if (!fill()) return std::string_view::npos;
    from = size >= pattern.size() ? size - pattern.size() + 1 : 0;
  }
}

Location XmlScanner::location_at(std::size_t offset) {
  if (offset < mark_) return {line_, column_};  // already passed; best effort
  std::string_view d = data();
  for (std::size_t i = mark_; i < offset && i < d.size(); ++i) {
    if (d[i] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
  }
  mark_ = offset;
  return {line_, column_};
}

std::size_t XmlScanner::current_line() { return location_at(pos_).line; }

void XmlScanner::compact() {
  if (!stream_ || pos_ < chunk_size_) return;
  location_at(pos_);
  buffer_.erase(0, pos_);
  mark_ -= pos_;
  pos_ = 0;
}

void XmlScanner::skip_whitespace() {
  while (ensure(1) && is_space(at(pos_))) ++pos_;
}

std::string XmlScanner::read_name() {
  if (!ensure(1) || !is_name_start(at(pos_))) fail("expected a name", location_at(pos_));
  std::size_t start = pos_;
  while (ensure(1) && is_name_char(at(pos_))) ++pos_;
  return std::string(data().substr(start, pos_ - start));
}

void XmlScanner::append_reference(std::string& out, Location where) {
  std::size_t semi = find(pos_, ";");
  if (semi == std::string_view::npos || semi - pos_ > 12) fail("unterminated entity reference", where);
  std::string_view ref = data().substr(pos_ + 1, semi - pos_ - 1);
  pos_ = semi + 1;
  if (ref == "amp") {
    out += '&';
  } else if (ref == "lt") {
    out += '<';
  } else if (ref == "gt") {
    out += '>';
  } else if (ref == "quot") {
    out += '"';
  } else if (ref == "apos") {
    out += '\'';
  } else if (ref.size() > 1 && ref[0] == '#') {
    int base = 10;
    std::string_view digits = ref.substr(1);
    if (!digits.empty() && digits[0] == 'x') {
      base = 16;
      digits.remove_prefix(1);
    }
    std::uint32_t cp = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), cp, base);
    if (digits.empty() || ec != std::errc() || ptr != digits.data() + digits.size() || cp == 0 ||
        cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      fail("invalid character reference &" + std::string(ref) + ";", where);
    }
    append_utf8(out, cp);
  } else {
    fail("unknown entity &" + std::string(ref) + ";", where);
  }
}

std::string XmlScanner::decode_until(char terminator, bool attribute) {
  std::string out;
  while (true) {
    if (!ensure(1)) return out;
    char ch = at(pos_);
    if (ch == terminator) return out;
    if (ch == '&') {
      append_reference(out, location_at(pos_));
    } else if (attribute && ch == '<') {
      fail("'<' in attribute value", location_at(pos_));
    } else {
      out += ch;
      ++pos_;
    }
  }
}

void XmlScanner::parse_start_tag(XmlEvent& event) {
  event.type = XmlEventType::StartElement;
  event.where = location_at(pos_);
  ++pos_;  // '<'
  event.name = read_name();
  event.attributes.clear();
  event.self_closing = false;
  while (true) {
    skip_whitespace();
    if (!ensure(1)) fail("unexpected end of document inside <" + event.name + ">", event.where);
    char ch = at(pos_);
    if (ch == '>') {
      ++pos_;
      break;
    }
    if (ch == '/') {
      if (!ensure(2) || at(pos_ + 1) != '>') fail("expected '/>'", location_at(pos_));
      pos_ += 2;
      event.self_closing = true;
      break;
    }
    XmlAttribute attr;
    attr.where = location_at(pos_);
    attr.name = read_name();
    skip_whitespace();
    if (!ensure(1) || at(pos_) != '=') fail("expected '=' after attribute " + attr.name, location_at(pos_));
    ++pos_;
    skip_whitespace();
    if (!ensure(1) || (at(pos_) != '"' && at(pos_) != '\'')) {
      fail("expected quoted value for attribute " + attr.name, location_at(pos_));
    }
    char quote = at(pos_++);
    attr.value = decode_until(quote, true);
    if (!ensure(1)) fail("unterminated attribute value", attr.where);
    ++pos_;
    if (event.attribute(attr.name)) fail("duplicate attribute " + attr.name, attr.where);
    event.attributes.push_back(std::move(attr));
  }
  if (root_closed_) fail("content after the root element", event.where);
  seen_root_ = true;
  open_.push_back(event.name);
  max_depth_ = std::max(max_depth_, open_.size());
  pending_end_ = event.self_closing;
}

void XmlScanner::parse_end_tag(XmlEvent& event) {
  event.type = XmlEventType::EndElement;
  event.where = location_at(pos_);
  event.attributes.clear();
  event.self_closing = false;
  pos_ += 2;  // '</'
  event.name = read_name();
  skip_whitespace();
  if (!ensure(1) || at(pos_) != '>') fail("expected '>' closing </" + event.name, location_at(pos_));
  ++pos_;
  if (open_.empty()) fail("unexpected </" + event.name + ">", event.where);
  if (open_.back() != event.name) {
    fail("mismatched </" + event.name + ">, expected </" + open_.back() + ">", event.where);
  }
  open_.pop_back();
  if (open_.empty()) root_closed_ = true;
}

bool XmlScanner::next(XmlEvent& event) {
  if (pending_end_) {
    pending_end_ = false;
    event.type = XmlEventType::EndElement;
    event.name = std::move(open_.back());
    event.attributes.clear();
    event.self_closing = true;
    open_.pop_back();
    if (open_.empty()) root_closed_ = true;
    return true;
  }
  compact();

  std::string text;
  Location text_start;
  bool has_text = false;
  auto flush_text = [&]() {
    if (!has_text) return false;
    if (open_.empty()) {
      if (!is_blank(text)) fail("character data outside the root element", text_start);
      return false;
    }
    event.type = XmlEventType::Text;
    event.name.clear();
    event.attributes.clear();
    event.self_closing = false;
    event.text = std::move(text);
    event.where = text_start;
    return true;
  };
  auto note_text = [&]() {
    if (!has_text) {
      has_text = true;
      text_start = location_at(pos_);
    }
  };

  while (true) {
    if (!ensure(1)) {
      if (flush_text()) return true;
      if (!open_.empty()) fail("unexpected end of document; <" + open_.back() + "> is not closed", location_at(pos_));
      if (!seen_root_) fail("document has no root element", location_at(pos_));
      return false;
    }
    if (at(pos_) != '<') {
      note_text();
      text += decode_until('<', false);
      continue;
    }
    ensure(9);
    std::string_view ahead = data().substr(pos_, 9);
    if (ahead.starts_with("<?")) {
      std::size_t end = find(pos_ + 2, "?>");
      if (end == std::string_view::npos) fail("unterminated processing instruction", location_at(pos_));
      pos_ = end + 2;
    } else if (ahead.starts_with("<!--")) {
      std::size_t end = find(pos_ + 4, "-->");
      if (end == std::string_view::npos) fail("unterminated comment", location_at(pos_));
      pos_ = end + 3;
    } else if (ahead.starts_with("<![CDATA[")) {
      note_text();
      if (open_.empty()) fail("CDATA outside the root element", location_at(pos_));
      std::size_t end = find(pos_ + 9, "]]>");
      if (end == std::string_view::npos) fail("unterminated CDATA section", location_at(pos_));
      text.append(data().substr(pos_ + 9, end - pos_ - 9));
      pos_ = end + 3;
    } else if (ahead.starts_with("<!")) {
      fail("DOCTYPE and markup declarations are not supported", location_at(pos_));
    } else if (ahead.starts_with("</")) {
      if (flush_text()) return true;
      parse_end_tag(event);
      return true;
    } else {
      if (flush_text()) return true;
      parse_start_tag(event);
      return true;
    }
  }
}

namespace {

void append_escaped(std::string& out, std::string_view text, bool attribute) {
  std::size_t run = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char* rep = nullptr;
    switch (text[i]) {
      case '&': rep = "&amp;"; break;
      case '<': rep = "&lt;"; break;
      case '>': rep = "&gt;"; break;
      case '\n': rep = "&#10;"; break;
      case '\r': rep = "&#13;"; break;
      case '"':
        if (attribute) rep = "&quot;";
        break;
      default: break;
    }
    if (rep) {
      out.append(text.substr(run, i - run));
      out.append(rep);
      run = i + 1;
    }
  }
  out.append(text.substr(run));
}

}  // namespace

void append_escaped_text(std::string& out, std::string_view text) { append_escaped(out, text, false); }
void append_escaped_attribute(std::string& out, std::string_view text) { append_escaped(out, text, true); }

}  // namespace transodb
