#include "transodb/objectxml.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <ostream>
#include <sstream>

#include "transodb/error.hpp"
#include "transodb/hash.hpp"
#include "transodb/instrumentation.hpp"
#include "transodb/xml_scanner.hpp"

namespace transodb {

Oid::Oid(std::string token) : token_(std::move(token)) {
  if (!is_valid(token_)) throw Error(ErrorKind::Validation, "malformed OID '" + token_ + "'");
}

bool Oid::is_valid(std::string_view token) {
  if (token.empty()) return false;
  return std::all_of(token.begin(), token.end(), [](char ch) {
    return (ch >= 'A' && ch <= 'Z') || (ch >= 'a' && ch <= 'z') || (ch >= '0' && ch <= '9') || ch == '_' ||
           ch == '.' || ch == '-';
  });
}

bool same_item(const Item& a, const Item& b) {
  if (a.index() != b.index()) return false;
  if (const double* x = std::get_if<double>(&a)) {
    return std::bit_cast<std::uint64_t>(*x) == std::bit_cast<std::uint64_t>(std::get<double>(b));
  }
  return a == b;
}

bool same_value(const Value& a, const Value& b) {
  if (a.index() != b.index()) return false;
  if (const auto* la = std::get_if<ValueList>(&a)) {
    const auto& lb = std::get<ValueList>(b);
    return std::equal(la->begin(), la->end(), lb.begin(), lb.end(), same_item);
  }
  if (const double* x = std::get_if<double>(&a)) {
    return std::bit_cast<std::uint64_t>(*x) == std::bit_cast<std::uint64_t>(std::get<double>(b));
  }
  return a == b;
}

namespace {

bool is_empty_list(const Value& v) {
  const auto* list = std::get_if<ValueList>(&v);
  return list && list->empty();
}

}  // namespace

bool operator==(const ObjectRecord& a, const ObjectRecord& b) {
  if (a.class_name != b.class_name || a.oid != b.oid) return false;
  // An empty list and an absent list are the same value.
  for (const auto& [name, value] : a.values) {
    auto it = b.values.find(name);
    if (it == b.values.end() ? !is_empty_list(value) : !same_value(value, it->second)) return false;
  }
  for (const auto& [name, value] : b.values) {
    if (!a.values.contains(name) && !is_empty_list(value)) return false;
  }
  return true;
}

void for_each_ref(const ObjectRecord& record, const std::function<void(const std::string&, const Oid&)>& fn) {
  for (const auto& [name, value] : record.values) {
    if (const Oid* oid = std::get_if<Oid>(&value)) {
      fn(name, *oid);
    } else if (const auto* list = std::get_if<ValueList>(&value)) {
      for (const Item& item : *list) {
        if (const Oid* ref = std::get_if<Oid>(&item)) fn(name, *ref);
      }
    }
  }
}

std::string schema_hash(const ClassModel& model) { return hex16(fnv1a64(dump_model(model))); }

namespace {

// Variant index an item must hold for the declared element kind.
std::size_t expected_index(const ElementKind& kind) {
  if (std::holds_alternative<ClassRef>(kind)) return 4;
  return static_cast<std::size_t>(std::get<ScalarKind>(kind));
}

void check_item(const Item& item, const ElementKind& kind, const ObjectRecord& record, const std::string& field) {
  if (item.index() != expected_index(kind)) {
    throw Error(ErrorKind::Validation, "kind mismatch in " + record.oid.str() + "." + field + ": expected " +
                                           render_element_kind(kind));
  }
  if (const double* f = std::get_if<double>(&item); f && !std::isfinite(*f)) {
    throw Error(ErrorKind::Validation, "non-finite Float64 in " + record.oid.str() + "." + field);
  }
  if (const Oid* oid = std::get_if<Oid>(&item); oid && oid->empty()) {
    throw Error(ErrorKind::Validation, "empty reference in " + record.oid.str() + "." + field);
  }
}

}  // namespace

void validate_record(const Schema& schema, const ObjectRecord& record) {
  if (record.oid.empty()) throw Error(ErrorKind::Validation, "record without an OID");
  const ClassLayout* layout = schema.find(record.class_name);
  if (!layout) {
    throw Error(ErrorKind::Validation, "unknown class '" + record.class_name + "' in record " + record.oid.str());
  }
  for (const auto& [name, value] : record.values) {
    auto index = layout->index_of(name);
    if (!index) {
      throw Error(ErrorKind::Validation, "unknown field '" + name + "' for class " + record.class_name +
                                             " in record " + record.oid.str());
    }
    const FieldDef& field = layout->fields[*index];
    if (field.kind.list) {
      const auto* list = std::get_if<ValueList>(&value);
      if (!list) throw Error(ErrorKind::Validation, "kind mismatch in " + record.oid.str() + "." + name + ": expected a list");
      for (const Item& item : *list) check_item(item, field.kind.element, record, name);
    } else {
      if (std::holds_alternative<ValueList>(value)) {
        throw Error(ErrorKind::Validation, "kind mismatch in " + record.oid.str() + "." + name + ": unexpected list");
      }
      Item item = std::visit(
          [](const auto& v) -> Item {
            if constexpr (std::is_same_v<std::decay_t<decltype(v)>, ValueList>) return std::string();
            else return v;
          },
          value);
      check_item(item, field.kind.element, record, name);
    }
  }
  for (const FieldDef& field : layout->fields) {
    if (!field.optional && !field.kind.list && !record.values.contains(field.name)) {
      throw Error(ErrorKind::Validation, "missing required field '" + field.name + "' in record " + record.oid.str());
    }
  }
}

std::string format_float(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

namespace {

template <typename T>
void append_number(std::string& out, T value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  out.append(buf, ptr);
}

void render_item(std::string& out, const std::string& name, const Item& item) {
  if (const Oid* oid = std::get_if<Oid>(&item)) {
    out += '<';
    out += name;
    out += " r=\"";
    append_escaped_attribute(out, oid->str());
    out += "\"/>";
    return;
  }
  if (const std::string* s = std::get_if<std::string>(&item); s && s->empty()) {
    out += '<';
    out += name;
    out += "/>";
    return;
  }
  out += '<';
  out += name;
  out += '>';
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::string>) append_escaped_text(out, v);
        else if constexpr (std::is_same_v<T, bool>) out += v ? "true" : "false";
        else if constexpr (std::is_same_v<T, std::int64_t> || std::is_same_v<T, double>) append_number(out, v);
      },
      item);
  out += "</";
  out += name;
  out += '>';
}

}  // namespace

void render_record(std::string& out, const Schema& schema, const ObjectRecord& record) {
  const ClassLayout& layout = schema.layout(record.class_name);
  out += "<o c=\"";
  append_escaped_attribute(out, record.class_name);
  out += "\" id=\"";
  append_escaped_attribute(out, record.oid.str());
  out += "\">";
  for (const FieldDef& field : layout.fields) {
    auto it = record.values.find(field.name);
    if (it == record.values.end()) continue;
    if (const auto* list = std::get_if<ValueList>(&it->second)) {
      for (const Item& item : *list) render_item(out, field.name, item);
    } else {
      std::visit(
          [&](const auto& v) {
            if constexpr (!std::is_same_v<std::decay_t<decltype(v)>, ValueList>) render_item(out, field.name, Item(v));
          },
          it->second);
    }
  }
  out += "</o>";
}

CanonicalWriter::CanonicalWriter(std::ostream& out, const Schema& schema) : out_(out), schema_(schema) {
  std::string head = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<objects schema=\"";
  append_escaped_attribute(head, schema_.name());
  head += "\" schemaHash=\"";
  head += schema_.hash();
  head += "\">\n";
  out_ << head;
}

void CanonicalWriter::write(const ObjectRecord& record) {
  validate_record(schema_, record);
  if (count_ > 0 && !(last_ < record.oid)) {
    if (last_ == record.oid) throw Error(ErrorKind::DuplicateOid, "duplicate OID " + record.oid.str());
    throw Error(ErrorKind::Validation, "records out of OID order at " + record.oid.str());
  }
  line_.clear();
  render_record(line_, schema_, record);
  line_ += '\n';
  out_ << line_;
  last_ = record.oid;
  ++count_;
}

void CanonicalWriter::finish() {
  if (finished_) return;
  finished_ = true;
  out_ << "</objects>\n";
  out_.flush();
  if (!out_) throw Error(ErrorKind::Io, "failed writing canonical document");
}

void write_canonical(std::ostream& out, std::span<const ObjectRecord> records, const Schema& schema) {
  std::vector<const ObjectRecord*> sorted;
  sorted.reserve(records.size());
  for (const ObjectRecord& record : records) {
    validate_record(schema, record);
    sorted.push_back(&record);
  }
  std::sort(sorted.begin(), sorted.end(), [](const ObjectRecord* a, const ObjectRecord* b) { return a->oid < b->oid; });
  auto dup = std::adjacent_find(sorted.begin(), sorted.end(),
                                [](const ObjectRecord* a, const ObjectRecord* b) { return a->oid == b->oid; });
  if (dup != sorted.end()) throw Error(ErrorKind::DuplicateOid, "duplicate OID " + (*dup)->oid.str());

  CanonicalWriter writer(out, schema);
  for (const ObjectRecord* record : sorted) writer.write(*record);
  writer.finish();
}

std::string write_canonical(std::span<const ObjectRecord> records, const Schema& schema) {
  std::ostringstream out;
  write_canonical(out, records, schema);
  return std::move(out).str();
}

namespace {

bool blank(std::string_view text) {
  return std::all_of(text.begin(), text.end(), [](char ch) { return ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r'; });
}

[[noreturn]] void invalid(const std::string& message, Location where) {
  throw Error(ErrorKind::Validation, message, where);
}

Item parse_scalar(ScalarKind kind, std::string text, const std::string& field, Location where) {
  switch (kind) {
    case ScalarKind::Str: return text;
    case ScalarKind::Bool:
      if (text == "true") return true;
      if (text == "false") return false;
      invalid("invalid boolean '" + text + "' in field " + field, where);
    case ScalarKind::Int64: {
      std::int64_t v = 0;
      auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec == std::errc::result_out_of_range) invalid("Int64 overflow '" + text + "' in field " + field, where);
      if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
        invalid("invalid integer '" + text + "' in field " + field, where);
      }
      return v;
    }
    case ScalarKind::Float64: {
      double v = 0;
      auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (text.empty() || ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
        invalid("invalid or non-finite Float64 '" + text + "' in field " + field, where);
      }
      return v;
    }
  }
  return text;
}

// Decodes the record whose `<o>` start event is `start`, consuming events up
// to and including `</o>`.
ObjectRecord decode_record(XmlScanner& scanner, const XmlEvent& start, const Schema& schema) {
  if (start.name != "o") invalid("unexpected element <" + start.name + ">, expected <o>", start.where);
  ObjectRecord record;
  for (const XmlAttribute& attr : start.attributes) {
    if (attr.name == "c") record.class_name = attr.value;
    else if (attr.name == "id") {
      if (!Oid::is_valid(attr.value)) invalid("malformed OID '" + attr.value + "'", attr.where);
      record.oid = Oid(attr.value);
    } else {
      invalid("unexpected attribute '" + attr.name + "' on <o>", attr.where);
    }
  }
  if (record.oid.empty()) invalid("<o> without id", start.where);
  const ClassLayout* layout = schema.find(record.class_name);
  if (!layout) invalid("unknown class '" + record.class_name + "' in record " + record.oid.str(), start.where);

  XmlEvent ev;
  while (true) {
    if (!scanner.next(ev)) invalid("unterminated record " + record.oid.str(), start.where);
    if (ev.type == XmlEventType::EndElement) break;  // scanner guarantees it is </o>
    if (ev.type == XmlEventType::Text) {
      if (!blank(ev.text)) invalid("unexpected text in record " + record.oid.str(), ev.where);
      continue;
    }
    Location where = ev.where;
    auto index = layout->index_of(ev.name);
    if (!index) invalid("unknown field '" + ev.name + "' for class " + record.class_name, where);
    const FieldDef& field = layout->fields[*index];

    Item item;
    if (std::holds_alternative<ClassRef>(field.kind.element)) {
      const XmlAttribute* r = ev.attribute("r");
      if (!r || ev.attributes.size() != 1) invalid("reference field " + field.name + " needs exactly one r attribute", where);
      if (!Oid::is_valid(r->value)) invalid("malformed OID '" + r->value + "' in field " + field.name, r->where);
      item = Oid(r->value);
      if (!scanner.next(ev) || ev.type != XmlEventType::EndElement) {
        invalid("reference field " + field.name + " must be an empty element", where);
      }
    } else {
      if (!ev.attributes.empty()) invalid("unexpected attribute on scalar field " + field.name, ev.attributes.front().where);
      std::string text;
      while (true) {
        if (!scanner.next(ev)) invalid("unterminated field " + field.name, where);
        if (ev.type == XmlEventType::EndElement) break;
        if (ev.type == XmlEventType::StartElement) invalid("nested element in scalar field " + field.name, ev.where);
        text += ev.text;
      }
      item = parse_scalar(std::get<ScalarKind>(field.kind.element), std::move(text), field.name, where);
    }

    if (field.kind.list) {
      auto [it, inserted] = record.values.try_emplace(field.name, ValueList{});
      std::get<ValueList>(it->second).push_back(std::move(item));
    } else {
      auto [it, inserted] = record.values.try_emplace(field.name);
      if (!inserted) invalid("duplicate field '" + field.name + "' in record " + record.oid.str(), where);
      std::visit([&](auto&& v) { it->second = std::move(v); }, std::move(item));
    }
  }

  for (const FieldDef& field : layout->fields) {
    if (!field.optional && !field.kind.list && !record.values.contains(field.name)) {
      invalid("missing required field '" + field.name + "' in record " + record.oid.str(), start.where);
    }
  }
  return record;
}

DocumentHeader read_document(XmlScanner& scanner, const Schema& schema, const RecordSink& sink) {
  InstrumentedOperation op;
  XmlEvent ev;
  do {
    if (!scanner.next(ev)) throw Error(ErrorKind::Structure, "empty document");
  } while (ev.type == XmlEventType::Text);
  if (ev.type != XmlEventType::StartElement || ev.name != "objects") {
    throw Error(ErrorKind::Structure, "root element must be <objects>", ev.where);
  }
  DocumentHeader header;
  const XmlAttribute* name = ev.attribute("schema");
  const XmlAttribute* hash = ev.attribute("schemaHash");
  if (!name || !hash) throw Error(ErrorKind::Structure, "<objects> needs schema and schemaHash attributes", ev.where);
  header.schema_name = name->value;
  header.schema_hash = hash->value;
  if (header.schema_hash != schema.hash()) {
    throw Error(ErrorKind::HeaderMismatch,
                "document schemaHash " + header.schema_hash + " does not match schema hash " + schema.hash(), ev.where);
  }

  while (scanner.next(ev)) {
    if (ev.type == XmlEventType::Text) {
      if (!blank(ev.text)) throw Error(ErrorKind::Structure, "unexpected text between records", ev.where);
      continue;
    }
    if (ev.type == XmlEventType::EndElement) {
      // </objects>; the scanner rejects anything but trailing whitespace.
      while (scanner.next(ev)) {
      }
      return header;
    }
    RecordInFlight in_flight;
    ObjectRecord record = decode_record(scanner, ev, schema);
    sink(std::move(record));
  }
  return header;
}

}  // namespace

DocumentHeader read_canonical(std::string_view document, const Schema& schema, const RecordSink& sink) {
  XmlScanner scanner(document);
  return read_document(scanner, schema, sink);
}

DocumentHeader read_canonical(std::istream& document, const Schema& schema, const RecordSink& sink) {
  XmlScanner scanner(document);
  return read_document(scanner, schema, sink);
}

ObjectRecord parse_record(std::string_view line, const Schema& schema) {
  XmlScanner scanner(line);
  XmlEvent ev;
  if (!scanner.next(ev) || ev.type != XmlEventType::StartElement) {
    throw Error(ErrorKind::Structure, "expected a record element");
  }
  ObjectRecord record = decode_record(scanner, ev, schema);
  while (scanner.next(ev)) {
  }
  return record;
}

}  // namespace transodb
