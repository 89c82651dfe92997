#include <algorithm>

#include "transodb/error.hpp"
#include "transodb/objectxml.hpp"
#include "transodb/xml_scanner.hpp"

namespace transodb {

std::vector<std::pair<std::string, const std::string*>> VerboseDocuments::files() const {
  return {{"schema.dtd", &schema_dtd}, {"schema.xml", &schema_xml}, {"data.dtd", &data_dtd}, {"data.xml", &data_xml}};
}

namespace {

constexpr std::string_view kDeclaration = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";

void element(std::string& out, int depth, std::string_view name, std::string_view text) {
  out.append(static_cast<std::size_t>(depth) * 2, ' ');
  out += '<';
  out += name;
  out += '>';
  append_escaped_text(out, text);
  out += "</";
  out += name;
  out += ">\n";
}

void open(std::string& out, int depth, std::string_view tag) {
  out.append(static_cast<std::size_t>(depth) * 2, ' ');
  out += '<';
  out += tag;
  out += ">\n";
}

void close(std::string& out, int depth, std::string_view name) {
  out.append(static_cast<std::size_t>(depth) * 2, ' ');
  out += "</";
  out += name;
  out += ">\n";
}

std::string item_text(const Item& item) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::string>) return v;
        else if constexpr (std::is_same_v<T, bool>) return v ? "true" : "false";
        else if constexpr (std::is_same_v<T, std::int64_t>) return std::to_string(v);
        else if constexpr (std::is_same_v<T, double>) return format_float(v);
        else return v.str();
      },
      item);
}

// <Value type="..."> or <Reference type="..." oid="..."/> for one item.
void value_element(std::string& out, int depth, const ElementKind& kind, const Item& item) {
  out.append(static_cast<std::size_t>(depth) * 2, ' ');
  std::string type = render_element_kind(kind);
  if (const Oid* oid = std::get_if<Oid>(&item)) {
    out += "<Reference type=\"";
    append_escaped_attribute(out, type);
    out += "\" oid=\"";
    append_escaped_attribute(out, oid->str());
    out += "\"/>\n";
    return;
  }
  out += "<Value type=\"";
  append_escaped_attribute(out, type);
  out += "\">";
  append_escaped_text(out, item_text(item));
  out += "</Value>\n";
}

void type_descriptor(std::string& out, int depth, const Schema& schema, const ClassLayout& layout) {
  const ClassDef& def = schema.model().classes.at(layout.name);
  open(out, depth, "TypeDescriptor");
  element(out, depth + 1, "ClassName", layout.name);
  element(out, depth + 1, "SuperClass", def.superclass.value_or(""));
  for (const FieldDef& field : layout.fields) {
    open(out, depth + 1, "FieldDescriptor");
    element(out, depth + 2, "FieldName", field.name);
    element(out, depth + 2, "FieldKind", render_kind(field.kind));
    element(out, depth + 2, "Optional", field.optional ? "true" : "false");
    close(out, depth + 1, "FieldDescriptor");
  }
  close(out, depth, "TypeDescriptor");
}

std::string schema_dtd() {
  return "<!ELEMENT ClassCatalog (Class*)>\n"
         "<!ATTLIST ClassCatalog name CDATA #REQUIRED>\n"
         "<!ELEMENT Class (ClassName, SuperClass, Attribute*)>\n"
         "<!ELEMENT ClassName (#PCDATA)>\n"
         "<!ELEMENT SuperClass (#PCDATA)>\n"
         "<!ELEMENT Attribute (AttributeName, AttributeKind, Optional)>\n"
         "<!ELEMENT AttributeName (#PCDATA)>\n"
         "<!ELEMENT AttributeKind (#PCDATA)>\n"
         "<!ELEMENT Optional (#PCDATA)>\n";
}

std::string data_dtd() {
  return "<!ELEMENT ObjectDatabase (Object*)>\n"
         "<!ATTLIST ObjectDatabase schema CDATA #REQUIRED>\n"
         "<!ELEMENT Object (Database, Container, Page, Slot, OID, TypeDescriptor, Fields)>\n"
         "<!ELEMENT Database (#PCDATA)>\n"
         "<!ELEMENT Container (#PCDATA)>\n"
         "<!ELEMENT Page (#PCDATA)>\n"
         "<!ELEMENT Slot (#PCDATA)>\n"
         "<!ELEMENT OID (#PCDATA)>\n"
         "<!ELEMENT TypeDescriptor (ClassName, SuperClass, FieldDescriptor*)>\n"
         "<!ELEMENT ClassName (#PCDATA)>\n"
         "<!ELEMENT SuperClass (#PCDATA)>\n"
         "<!ELEMENT FieldDescriptor (FieldName, FieldKind, Optional)>\n"
         "<!ELEMENT FieldName (#PCDATA)>\n"
         "<!ELEMENT FieldKind (#PCDATA)>\n"
         "<!ELEMENT Optional (#PCDATA)>\n"
         "<!ELEMENT Fields (Field*)>\n"
         "<!ELEMENT Field (Value | Reference)*>\n"
         "<!ATTLIST Field name CDATA #REQUIRED type CDATA #REQUIRED>\n"
         "<!ELEMENT Value (#PCDATA)>\n"
         "<!ATTLIST Value type CDATA #REQUIRED>\n"
         "<!ELEMENT Reference EMPTY>\n"
         "<!ATTLIST Reference type CDATA #REQUIRED oid CDATA #REQUIRED>\n";
}

}  // namespace

VerboseDocuments write_verbose(std::span<const ObjectRecord> records, const Schema& schema) {
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

  VerboseDocuments docs;
  docs.schema_dtd = schema_dtd();
  docs.data_dtd = data_dtd();

  std::string& catalog = docs.schema_xml;
  catalog += kDeclaration;
  catalog += "<!DOCTYPE ClassCatalog SYSTEM \"schema.dtd\">\n<ClassCatalog name=\"";
  append_escaped_attribute(catalog, schema.name());
  catalog += "\">\n";
  for (const auto& [name, def] : schema.model().classes) {
    open(catalog, 1, "Class");
    element(catalog, 2, "ClassName", name);
    element(catalog, 2, "SuperClass", def.superclass.value_or(""));
    for (const FieldDef& field : def.fields) {
      open(catalog, 2, "Attribute");
      element(catalog, 3, "AttributeName", field.name);
      element(catalog, 3, "AttributeKind", render_kind(field.kind));
      element(catalog, 3, "Optional", field.optional ? "true" : "false");
      close(catalog, 2, "Attribute");
    }
    close(catalog, 1, "Class");
  }
  catalog += "</ClassCatalog>\n";

  std::string& data = docs.data_xml;
  data += kDeclaration;
  data += "<!DOCTYPE ObjectDatabase SYSTEM \"data.dtd\">\n<ObjectDatabase schema=\"";
  append_escaped_attribute(data, schema.name());
  data += "\">\n";
  for (std::size_t index = 0; index < sorted.size(); ++index) {
    const ObjectRecord& record = *sorted[index];
    const ClassLayout& layout = schema.layout(record.class_name);
    open(data, 1, "Object");
    element(data, 2, "Database", "DB0");
    element(data, 2, "Container", std::to_string(index / 100));
    element(data, 2, "Page", std::to_string(index / 10));
    element(data, 2, "Slot", std::to_string(index));
    element(data, 2, "OID", record.oid.str());
    type_descriptor(data, 2, schema, layout);
    open(data, 2, "Fields");
    for (const FieldDef& field : layout.fields) {
      auto it = record.values.find(field.name);
      if (it == record.values.end()) continue;
      data.append(6, ' ');
      data += "<Field name=\"";
      append_escaped_attribute(data, field.name);
      data += "\" type=\"";
      append_escaped_attribute(data, render_kind(field.kind));
      data += "\">\n";
      if (const auto* list = std::get_if<ValueList>(&it->second)) {
        for (const Item& item : *list) value_element(data, 4, field.kind.element, item);
      } else {
        std::visit(
            [&](const auto& v) {
              if constexpr (!std::is_same_v<std::decay_t<decltype(v)>, ValueList>) {
                value_element(data, 4, field.kind.element, Item(v));
              }
            },
            it->second);
      }
      close(data, 3, "Field");
    }
    close(data, 2, "Fields");
    close(data, 1, "Object");
  }
  data += "</ObjectDatabase>\n";
  return docs;
}

}  // namespace transodb
