#include "transodb/xsd_frontend.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <set>
#include <sstream>

#include "transodb/xml_scanner.hpp"

namespace transodb {

std::size_t SchemaParseResult::error_count() const {
  return static_cast<std::size_t>(std::count_if(diagnostics.begin(), diagnostics.end(),
                                                [](const SchemaDiagnostic& d) { return d.severity == Severity::Error; }));
}

std::string format_diagnostic(const SchemaDiagnostic& d) {
  std::ostringstream out;
  out << (d.severity == Severity::Error ? "error" : "warning");
  if (d.where.line != 0) out << ':' << d.where.line << ':' << d.where.column;
  out << ": " << d.message;
  return out.str();
}

namespace {

// Built-in XSD types that exist but fall outside the subset.
constexpr std::array kUnsupportedBuiltins = {
    "anyURI",  "base64Binary", "byte",  "date",       "dateTime", "decimal",    "duration",
    "ENTITY",  "float",        "gDay",  "gMonth",     "gMonthDay", "gYear",     "gYearMonth",
    "hexBinary", "ID",         "IDREF", "IDREFS",     "language", "Name",       "NCName",
    "negativeInteger", "NMTOKEN", "NMTOKENS", "nonNegativeInteger", "nonPositiveInteger",
    "normalizedString", "NOTATION", "positiveInteger", "QName", "short", "time", "token",
    "unsignedByte", "unsignedInt", "unsignedLong", "unsignedShort", "anyType", "anySimpleType",
};

std::optional<ScalarKind> supported_builtin(std::string_view local) {
  if (local == "string") return ScalarKind::Str;
  if (local == "boolean") return ScalarKind::Bool;
  if (local == "int" || local == "integer" || local == "long") return ScalarKind::Int64;
  if (local == "double") return ScalarKind::Float64;
  return std::nullopt;
}

bool is_builtin_name(std::string_view local) {
  return supported_builtin(local) ||
         std::find(kUnsupportedBuiltins.begin(), kUnsupportedBuiltins.end(), local) != kUnsupportedBuiltins.end();
}

struct PendingField {
  std::string name;
  std::string type;
  std::optional<std::string> min_occurs;
  std::optional<std::string> max_occurs;
  bool anonymous_type = false;
  Location where;
};

struct PendingClass {
  std::string name;
  std::optional<std::string> base;
  Location base_where;
  std::vector<PendingField> fields;
  bool has_content = false;
  Location where;
};

enum class Context { Schema, ComplexType, ComplexContent, Extension, Sequence, Element, Skip };

class SchemaHandler {
 public:
  explicit SchemaHandler(std::vector<SchemaDiagnostic>& diagnostics) : diagnostics_(diagnostics) {}

  void on_start(const XmlEvent& ev) {
    if (stack_.empty()) return on_root(ev);
    Context parent = stack_.back();
    if (parent == Context::Skip) return stack_.push_back(Context::Skip);

    auto local = xsd_local(ev.name);
    if (!local) {
      error(ev.where, "unexpected element <" + ev.name + ">; only XML Schema elements are allowed");
      return stack_.push_back(Context::Skip);
    }
    if (*local == "annotation") return stack_.push_back(Context::Skip);

    switch (parent) {
      case Context::Schema: return in_schema(ev, *local);
      case Context::ComplexType: return in_complex_type(ev, *local);
      case Context::ComplexContent: return in_complex_content(ev, *local);
      case Context::Extension: return in_extension(ev, *local);
      case Context::Sequence: return in_sequence(ev, *local);
      case Context::Element: return in_element(ev, *local);
      case Context::Skip: break;
    }
    stack_.push_back(Context::Skip);
  }

  void on_end() { stack_.pop_back(); }

  void on_text(const XmlEvent& ev) {
    if (!stack_.empty() && stack_.back() == Context::Skip) return;
    if (std::all_of(ev.text.begin(), ev.text.end(), [](char ch) { return ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r'; })) {
      return;
    }
    error(ev.where, "unexpected character data in schema");
  }

  std::optional<ClassModel> resolve(std::string model_name);

 private:
  void error(Location where, std::string message) {
    diagnostics_.push_back({Severity::Error, where, std::move(message)});
  }
  void warning(Location where, std::string message) {
    diagnostics_.push_back({Severity::Warning, where, std::move(message)});
  }

  // Local part of an element name in the XSD namespace.
  std::optional<std::string_view> xsd_local(std::string_view qname) const {
    auto colon = qname.find(':');
    std::string_view prefix = colon == std::string_view::npos ? std::string_view() : qname.substr(0, colon);
    if (!xsd_prefix_ || prefix != *xsd_prefix_) return std::nullopt;
    return colon == std::string_view::npos ? qname : qname.substr(colon + 1);
  }

  void check_attributes(const XmlEvent& ev, std::initializer_list<std::string_view> allowed) {
    for (const XmlAttribute& attr : ev.attributes) {
      if (attr.name == "xmlns" || attr.name.starts_with("xmlns:")) continue;
      if (std::find(allowed.begin(), allowed.end(), attr.name) != allowed.end()) continue;
      warning(attr.where, "ignored attribute '" + attr.name + "' on <" + ev.name + ">");
    }
  }

  void unsupported(const XmlEvent& ev, std::string_view local) {
    if (local == "attribute" || local == "attributeGroup" || local == "anyAttribute") {
      error(ev.where, "attributes are not supported (<" + ev.name + ">); declare the field as an element");
    } else if (local == "choice" || local == "all") {
      error(ev.where, "<" + ev.name + "> groups are not supported; use a sequence");
    } else {
      error(ev.where, "unsupported construct <" + ev.name + ">");
    }
    stack_.push_back(Context::Skip);
  }

  void on_root(const XmlEvent& ev) {
    for (const XmlAttribute& attr : ev.attributes) {
      if (attr.value != kXsdNamespace) continue;
      if (attr.name == "xmlns") xsd_prefix_ = std::string();
      else if (attr.name.starts_with("xmlns:")) xsd_prefix_ = attr.name.substr(6);
    }
    auto local = xsd_local(ev.name);
    if (!xsd_prefix_ || !local || *local != "schema") {
      error(ev.where, "root element must be schema in namespace " + std::string(kXsdNamespace));
      return stack_.push_back(Context::Skip);
    }
    if (ev.attribute("targetNamespace")) {
      warning(ev.where, "targetNamespace is ignored; user types must be referenced unqualified");
    }
    check_attributes(ev, {"targetNamespace", "elementFormDefault", "attributeFormDefault", "version"});
    stack_.push_back(Context::Schema);
  }

  void in_schema(const XmlEvent& ev, std::string_view local) {
    if (local == "complexType") {
      const XmlAttribute* name = ev.attribute("name");
      if (!name) {
        error(ev.where, "top-level complexType without a name");
        return stack_.push_back(Context::Skip);
      }
      check_attributes(ev, {"name"});
      classes_.push_back(PendingClass{name->value, std::nullopt, {}, {}, false, ev.where});
      extension_has_sequence_ = false;
      return stack_.push_back(Context::ComplexType);
    }
    if (local == "element") {
      warning(ev.where, "top-level element declaration ignored");
      return stack_.push_back(Context::Skip);
    }
    unsupported(ev, local);
  }

  void in_complex_type(const XmlEvent& ev, std::string_view local) {
    PendingClass& cls = classes_.back();
    if (local == "sequence" || local == "complexContent") {
      if (cls.has_content) error(ev.where, "complexType " + cls.name + " declares more than one content model");
      cls.has_content = true;
      if (local == "sequence") return open_sequence(ev);
      check_attributes(ev, {});
      return stack_.push_back(Context::ComplexContent);
    }
    unsupported(ev, local);
  }

  void in_complex_content(const XmlEvent& ev, std::string_view local) {
    if (local == "extension") {
      PendingClass& cls = classes_.back();
      if (const XmlAttribute* base = ev.attribute("base")) {
        cls.base = base->value;
        cls.base_where = ev.where;
      } else {
        error(ev.where, "extension without a base type");
      }
      check_attributes(ev, {"base"});
      return stack_.push_back(Context::Extension);
    }
    unsupported(ev, local);
  }

  void in_extension(const XmlEvent& ev, std::string_view local) {
    if (local == "sequence") {
      if (extension_has_sequence_) error(ev.where, "extension declares more than one sequence");
      extension_has_sequence_ = true;
      return open_sequence(ev);
    }
    unsupported(ev, local);
  }

  void open_sequence(const XmlEvent& ev) {
    for (const char* occurs : {"minOccurs", "maxOccurs"}) {
      if (const XmlAttribute* attr = ev.attribute(occurs); attr && attr->value != "1") {
        error(attr->where, std::string(occurs) + " on a sequence is not supported");
      }
    }
    check_attributes(ev, {"minOccurs", "maxOccurs"});
    stack_.push_back(Context::Sequence);
  }

  void in_sequence(const XmlEvent& ev, std::string_view local) {
    if (local != "element") return unsupported(ev, local);
    if (ev.attribute("ref")) {
      error(ev.where, "element references (ref=) are not supported");
      return stack_.push_back(Context::Skip);
    }
    const XmlAttribute* name = ev.attribute("name");
    if (!name) {
      error(ev.where, "element without a name");
      return stack_.push_back(Context::Skip);
    }
    PendingField field;
    field.name = name->value;
    field.where = ev.where;
    if (const XmlAttribute* type = ev.attribute("type")) field.type = type->value;
    if (const XmlAttribute* min = ev.attribute("minOccurs")) field.min_occurs = min->value;
    if (const XmlAttribute* max = ev.attribute("maxOccurs")) field.max_occurs = max->value;
    check_attributes(ev, {"name", "type", "minOccurs", "maxOccurs"});
    classes_.back().fields.push_back(std::move(field));
    stack_.push_back(Context::Element);
  }

  void in_element(const XmlEvent& ev, std::string_view local) {
    PendingField& field = classes_.back().fields.back();
    field.anonymous_type = true;
    if (local == "complexType") {
      error(ev.where, "anonymous nested complexType in element " + field.name +
                          " is not supported; declare a named top-level complexType and reference it");
    } else {
      error(ev.where, "unsupported construct <" + ev.name + "> inside element " + field.name);
    }
    stack_.push_back(Context::Skip);
  }

  struct ResolvedType {
    std::optional<ElementKind> kind;
    std::string error;
  };

  ResolvedType resolve_type(std::string_view qname, const std::set<std::string, std::less<>>& declared) const {
    auto colon = qname.find(':');
    if (colon != std::string_view::npos) {
      std::string_view prefix = qname.substr(0, colon);
      std::string_view local = qname.substr(colon + 1);
      if (xsd_prefix_ && prefix == *xsd_prefix_) return builtin(qname, local);
      return {std::nullopt, "namespace-qualified user type '" + std::string(qname) +
                                "' is not supported; reference complex types unqualified"};
    }
    if (xsd_prefix_ && xsd_prefix_->empty() && is_builtin_name(qname)) return builtin(qname, qname);
    if (declared.contains(qname)) return {ClassRef{std::string(qname)}, {}};
    return {std::nullopt, "unresolved type reference '" + std::string(qname) + "'"};
  }

  static ResolvedType builtin(std::string_view qname, std::string_view local) {
    if (auto scalar = supported_builtin(local)) return {*scalar, {}};
    return {std::nullopt, "unsupported XSD type " + std::string(qname)};
  }

  std::vector<SchemaDiagnostic>& diagnostics_;
  std::optional<std::string> xsd_prefix_;
  std::vector<Context> stack_;
  std::vector<PendingClass> classes_;
  bool extension_has_sequence_ = false;
};

std::optional<ClassModel> SchemaHandler::resolve(std::string model_name) {
  std::set<std::string, std::less<>> declared;
  std::map<std::string, Location> class_where;
  std::map<std::pair<std::string, std::string>, Location> field_where;
  for (const PendingClass& cls : classes_) {
    if (!declared.insert(cls.name).second) {
      error(cls.where, "duplicate complexType " + cls.name);
    } else {
      class_where[cls.name] = cls.where;
    }
  }

  ClassModel model;
  model.name = std::move(model_name);
  for (const PendingClass& cls : classes_) {
    if (model.classes.contains(cls.name)) continue;
    ClassDef def;
    def.name = cls.name;
    if (cls.base) {
      ResolvedType base = resolve_type(*cls.base, declared);
      if (!base.kind) {
        error(cls.base_where, base.error);
      } else if (const auto* ref = std::get_if<ClassRef>(&*base.kind)) {
        def.superclass = ref->target;
      } else {
        error(cls.base_where, "complexType " + cls.name + " cannot extend simple type " + *cls.base);
      }
    }
    for (const PendingField& pending : cls.fields) {
      field_where.try_emplace({cls.name, pending.name}, pending.where);
      if (pending.anonymous_type) continue;  // already reported
      if (pending.type.empty()) {
        error(pending.where, "element " + pending.name + " has no type attribute");
        continue;
      }
      FieldDef field;
      field.name = pending.name;
      if (pending.min_occurs && *pending.min_occurs != "0" && *pending.min_occurs != "1") {
        error(pending.where, "minOccurs=\"" + *pending.min_occurs + "\" is not supported (use 0 or 1)");
      }
      field.optional = pending.min_occurs == "0";
      bool list = false;
      if (pending.max_occurs && *pending.max_occurs != "1") {
        if (*pending.max_occurs == "unbounded") list = true;
        else error(pending.where, "maxOccurs=\"" + *pending.max_occurs + "\" is not supported (use 1 or unbounded)");
      }
      ResolvedType type = resolve_type(pending.type, declared);
      if (!type.kind) {
        error(pending.where, type.error + " in element " + pending.name);
        continue;
      }
      field.kind = FieldKind{std::move(*type.kind), list};
      def.fields.push_back(std::move(field));
    }
    model.classes.emplace(cls.name, std::move(def));
  }

  for (const Diagnostic& d : validate_model(model)) {
    Location where = class_where[d.class_name];
    if (!d.field_name.empty()) {
      if (auto it = field_where.find({d.class_name, d.field_name}); it != field_where.end()) where = it->second;
    }
    error(where, d.message);
  }

  bool failed = std::any_of(diagnostics_.begin(), diagnostics_.end(),
                            [](const SchemaDiagnostic& d) { return d.severity == Severity::Error; });
  if (failed) return std::nullopt;
  return model;
}

SchemaParseResult run(XmlScanner& scanner, std::string model_name) {
  SchemaParseResult result;
  SchemaHandler handler(result.diagnostics);
  try {
    XmlEvent ev;
    while (scanner.next(ev)) {
      switch (ev.type) {
        case XmlEventType::StartElement:
          handler.on_start(ev);
          break;
        case XmlEventType::EndElement: handler.on_end(); break;
        case XmlEventType::Text: handler.on_text(ev); break;
      }
    }
  } catch (const Error& e) {
    std::string message = e.what();
    if (auto pos = message.find(": "); pos != std::string::npos) message = message.substr(pos + 2);
    Location where = e.where();
    if (where.line == 0) where = {scanner.current_line(), 1};
    result.diagnostics.push_back({Severity::Error, where, "malformed XML: " + message});
    result.max_open_elements = scanner.max_depth();
    return result;
  }
  result.max_open_elements = scanner.max_depth();
  result.model = handler.resolve(std::move(model_name));
  return result;
}

}  // namespace

SchemaParseResult parse_schema(std::string_view xsd_text, std::string model_name) {
  XmlScanner scanner(xsd_text);
  return run(scanner, std::move(model_name));
}

SchemaParseResult parse_schema(std::istream& xsd, std::string model_name) {
  XmlScanner scanner(xsd);
  return run(scanner, std::move(model_name));
}

Schema load_schema(std::string_view xsd_text, std::string model_name) {
  SchemaParseResult parsed = parse_schema(xsd_text, std::move(model_name));
  if (!parsed.ok()) {
    for (const SchemaDiagnostic& d : parsed.diagnostics) {
      if (d.severity == Severity::Error) throw Error(ErrorKind::Validation, d.message, d.where);
    }
  }
  return Schema(std::move(*parsed.model));
}

namespace {

std::string xsd_type_name(const ElementKind& kind) {
  if (const auto* ref = std::get_if<ClassRef>(&kind)) return ref->target;
  switch (std::get<ScalarKind>(kind)) {
    case ScalarKind::Str: return "xs:string";
    case ScalarKind::Bool: return "xs:boolean";
    case ScalarKind::Int64: return "xs:long";
    case ScalarKind::Float64: return "xs:double";
  }
  return {};
}

}  // namespace

std::string emit_schema(const ClassModel& model) {
  dump_model(model);  // validates

  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  if (model.classes.empty()) {
    out += "<xs:schema xmlns:xs=\"http://www.w3.org/2001/XMLSchema\"/>\n";
    return out;
  }
  out += "<xs:schema xmlns:xs=\"http://www.w3.org/2001/XMLSchema\">\n";
  for (const auto& [name, def] : model.classes) {
    std::string indent = "    ";
    std::vector<std::string> closers;
    if (def.fields.empty() && !def.superclass) {
      out += "  <xs:complexType name=\"" + name + "\"/>\n";
      continue;
    }
    out += "  <xs:complexType name=\"" + name + "\">\n";
    if (def.superclass) {
      out += "    <xs:complexContent>\n";
      if (def.fields.empty()) {
        out += "      <xs:extension base=\"" + *def.superclass + "\"/>\n";
      } else {
        out += "      <xs:extension base=\"" + *def.superclass + "\">\n";
        closers.push_back("      </xs:extension>\n");
      }
      closers.push_back("    </xs:complexContent>\n");
      indent = "        ";
    }
    if (!def.fields.empty()) {
      out += indent + "<xs:sequence>\n";
      for (const FieldDef& field : def.fields) {
        out += indent + "  <xs:element name=\"" + field.name + "\" type=\"" + xsd_type_name(field.kind.element) + "\"";
        if (field.optional) out += " minOccurs=\"0\"";
        if (field.kind.list) out += " maxOccurs=\"unbounded\"";
        out += "/>\n";
      }
      out += indent + "</xs:sequence>\n";
    }
    for (const std::string& closer : closers) out += closer;
    out += "  </xs:complexType>\n";
  }
  out += "</xs:schema>\n";
  return out;
}

}  // namespace transodb
