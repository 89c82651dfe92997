#include "transodb/schema_model.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "transodb/error.hpp"
#include "transodb/hash.hpp"

namespace transodb {

std::string hex16(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

const std::string* FieldKind::ref_target() const {
  if (const auto* ref = std::get_if<ClassRef>(&element)) return &ref->target;
  return nullptr;
}

ClassDef& ClassModel::add(ClassDef def) {
  std::string key = def.name;
  return classes.insert_or_assign(std::move(key), std::move(def)).first->second;
}

bool is_identifier(std::string_view text) {
  if (text.empty()) return false;
  auto alpha = [](char ch) { return (ch >= 'A' && ch <= 'Z') || (ch >= 'a' && ch <= 'z') || ch == '_'; };
  auto digit = [](char ch) { return ch >= '0' && ch <= '9'; };
  if (!alpha(text.front())) return false;
  return std::all_of(text.begin() + 1, text.end(), [&](char ch) { return alpha(ch) || digit(ch); });
}

bool is_reserved_field_name(std::string_view text) {
  return text == "o" || text == "c" || text == "id";
}

namespace {

enum class ChainState { Ok, Unresolved, Cycle };

// Follows superclass links from `start`. On Ok, `chain` holds start first and
// the root last.
ChainState walk_chain(const ClassModel& model, const ClassDef& start,
                      std::vector<const ClassDef*>& chain) {
  chain.clear();
  std::set<std::string_view> seen;
  const ClassDef* current = &start;
  while (true) {
    if (!seen.insert(current->name).second) return ChainState::Cycle;
    chain.push_back(current);
    if (!current->superclass) return ChainState::Ok;
    auto it = model.classes.find(*current->superclass);
    if (it == model.classes.end()) return ChainState::Unresolved;
    current = &it->second;
  }
}

bool on_cycle(const ClassModel& model, const ClassDef& start) {
  std::set<std::string_view> seen;
  const ClassDef* current = &start;
  while (current->superclass) {
    auto it = model.classes.find(*current->superclass);
    if (it == model.classes.end()) return false;
    current = &it->second;
    if (current->name == start.name) return true;
    if (!seen.insert(current->name).second) return false;
  }
  return false;
}

}  // namespace

std::vector<Diagnostic> validate_model(const ClassModel& model) {
  std::vector<Diagnostic> out;
  auto report = [&](const std::string& cls, const std::string& field, std::string message) {
    out.push_back(Diagnostic{cls, field, std::move(message)});
  };

  std::vector<const ClassDef*> chain;
  for (const auto& [key, def] : model.classes) {
    if (key != def.name) {
      report(key, "", "class registered as '" + key + "' is named '" + def.name + "'");
    }
    if (!is_identifier(def.name)) report(key, "", "invalid class name '" + def.name + "'");

    if (def.superclass && !model.classes.contains(*def.superclass)) {
      report(key, "", "unresolved superclass " + *def.superclass + " of " + key);
    }
    if (on_cycle(model, def)) report(key, "", "inheritance cycle at " + key);

    for (const FieldDef& field : def.fields) {
      if (is_reserved_field_name(field.name)) {
        report(key, field.name, "reserved field name '" + field.name + "' in " + key);
      } else if (!is_identifier(field.name)) {
        report(key, field.name, "invalid field name '" + field.name + "' in " + key);
      }
      if (const std::string* target = field.kind.ref_target();
          target && !model.classes.contains(*target)) {
        report(key, field.name, "unresolved reference target " + *target + " in " + key + "." + field.name);
      }
    }

    // Duplicates are reported at the class that introduces the clash.
    if (walk_chain(model, def, chain) != ChainState::Ok) continue;
    std::set<std::string_view> inherited;
    for (auto it = chain.rbegin(); it + 1 != chain.rend(); ++it) {
      for (const FieldDef& f : (*it)->fields) inherited.insert(f.name);
    }
    std::set<std::string_view> own;
    std::set<std::string_view> reported;
    for (const FieldDef& field : def.fields) {
      bool clash = inherited.contains(field.name) || !own.insert(field.name).second;
      if (clash && reported.insert(field.name).second) {
        report(key, field.name, "duplicate field name '" + field.name + "' in " + key);
      }
    }
  }

  std::stable_sort(out.begin(), out.end(), [](const Diagnostic& a, const Diagnostic& b) {
    if (a.class_name != b.class_name) return a.class_name < b.class_name;
    return a.field_name < b.field_name;
  });
  return out;
}

namespace {

const ClassDef& find_class(const ClassModel& model, std::string_view name) {
  auto it = model.classes.find(std::string(name));
  if (it == model.classes.end()) {
    throw Error(ErrorKind::Validation, "unknown class '" + std::string(name) + "'");
  }
  return it->second;
}

}  // namespace

std::vector<FieldDef> resolve_layout(const ClassModel& model, std::string_view class_name) {
  std::vector<const ClassDef*> chain;
  switch (walk_chain(model, find_class(model, class_name), chain)) {
    case ChainState::Ok: break;
    case ChainState::Unresolved:
      throw Error(ErrorKind::Validation, "unresolved superclass in lineage of " + std::string(class_name));
    case ChainState::Cycle:
      throw Error(ErrorKind::Validation, "inheritance cycle in lineage of " + std::string(class_name));
  }
  std::vector<FieldDef> layout;
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
    layout.insert(layout.end(), (*it)->fields.begin(), (*it)->fields.end());
  }
  return layout;
}

bool is_subtype(const ClassModel& model, std::string_view sub, std::string_view sup) {
  find_class(model, sup);
  std::vector<const ClassDef*> chain;
  if (walk_chain(model, find_class(model, sub), chain) == ChainState::Cycle) {
    throw Error(ErrorKind::Validation, "inheritance cycle in lineage of " + std::string(sub));
  }
  return std::any_of(chain.begin(), chain.end(), [&](const ClassDef* c) { return c->name == sup; });
}

std::string render_element_kind(const ElementKind& kind) {
  if (const auto* ref = std::get_if<ClassRef>(&kind)) return "ref(" + ref->target + ")";
  switch (std::get<ScalarKind>(kind)) {
    case ScalarKind::Str: return "str";
    case ScalarKind::Bool: return "bool";
    case ScalarKind::Int64: return "int";
    case ScalarKind::Float64: return "float";
  }
  return "?";
}

std::string render_kind(const FieldKind& kind) {
  std::string element = render_element_kind(kind.element);
  return kind.list ? "list(" + element + ")" : element;
}

namespace {

void throw_invalid(const std::vector<Diagnostic>& diagnostics) {
  std::string message = "invalid class model";
  for (const Diagnostic& d : diagnostics) message += "; " + d.message;
  throw Error(ErrorKind::Validation, message);
}

}  // namespace

std::string dump_model(const ClassModel& model) {
  if (auto diagnostics = validate_model(model); !diagnostics.empty()) throw_invalid(diagnostics);

  std::string out;
  for (const auto& [name, def] : model.classes) {
    out += "class ";
    out += name;
    if (def.superclass) {
      out += " : ";
      out += *def.superclass;
    }
    out += " { ";
    bool first = true;
    for (const FieldDef& field : def.fields) {
      if (!first) out += ", ";
      first = false;
      out += field.name;
      out += ':';
      out += render_kind(field.kind);
      if (field.optional) out += '?';
    }
    out += " }\n";
  }
  return out;
}

std::optional<std::size_t> ClassLayout::index_of(std::string_view field) const {
  auto it = positions_.find(field);
  if (it == positions_.end()) return std::nullopt;
  return it->second;
}

Schema::Schema(ClassModel model) {
  if (auto diagnostics = validate_model(model); !diagnostics.empty()) throw_invalid(diagnostics);

  auto impl = std::make_shared<Impl>();
  impl->dump = dump_model(model);
  impl->hash = hex16(fnv1a64(impl->dump));
  for (const auto& [name, def] : model.classes) {
    ClassLayout layout;
    layout.name = name;
    layout.fields = resolve_layout(model, name);
    for (std::size_t i = 0; i < layout.fields.size(); ++i) {
      layout.positions_.emplace(layout.fields[i].name, i);
    }
    for (const ClassDef* c = &def;;) {
      layout.lineage.push_back(c->name);
      if (!c->superclass) break;
      c = &model.classes.at(*c->superclass);
    }
    impl->layouts.emplace(name, std::move(layout));
  }
  impl->model = std::move(model);
  impl_ = std::move(impl);
}

const ClassLayout* Schema::find(std::string_view class_name) const {
  auto it = impl_->layouts.find(class_name);
  return it == impl_->layouts.end() ? nullptr : &it->second;
}

const ClassLayout& Schema::layout(std::string_view class_name) const {
  if (const ClassLayout* found = find(class_name)) return *found;
  throw Error(ErrorKind::Validation, "unknown class '" + std::string(class_name) + "'");
}

bool Schema::is_subtype(std::string_view sub, std::string_view sup) const {
  const ClassLayout& layout = this->layout(sub);
  if (!has_class(sup)) throw Error(ErrorKind::Validation, "unknown class '" + std::string(sup) + "'");
  return std::find(layout.lineage.begin(), layout.lineage.end(), sup) != layout.lineage.end();
}

}  // namespace transodb
