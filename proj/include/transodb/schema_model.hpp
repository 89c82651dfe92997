#pragma once

// Class-model IR: entity classes with single inheritance and ordered typed
// fields, extracted from an XML Schema and used to drive the object codec.

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace transodb {

enum class ScalarKind { Str, Bool, Int64, Float64 };

/// Reference to an object whose class is `target` or one of its subclasses.
struct ClassRef {
  std::string target;
  friend bool operator==(const ClassRef&, const ClassRef&) = default;
};

/// What a single value (or a single list item) holds.
using ElementKind = std::variant<ScalarKind, ClassRef>;

/// Scalar, Ref or List of either. Lists never nest.
struct FieldKind {
  ElementKind element;
  bool list = false;

  static FieldKind scalar(ScalarKind kind) { return {kind, false}; }
  static FieldKind ref(std::string target) { return {ClassRef{std::move(target)}, false}; }
  static FieldKind list_of(ElementKind element) { return {std::move(element), true}; }

  /// Target class for Ref and List(Ref) kinds, nullptr otherwise.
  const std::string* ref_target() const;

  friend bool operator==(const FieldKind&, const FieldKind&) = default;
};

struct FieldDef {
  std::string name;
  FieldKind kind;
  bool optional = false;

  friend bool operator==(const FieldDef&, const FieldDef&) = default;
};

struct ClassDef {
  std::string name;
  std::optional<std::string> superclass;
  std::vector<FieldDef> fields;  // own fields, declaration order

  friend bool operator==(const ClassDef&, const ClassDef&) = default;
};

struct ClassModel {
  std::string name;
  std::map<std::string, ClassDef> classes;  // byte-wise ordered by class name

  /// Inserts or replaces `def` under its own name.
  ClassDef& add(ClassDef def);
};

struct Diagnostic {
  std::string class_name;
  std::string field_name;  // empty for class-level problems
  std::string message;

  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

bool is_identifier(std::string_view text);
/// `o`, `c` and `id` are taken by the data-document vocabulary.
bool is_reserved_field_name(std::string_view text);

/// One diagnostic per violation, sorted by (class name, field name).
std::vector<Diagnostic> validate_model(const ClassModel& model);

/// Inherited fields first (root ancestor outermost), declaration order within
/// each class. Throws Error(Validation) for an unknown class.
std::vector<FieldDef> resolve_layout(const ClassModel& model, std::string_view class_name);

bool is_subtype(const ClassModel& model, std::string_view sub, std::string_view sup);

/// `str`, `int`, `ref(Person)`, `list(float)`, ...
std::string render_kind(const FieldKind& kind);
std::string render_element_kind(const ElementKind& kind);

/// Deterministic one-line-per-class rendering; its bytes feed the schema hash.
/// Throws Error(Validation) when the model is invalid.
std::string dump_model(const ClassModel& model);

/// Resolved view of one class inside a Schema.
struct ClassLayout {
  std::string name;
  std::vector<FieldDef> fields;          // resolved layout
  std::vector<std::string> lineage;      // self first, then ancestors up to the root

  /// Position of `field` in `fields`, or nullopt.
  std::optional<std::size_t> index_of(std::string_view field) const;

 private:
  friend class Schema;
  std::map<std::string, std::size_t, std::less<>> positions_;
};

/// A validated, immutable class model together with its resolved layouts,
/// canonical dump and schema hash. Cheap to copy; shares state between copies.
class Schema {
 public:
  /// Throws Error(Validation) listing the diagnostics when `model` is invalid.
  explicit Schema(ClassModel model);

  const ClassModel& model() const { return impl_->model; }
  const std::string& name() const { return impl_->model.name; }
  const std::string& dump() const { return impl_->dump; }
  /// 16 lowercase hex digits, FNV-1a-64 of dump().
  const std::string& hash() const { return impl_->hash; }

  const ClassLayout* find(std::string_view class_name) const;
  /// Throws Error(Validation) for an unknown class.
  const ClassLayout& layout(std::string_view class_name) const;

  bool is_subtype(std::string_view sub, std::string_view sup) const;
  bool has_class(std::string_view class_name) const { return find(class_name) != nullptr; }

  /// Same class content (equal dumps); the model name is not compared.
  bool same_classes(const Schema& other) const { return dump() == other.dump(); }

 private:
  struct Impl {
    ClassModel model;
    std::string dump;
    std::string hash;
    std::map<std::string, ClassLayout, std::less<>> layouts;
  };
  std::shared_ptr<const Impl> impl_;
};

}  // namespace transodb
