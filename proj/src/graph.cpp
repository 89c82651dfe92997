#include "transodb/graph.hpp"

#include <algorithm>
#include <sstream>
#include <tuple>

#include "transodb/error.hpp"

namespace transodb {

std::vector<ObjectRecord> ObjectGraph::record_list() const {
  std::vector<ObjectRecord> out;
  out.reserve(records.size());
  for (const auto& [oid, record] : records) out.push_back(record);
  return out;
}

const char* to_string(BuildErrorKind kind) {
  switch (kind) {
    case BuildErrorKind::DanglingRef: return "DanglingRef";
    case BuildErrorKind::DuplicateOid: return "DuplicateOid";
    case BuildErrorKind::RefTypeMismatch: return "RefTypeMismatch";
    case BuildErrorKind::RecordInvalid: return "RecordInvalid";
  }
  return "?";
}

GraphBuilder::GraphBuilder(Schema schema) : schema_(std::move(schema)) {}

void GraphBuilder::add(ObjectRecord record) {
  if (records_.contains(record.oid)) {
    errors_.push_back({BuildErrorKind::DuplicateOid, record.oid, "OID " + record.oid.str() + " occurs more than once"});
    duplicated_.insert(record.oid);
    return;
  }
  Oid oid = record.oid;
  records_.emplace(std::move(oid), std::move(record));
}

BuildResult GraphBuilder::finish() && {
  // Records sharing an OID are neither validated nor resolved, so the error
  // set does not depend on which copy arrived first.
  std::set<Oid> invalid;
  for (const auto& [oid, record] : records_) {
    if (duplicated_.contains(oid)) continue;
    try {
      validate_record(schema_, record);
    } catch (const Error& e) {
      errors_.push_back({BuildErrorKind::RecordInvalid, oid, e.what()});
      invalid.insert(oid);
    }
  }
  for (const auto& [oid, record] : records_) {
    if (invalid.contains(oid) || duplicated_.contains(oid)) continue;
    const ClassLayout& layout = schema_.layout(record.class_name);
    for_each_ref(record, [&](const std::string& field, const Oid& target) {
      auto it = records_.find(target);
      if (it == records_.end()) {
        errors_.push_back({BuildErrorKind::DanglingRef, oid,
                           oid.str() + "." + field + " -> " + target.str() + " (missing)"});
        return;
      }
      if (duplicated_.contains(target)) return;
      const std::string& declared = *layout.fields[*layout.index_of(field)].kind.ref_target();
      const std::string& actual = it->second.class_name;
      if (!schema_.has_class(actual) || !schema_.is_subtype(actual, declared)) {
        errors_.push_back({BuildErrorKind::RefTypeMismatch, oid,
                           oid.str() + "." + field + " -> " + target.str() + " has class " + actual +
                               ", expected " + declared});
      }
    });
  }

  BuildResult result;
  if (!errors_.empty()) {
    std::sort(errors_.begin(), errors_.end(), [](const BuildError& a, const BuildError& b) {
      return std::tie(a.offending, a.kind, a.detail) < std::tie(b.offending, b.kind, b.detail);
    });
    result.errors = std::move(errors_);
    return result;
  }
  result.graph = ObjectGraph{std::move(schema_), std::move(records_)};
  return result;
}

BuildResult build_graph(std::vector<ObjectRecord> records, const Schema& schema) {
  GraphBuilder builder(schema);
  for (ObjectRecord& record : records) builder.add(std::move(record));
  return std::move(builder).finish();
}

bool graphs_equal(const ObjectGraph& a, const ObjectGraph& b) {
  if (!a.schema.same_classes(b.schema)) throw Error(ErrorKind::ModelMismatch, "graphs use different class models");
  return a.records == b.records;
}

std::string export_graph(const ObjectGraph& graph) {
  std::ostringstream out;
  CanonicalWriter writer(out, graph.schema);
  for (const auto& [oid, record] : graph.records) writer.write(record);
  writer.finish();
  return std::move(out).str();
}

namespace {

void require_reference_classes(const Schema& schema) {
  auto field = [](std::string name, FieldKind kind, bool optional) { return FieldDef{std::move(name), std::move(kind), optional}; };
  ClassDef person{"Person",
                  std::nullopt,
                  {field("name", FieldKind::scalar(ScalarKind::Str), false),
                   field("age", FieldKind::scalar(ScalarKind::Int64), false),
                   field("email", FieldKind::scalar(ScalarKind::Str), true),
                   field("spouse", FieldKind::ref("Person"), true),
                   field("friends", FieldKind::list_of(ClassRef{"Person"}), false)}};
  ClassDef employee{"Employee",
                    "Person",
                    {field("salary", FieldKind::scalar(ScalarKind::Float64), false),
                     field("manager", FieldKind::ref("Employee"), true)}};
  const auto& classes = schema.model().classes;
  for (const ClassDef& expected : {person, employee}) {
    auto it = classes.find(expected.name);
    if (it == classes.end() || !(it->second == expected)) {
      throw Error(ErrorKind::Validation, "schema lacks the reference benchmark class " + expected.name);
    }
  }
}

std::string random_text(Lcg& rng) {
  static constexpr std::string_view kAlphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789 ";
  static constexpr std::string_view kSpecial = "&<>\"";
  std::size_t length = 1 + rng.below(32);
  std::string out(length, ' ');
  for (char& ch : out) ch = kAlphabet[rng.below(kAlphabet.size())];
  if (rng.below(10) == 0) out[rng.below(length)] = kSpecial[rng.below(kSpecial.size())];
  return out;
}

Oid synthetic_oid(std::uint64_t index) { return Oid("o" + std::to_string(index)); }

}  // namespace

ObjectGraph synthesize_graph(const Schema& schema, std::int64_t seed, std::size_t n) {
  require_reference_classes(schema);
  Lcg rng(static_cast<std::uint64_t>(seed));
  ObjectGraph graph{schema, {}};
  std::vector<std::uint64_t> employees;

  for (std::uint64_t i = 0; i < n; ++i) {
    ObjectRecord record;
    record.oid = synthetic_oid(i);
    bool employee = rng.below(10) < 3;
    record.class_name = employee ? "Employee" : "Person";
    record.values["name"] = random_text(rng);
    record.values["age"] = static_cast<std::int64_t>(rng.below(100));
    if (rng.below(2) == 0) record.values["email"] = random_text(rng);
    if (rng.below(2) == 0) record.values["spouse"] = synthetic_oid(rng.below(i + 1));
    ValueList friends;
    for (std::uint64_t k = rng.below(4); k > 0; --k) friends.emplace_back(synthetic_oid(rng.below(i + 1)));
    if (!friends.empty()) record.values["friends"] = std::move(friends);
    if (employee) {
      employees.push_back(i);
      record.values["salary"] = static_cast<double>(rng.below(100000000)) / 100.0;
      if (rng.below(2) == 0) record.values["manager"] = synthetic_oid(employees[rng.below(employees.size())]);
    }
    Oid oid = record.oid;
    graph.records.emplace(std::move(oid), std::move(record));
  }
  return graph;
}

}  // namespace transodb
