#include <algorithm>
#include <random>
#include <tuple>

#include "doctest.h"
#include "oracles.hpp"
#include "transodb/conformance.hpp"
#include "transodb/error.hpp"
#include "transodb/schema_model.hpp"

using namespace transodb;

namespace {

FieldDef f(std::string name, FieldKind kind, bool optional = false) { return {std::move(name), std::move(kind), optional}; }

ClassModel person_employee_manager() {
  ClassModel m{"m", {}};
  m.add({"Person", std::nullopt, {f("name", FieldKind::scalar(ScalarKind::Str)), f("age", FieldKind::scalar(ScalarKind::Int64))}});
  m.add({"Employee", "Person", {f("salary", FieldKind::scalar(ScalarKind::Float64))}});
  m.add({"Manager", "Employee", {f("reports", FieldKind::list_of(ClassRef{"Employee"}))}});
  return m;
}

std::vector<std::string> names(const std::vector<FieldDef>& fields) {
  std::vector<std::string> out;
  for (const FieldDef& fd : fields) out.push_back(fd.name);
  return out;
}

}  // namespace

TEST_CASE("empty model is valid and dumps to nothing") {
  ClassModel m{"m", {}};
  CHECK(validate_model(m).empty());
  CHECK(dump_model(m).empty());
}

TEST_CASE("self inheritance is a cycle") {
  ClassModel m{"m", {}};
  m.add({"A", "A", {}});
  auto d = validate_model(m);
  REQUIRE(d.size() == 1);
  CHECK(d[0].message == "inheritance cycle at A");
  CHECK(d[0].class_name == "A");
}

TEST_CASE("redeclaring an inherited field is reported once at the subclass") {
  ClassModel m{"m", {}};
  m.add({"Person", std::nullopt, {f("name", FieldKind::scalar(ScalarKind::Str))}});
  m.add({"Employee", "Person", {f("name", FieldKind::scalar(ScalarKind::Str))}});
  auto d = validate_model(m);
  REQUIRE(d.size() == 1);
  CHECK(d[0].class_name == "Employee");
  CHECK(d[0].field_name == "name");
  CHECK(d[0].message.find("duplicate field name") != std::string::npos);
  CHECK(d[0].message.find("in Employee") != std::string::npos);
}

TEST_CASE("each violation kind produces a diagnostic") {
  ClassModel m{"m", {}};
  m.add({"B", "Missing", {f("x", FieldKind::ref("Nowhere"))}});
  m.add({"A", std::nullopt, {f("id", FieldKind::scalar(ScalarKind::Str)), f("9bad", FieldKind::scalar(ScalarKind::Str)),
                             f("dup", FieldKind::scalar(ScalarKind::Bool)), f("dup", FieldKind::scalar(ScalarKind::Bool))}});
  m.add({"C", "D", {}});
  m.add({"D", "C", {}});
  auto d = validate_model(m);
  std::vector<std::string> messages;
  for (const auto& x : d) messages.push_back(x.message);
  CHECK(std::count_if(messages.begin(), messages.end(), [](auto& s) { return s.find("reserved") != std::string::npos; }) == 1);
  CHECK(std::count_if(messages.begin(), messages.end(), [](auto& s) { return s.find("invalid field name") != std::string::npos; }) == 1);
  CHECK(std::count_if(messages.begin(), messages.end(), [](auto& s) { return s.find("duplicate") != std::string::npos; }) == 1);
  CHECK(std::count_if(messages.begin(), messages.end(), [](auto& s) { return s.find("unresolved superclass") != std::string::npos; }) == 1);
  CHECK(std::count_if(messages.begin(), messages.end(), [](auto& s) { return s.find("unresolved reference") != std::string::npos; }) == 1);
  CHECK(std::count_if(messages.begin(), messages.end(), [](auto& s) { return s.find("cycle") != std::string::npos; }) == 2);
  // sorted by (class, field)
  for (std::size_t i = 1; i < d.size(); ++i) {
    CHECK(std::tie(d[i - 1].class_name, d[i - 1].field_name) <= std::tie(d[i].class_name, d[i].field_name));
  }
  CHECK(validate_model(m) == d);
  CHECK_THROWS_AS(dump_model(m), Error);
}

TEST_CASE("reserved and invalid identifiers") {
  CHECK(is_reserved_field_name("o"));
  CHECK(is_reserved_field_name("c"));
  CHECK(is_reserved_field_name("id"));
  CHECK_FALSE(is_reserved_field_name("ids"));
  CHECK(is_identifier("_a9"));
  CHECK_FALSE(is_identifier("9a"));
  CHECK_FALSE(is_identifier(""));
  CHECK_FALSE(is_identifier("a-b"));
}

TEST_CASE("layout flattening matches the naive walk") {
  ClassModel m = person_employee_manager();
  REQUIRE(validate_model(m).empty());
  CHECK(names(resolve_layout(m, "Person")) == std::vector<std::string>{"name", "age"});
  CHECK(names(resolve_layout(m, "Employee")) == std::vector<std::string>{"name", "age", "salary"});
  CHECK(names(resolve_layout(m, "Manager")) == std::vector<std::string>{"name", "age", "salary", "reports"});
  CHECK_THROWS_AS(resolve_layout(m, "Ghost"), Error);
}

TEST_CASE("subtype relation") {
  ClassModel m = person_employee_manager();
  CHECK(is_subtype(m, "Person", "Person"));
  CHECK(is_subtype(m, "Employee", "Person"));
  CHECK(is_subtype(m, "Manager", "Person"));
  CHECK_FALSE(is_subtype(m, "Person", "Employee"));
  CHECK_THROWS_AS(is_subtype(m, "Person", "Ghost"), Error);
}

TEST_CASE("dump grammar") {
  ClassModel m{"m", {}};
  m.add({"Person", std::nullopt, {f("name", FieldKind::scalar(ScalarKind::Str)), f("age", FieldKind::scalar(ScalarKind::Int64))}});
  CHECK(dump_model(m) == "class Person { name:str, age:int }\n");
  m.add({"Employee", "Person", {f("salary", FieldKind::scalar(ScalarKind::Float64), true)}});
  CHECK(dump_model(m) == "class Employee : Person { salary:float? }\nclass Person { name:str, age:int }\n");

  ClassModel k{"k", {}};
  k.add({"K", std::nullopt,
         {f("a", FieldKind::scalar(ScalarKind::Bool)), f("b", FieldKind::list_of(ScalarKind::Str)),
          f("c1", FieldKind::ref("K"), true), f("d", FieldKind::list_of(ClassRef{"K"}))}});
  CHECK(dump_model(k) == "class K { a:bool, b:list(str), c1:ref(K)?, d:list(ref(K)) }\n");
}

TEST_CASE("schema hash is FNV-1a of the dump") {
  ClassModel empty{"m", {}};
  Schema s(empty);
  CHECK(s.hash() == "cbf29ce484222325");
  CHECK(s.hash() == oracle::fnv1a64_hex(""));
  Schema p(person_employee_manager());
  CHECK(p.hash() == oracle::fnv1a64_hex(p.dump()));
  CHECK(p.dump() == dump_model(person_employee_manager()));
}

TEST_CASE("Schema rejects invalid models and exposes layouts") {
  ClassModel bad{"m", {}};
  bad.add({"A", "A", {}});
  CHECK_THROWS_AS(Schema{bad}, Error);

  Schema s(person_employee_manager());
  const ClassLayout& l = s.layout("Manager");
  CHECK(l.lineage == std::vector<std::string>{"Manager", "Employee", "Person"});
  CHECK(l.index_of("salary") == 2u);
  CHECK_FALSE(l.index_of("nope").has_value());
  CHECK(s.find("Ghost") == nullptr);
  CHECK_THROWS_AS(s.layout("Ghost"), Error);
}

TEST_CASE("property: layouts contain each ancestor field exactly once") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    ClassModel m = random_model(seed);
    std::map<std::string, oracle::MiniClass> mini;
    for (const auto& [name, def] : m.classes) {
      oracle::MiniClass c{def.superclass.value_or(""), {}};
      for (const FieldDef& fd : def.fields) c.fields.push_back(fd.name);
      mini[name] = c;
    }
    for (const auto& [name, def] : m.classes) {
      auto got = names(resolve_layout(m, name));
      CHECK(got == oracle::flatten(mini, name));
      std::set<std::string> unique(got.begin(), got.end());
      CHECK(unique.size() == got.size());
    }
  }
}

TEST_CASE("property: subtype is reflexive, transitive and antisymmetric") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    ClassModel m = random_model(seed);
    if (m.classes.size() > 6) continue;
    std::vector<std::string> cls;
    for (const auto& [name, def] : m.classes) cls.push_back(name);
    for (const auto& a : cls) {
      CHECK(is_subtype(m, a, a));
      for (const auto& b : cls) {
        if (a != b && is_subtype(m, a, b)) CHECK_FALSE(is_subtype(m, b, a));
        for (const auto& c : cls) {
          if (is_subtype(m, a, b) && is_subtype(m, b, c)) CHECK(is_subtype(m, a, c));
        }
      }
    }
  }
}

TEST_CASE("property: dump distinguishes models that differ in one field") {
  std::mt19937_64 rng(7);
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    ClassModel m = random_model(seed);
    std::string base = dump_model(m);

    // rename one field
    for (auto& [name, def] : m.classes) {
      if (def.fields.empty()) continue;
      ClassModel renamed = m;
      renamed.classes[name].fields[rng() % def.fields.size()].name += "x";
      if (validate_model(renamed).empty()) CHECK(dump_model(renamed) != base);

      ClassModel toggled = m;
      auto& fd = toggled.classes[name].fields[rng() % def.fields.size()];
      fd.optional = !fd.optional;
      CHECK(dump_model(toggled) != base);
      break;
    }
    // different model name, same dump
    ClassModel renamed_model = m;
    renamed_model.name = "other";
    CHECK(dump_model(renamed_model) == base);
  }
}

TEST_CASE("property: random models with distinct dumps have distinct hashes") {
  std::map<std::string, std::string> by_hash;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    Schema s(random_model(seed));
    auto [it, inserted] = by_hash.emplace(s.hash(), s.dump());
    if (!inserted) CHECK(it->second == s.dump());
  }
}
