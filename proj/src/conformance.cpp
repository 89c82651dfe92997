#include "transodb/conformance.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "transodb/error.hpp"
#include "transodb/hash.hpp"

namespace transodb {

namespace {

std::string random_identifier(std::mt19937_64& rng, std::size_t max_length) {
  static constexpr std::string_view kFirst = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz_";
  static constexpr std::string_view kRest = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz_0123456789";
  std::size_t length = 1 + rng() % max_length;
  std::string out(1, kFirst[rng() % kFirst.size()]);
  while (out.size() < length) out += kRest[rng() % kRest.size()];
  return out;
}

}  // namespace

ClassModel random_model(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ClassModel model;
  model.name = "m" + std::to_string(seed);

  std::size_t class_count = 1 + rng() % 8;
  std::vector<std::string> names;
  std::set<std::string> used;
  while (names.size() < class_count) {
    std::string name = random_identifier(rng, 6);
    if (used.insert(name).second) names.push_back(std::move(name));
  }

  std::vector<std::optional<std::size_t>> parent(class_count);
  std::vector<std::size_t> depth(class_count, 1);
  for (std::size_t i = 1; i < class_count; ++i) {
    if (rng() % 2 != 0) continue;
    std::size_t j = rng() % i;
    if (depth[j] >= 3) continue;
    parent[i] = j;
    depth[i] = depth[j] + 1;
  }

  std::set<std::string> field_names;
  for (std::size_t i = 0; i < class_count; ++i) {
    ClassDef def;
    def.name = names[i];
    if (parent[i]) def.superclass = names[*parent[i]];
    std::vector<std::size_t> lineage;
    for (std::optional<std::size_t> c = i; c; c = parent[*c]) lineage.push_back(*c);

    std::size_t field_count = rng() % 7;
    for (std::size_t f = 0; f < field_count; ++f) {
      FieldDef field;
      do {
        field.name = random_identifier(rng, 6);
      } while (is_reserved_field_name(field.name) || !field_names.insert(field.name).second);
      field.optional = rng() % 2 == 0;
      bool list = rng() % 3 == 0;
      ElementKind element;
      if (rng() % 3 == 0) {
        bool any_target = list || field.optional;
        std::size_t target = any_target ? rng() % class_count : lineage[rng() % lineage.size()];
        element = ClassRef{names[target]};
      } else {
        element = static_cast<ScalarKind>(rng() % 4);
      }
      field.kind = FieldKind{std::move(element), list};
      def.fields.push_back(std::move(field));
    }
    model.add(std::move(def));
  }
  return model;
}

namespace {

std::string random_string(std::mt19937_64& rng) {
  static constexpr std::array<std::string_view, 16> kPieces = {
      "a", "Z", "7", " ", "&", "<", ">", "\"", "'", "\n", "\t", "\xC3\xA9", "\xE4\xB8\xAD", "\xF0\x9F\x98\x80", "_", "x",
  };
  std::size_t length = rng() % 13;
  std::string out;
  for (std::size_t i = 0; i < length; ++i) out += kPieces[rng() % kPieces.size()];
  return out;
}

std::int64_t random_int(std::mt19937_64& rng) {
  switch (rng() % 4) {
    case 0: return static_cast<std::int64_t>(rng() % 2001) - 1000;
    case 1: return rng() % 2 ? std::numeric_limits<std::int64_t>::max() : std::numeric_limits<std::int64_t>::min();
    default: return static_cast<std::int64_t>(rng());
  }
}

double random_double(std::mt19937_64& rng) {
  switch (rng() % 5) {
    case 0: return static_cast<double>(static_cast<std::int64_t>(rng() % 200001) - 100000) / 100.0;
    case 1: {
      constexpr std::array<double, 6> kEdge = {0.0, -0.0, 1e300, -2.5e-308, 5e-324, 0.1};
      return kEdge[rng() % kEdge.size()];
    }
    default:
      while (true) {
        double v = std::bit_cast<double>(rng());
        if (std::isfinite(v)) return v;
      }
  }
}

std::string random_oid_prefix(std::mt19937_64& rng) {
  static constexpr std::string_view kChars = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789_.-";
  std::size_t length = 1 + rng() % 4;
  std::string out;
  for (std::size_t i = 0; i < length; ++i) out += kChars[rng() % kChars.size()];
  return out;
}

}  // namespace

ObjectGraph random_graph(const Schema& schema, std::uint64_t seed, std::size_t n) {
  std::mt19937_64 rng(seed ^ fnv1a64(schema.dump()));
  const auto& classes = schema.model().classes;
  if (classes.empty()) {
    if (n == 0) return ObjectGraph{schema, {}};
    throw Error(ErrorKind::Validation, "cannot populate a model without classes");
  }
  std::vector<const std::string*> class_names;
  for (const auto& [name, def] : classes) class_names.push_back(&name);

  std::vector<const std::string*> record_class(n);
  std::vector<Oid> oids(n);
  std::map<std::string, std::vector<std::size_t>, std::less<>> candidates;
  for (std::size_t i = 0; i < n; ++i) {
    record_class[i] = class_names[rng() % class_names.size()];
    oids[i] = Oid(random_oid_prefix(rng) + "." + std::to_string(i));
    for (const std::string& ancestor : schema.layout(*record_class[i]).lineage) candidates[ancestor].push_back(i);
  }

  auto pick_ref = [&](const std::string& target) -> std::optional<Oid> {
    auto it = candidates.find(target);
    if (it == candidates.end() || it->second.empty()) return std::nullopt;
    return oids[it->second[rng() % it->second.size()]];
  };
  auto make_item = [&](const ElementKind& kind) -> std::optional<Item> {
    if (const auto* ref = std::get_if<ClassRef>(&kind)) {
      if (auto oid = pick_ref(ref->target)) return Item(*oid);
      return std::nullopt;
    }
    switch (std::get<ScalarKind>(kind)) {
      case ScalarKind::Str: return Item(random_string(rng));
      case ScalarKind::Bool: return Item(rng() % 2 == 0);
      case ScalarKind::Int64: return Item(random_int(rng));
      case ScalarKind::Float64: return Item(random_double(rng));
    }
    return std::nullopt;
  };

  ObjectGraph graph{schema, {}};
  for (std::size_t i = 0; i < n; ++i) {
    ObjectRecord record;
    record.class_name = *record_class[i];
    record.oid = oids[i];
    for (const FieldDef& field : schema.layout(record.class_name).fields) {
      if (field.kind.list) {
        ValueList items;
        for (std::size_t k = rng() % 4; k > 0; --k) {
          if (auto item = make_item(field.kind.element)) items.push_back(std::move(*item));
        }
        if (!items.empty()) record.values.emplace(field.name, std::move(items));
        continue;
      }
      if (field.optional && rng() % 3 == 0) continue;
      std::optional<Item> item = make_item(field.kind.element);
      if (!item) {
        if (field.optional) continue;
        throw Error(ErrorKind::Validation, "no record can satisfy required reference " + record.class_name + "." + field.name);
      }
      std::visit([&](auto&& v) { record.values.emplace(field.name, std::move(v)); }, std::move(*item));
    }
    graph.records.emplace(record.oid, std::move(record));
  }
  return graph;
}

}  // namespace transodb
