#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "transodb/objectxml.hpp"
#include "transodb/schema_model.hpp"

namespace transodb {

/// A closed, type-correct set of records keyed by OID.
struct ObjectGraph {
  Schema schema;
  std::map<Oid, ObjectRecord> records;

  std::size_t size() const { return records.size(); }
  std::vector<ObjectRecord> record_list() const;
};

enum class BuildErrorKind { DanglingRef, DuplicateOid, RefTypeMismatch, RecordInvalid };

const char* to_string(BuildErrorKind kind);

struct BuildError {
  BuildErrorKind kind;
  Oid offending;
  std::string detail;

  friend bool operator==(const BuildError&, const BuildError&) = default;
};

struct BuildResult {
  std::optional<ObjectGraph> graph;  // absent whenever errors is non-empty
  std::vector<BuildError> errors;    // sorted by (offending, kind, detail)

  bool ok() const { return graph.has_value(); }
};

/// Two-pass object builder. add() registers each record and its outbound
/// references; finish() checks closure and reference subtyping.
class GraphBuilder {
 public:
  explicit GraphBuilder(Schema schema);

  void add(ObjectRecord record);
  BuildResult finish() &&;

 private:
  Schema schema_;
  std::map<Oid, ObjectRecord> records_;
  std::set<Oid> duplicated_;
  std::vector<BuildError> errors_;
};

BuildResult build_graph(std::vector<ObjectRecord> records, const Schema& schema);

/// Same OID set and field-wise equal records (Float64 bit-wise).
/// Throws Error(ModelMismatch) when the graphs use different class models.
bool graphs_equal(const ObjectGraph& a, const ObjectGraph& b);

/// Canonical document for a graph.
std::string export_graph(const ObjectGraph& graph);

/// 64-bit linear congruential generator (modulus 2^64,
/// multiplier 6364136223846793005, increment 1442695040888963407).
/// Derived values use the high 32 bits of each new state.
class Lcg {
 public:
  explicit Lcg(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ = state_ * 6364136223846793005ULL + 1442695040888963407ULL;
    return state_;
  }
  /// Uniform in [0, bound); bound must be non-zero and below 2^32.
  std::uint64_t below(std::uint64_t bound) { return (next() >> 32) % bound; }

 private:
  std::uint64_t state_;
};

/// Deterministic benchmark workload over the Person/Employee reference model.
/// OIDs o0..o(n-1); references only point at earlier-or-equal indices.
/// Throws Error(Validation) if the schema lacks the reference classes.
ObjectGraph synthesize_graph(const Schema& schema, std::int64_t seed, std::size_t n);

}  // namespace transodb
