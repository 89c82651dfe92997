#pragma once

// Deterministic generators for property tests, the acceptance suite and the
// CLI's in-memory fixtures.

#include <cstdint>

#include "transodb/graph.hpp"
#include "transodb/schema_model.hpp"

namespace transodb {

/// Valid model with 1-8 classes, at most 6 own fields per class and
/// inheritance chains at most 3 classes deep. Required single references
/// always target an ancestor-or-self of the declaring class, so every class
/// can be instantiated on its own.
ClassModel random_model(std::uint64_t seed);

/// Closed, type-correct graph of n records. Strings mix markup characters,
/// line breaks and multi-byte UTF-8. Throws Error(Validation) only when the
/// model has a required reference no record can satisfy.
ObjectGraph random_graph(const Schema& schema, std::uint64_t seed, std::size_t n);

}  // namespace transodb
