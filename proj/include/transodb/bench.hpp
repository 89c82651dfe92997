#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "transodb/schema_model.hpp"

namespace transodb {

/// Reference benchmark schema: Person and Employee.
std::string_view bench_model_xsd();
Schema bench_schema();

struct BenchRow {
  std::size_t n = 0;
  std::size_t canonical_bytes = 0;  // schema.xsd + data.odbx
  std::size_t verbose_bytes = 0;    // the four baseline files
  double export_ms = 0;
  double import_ms = 0;
  std::size_t canonical_files = 0;
  std::size_t verbose_files = 0;
};

/// For each n: synthesize the workload, export it to `workdir` as one .xsd
/// plus one .odbx (timed), import the .odbx into a fresh FileStore (timed),
/// and emit the verbose baseline beside it. Throws Error(Validation) if the
/// directories do not hold exactly 2 and 4 files respectively.
std::vector<BenchRow> run_bench(const std::vector<std::size_t>& sizes, std::int64_t seed,
                                const std::filesystem::path& workdir);

void write_bench_tsv(std::ostream& out, const std::vector<BenchRow>& rows);

}  // namespace transodb
