#include "transodb/bench.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "transodb/error.hpp"
#include "transodb/fsutil.hpp"
#include "transodb/graph.hpp"
#include "transodb/objectxml.hpp"
#include "transodb/store.hpp"
#include "transodb/xsd_frontend.hpp"

namespace transodb {

namespace fs = std::filesystem;

namespace {

// Keep in sync with schemas/bench_model.xsd (checked by the tests).
constexpr std::string_view kBenchModelXsd = R"xsd(
<?xml version="1.0" encoding="UTF-8"?>
<xs:schema xmlns:xs="http://www.w3.org/2001/XMLSchema">
  <xs:complexType name="Person">
    <xs:sequence>
      <xs:element name="name" type="xs:string"/>
      <xs:element name="age" type="xs:long"/>
      <xs:element name="email" type="xs:string" minOccurs="0"/>
      <xs:element name="spouse" type="Person" minOccurs="0"/>
      <xs:element name="friends" type="Person" maxOccurs="unbounded"/>
    </xs:sequence>
  </xs:complexType>
  <xs:complexType name="Employee">
    <xs:complexContent>
      <xs:extension base="Person">
        <xs:sequence>
          <xs:element name="salary" type="xs:double"/>
          <xs:element name="manager" type="Employee" minOccurs="0"/>
        </xs:sequence>
      </xs:extension>
    </xs:complexContent>
  </xs:complexType>
</xs:schema>
)xsd";

using Clock = std::chrono::steady_clock;

double millis_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::size_t count_files(const fs::path& dir, std::string_view extension = {}) {
  std::size_t count = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && (extension.empty() || entry.path().extension() == extension)) ++count;
  }
  return count;
}

std::size_t directory_bytes(const fs::path& dir) {
  std::size_t total = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file()) total += static_cast<std::size_t>(entry.file_size());
  }
  return total;
}

}  // namespace

std::string_view bench_model_xsd() { return kBenchModelXsd.substr(1); }

Schema bench_schema() { return load_schema(bench_model_xsd(), "bench"); }

std::vector<BenchRow> run_bench(const std::vector<std::size_t>& sizes, std::int64_t seed, const fs::path& workdir) {
  const Schema schema = bench_schema();
  std::vector<BenchRow> rows;
  for (std::size_t n : sizes) {
    BenchRow row;
    row.n = n;
    const fs::path run_dir = workdir / ("n" + std::to_string(n));
    const fs::path canonical_dir = run_dir / "canonical";
    const fs::path verbose_dir = run_dir / "verbose";
    const fs::path store_dir = run_dir / "store";
    std::error_code ec;
    fs::remove_all(run_dir, ec);
    fs::create_directories(canonical_dir, ec);
    fs::create_directories(verbose_dir, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create " + run_dir.string() + ": " + ec.message());

    ObjectGraph graph = synthesize_graph(schema, seed, n);

    auto start = Clock::now();
    write_file_atomic(canonical_dir / "schema.xsd", emit_schema(schema.model()));
    write_file_atomic(canonical_dir / "data.odbx", [&](std::ostream& out) {
      CanonicalWriter writer(out, schema);
      for (const auto& [oid, record] : graph.records) writer.write(record);
      writer.finish();
    });
    row.export_ms = millis_since(start);

    start = Clock::now();
    {
      std::ifstream in(canonical_dir / "data.odbx", std::ios::binary);
      if (!in) throw Error(ErrorKind::Io, "cannot open " + (canonical_dir / "data.odbx").string());
      auto store = FileStore::open(store_dir, schema);
      import_document(in, schema, *store);
      store->close();
    }
    row.import_ms = millis_since(start);

    std::vector<ObjectRecord> records = graph.record_list();
    VerboseDocuments verbose = write_verbose(records, schema);
    for (const auto& [name, content] : verbose.files()) write_file_atomic(verbose_dir / name, *content);

    row.canonical_files = count_files(canonical_dir);
    row.verbose_files = count_files(verbose_dir);
    if (row.canonical_files != 2 || count_files(canonical_dir, ".xsd") != 1 || count_files(canonical_dir, ".odbx") != 1) {
      throw Error(ErrorKind::Validation, "export must consist of exactly one .xsd and one .odbx file");
    }
    if (row.verbose_files != 4) throw Error(ErrorKind::Validation, "verbose baseline must consist of four files");
    row.canonical_bytes = directory_bytes(canonical_dir);
    row.verbose_bytes = directory_bytes(verbose_dir);
    rows.push_back(row);
  }
  return rows;
}

void write_bench_tsv(std::ostream& out, const std::vector<BenchRow>& rows) {
  out << "n\tcanonical_bytes\tverbose_bytes\texport_ms\timport_ms\n";
  char ms[64];
  for (const BenchRow& row : rows) {
    out << row.n << '\t' << row.canonical_bytes << '\t' << row.verbose_bytes << '\t';
    std::snprintf(ms, sizeof ms, "%.3f\t%.3f", row.export_ms, row.import_ms);
    out << ms << '\n';
  }
}

}  // namespace transodb
