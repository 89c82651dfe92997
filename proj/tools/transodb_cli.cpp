// transodb: schema extraction, export/import, migration and size/time
// benchmarks for object stores described by an XML Schema.
//
// Exit codes: 0 success, 1 domain or validation error, 2 I/O error.

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "transodb/bench.hpp"
#include "transodb/conformance.hpp"
#include "transodb/error.hpp"
#include "transodb/fsutil.hpp"
#include "transodb/graph.hpp"
#include "transodb/store.hpp"
#include "transodb/xsd_frontend.hpp"

namespace fs = std::filesystem;
using namespace transodb;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitIo = 2;

int exit_code_for(const Error& e) { return e.kind() == ErrorKind::Io ? kExitIo : kExitDomain; }

Schema load_schema_file(const fs::path& path) {
  std::string text = read_file(path);
  SchemaParseResult parsed = parse_schema(text, path.stem().string());
  for (const SchemaDiagnostic& d : parsed.diagnostics) {
    std::cerr << path.string() << ':' << format_diagnostic(d) << '\n';
  }
  if (!parsed.ok()) throw Error(ErrorKind::Validation, "schema " + path.string() + " rejected");
  return Schema(std::move(*parsed.model));
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = text.find(sep, start);
    parts.emplace_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) return parts;
    start = pos + 1;
  }
}

std::size_t parse_count(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    unsigned long long v = std::stoull(text, &used);
    if (used == text.size()) return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
  }
  throw Error(ErrorKind::Usage, "invalid " + what + " '" + text + "'");
}

// mem:empty, mem:bench:N[:SEED], mem:random:N[:SEED]
std::unique_ptr<ObjectStore> open_fixture(std::string_view name, const Schema& schema) {
  auto store = std::make_unique<MemStore>(schema);
  std::vector<std::string> parts = split(name, ':');
  if (parts.size() == 1 && parts[0] == "empty") return store;
  if ((parts[0] == "bench" || parts[0] == "random") && (parts.size() == 2 || parts.size() == 3)) {
    std::size_t n = parse_count(parts[1], "fixture size");
    std::size_t seed = parts.size() == 3 ? parse_count(parts[2], "fixture seed") : 42;
    ObjectGraph graph = parts[0] == "bench" ? synthesize_graph(schema, static_cast<std::int64_t>(seed), n)
                                            : random_graph(schema, seed, n);
    for (const auto& [oid, record] : graph.records) store->put(record);
    store->commit();
    return store;
  }
  throw Error(ErrorKind::Usage, "unknown fixture 'mem:" + std::string(name) +
                                    "' (expected mem:empty, mem:bench:N[:SEED] or mem:random:N[:SEED])");
}

std::unique_ptr<ObjectStore> open_store(const std::string& spec, const Schema& schema, OpenMode mode) {
  if (spec.starts_with("mem:")) return open_fixture(std::string_view(spec).substr(4), schema);
  std::string path = spec.starts_with("file:") ? spec.substr(5) : spec;
  return FileStore::open(path, schema, mode);
}

int cmd_schema(const fs::path& file) {
  Schema schema = load_schema_file(file);
  std::cout << schema.dump() << schema.hash() << '\n';
  return kExitOk;
}

int cmd_export(const fs::path& schema_file, const std::string& store_spec, const fs::path& out) {
  Schema schema = load_schema_file(schema_file);
  auto store = open_store(store_spec, schema, OpenMode::ReadOnly);
  write_file_atomic(out, [&](std::ostream& os) { export_store(*store, os); });
  std::cout << store->count() << " records\n";
  return kExitOk;
}

int cmd_import(const fs::path& schema_file, const fs::path& in, const std::string& store_spec) {
  Schema schema = load_schema_file(schema_file);
  std::ifstream document(in, std::ios::binary);
  if (!document) throw Error(ErrorKind::Io, "cannot open " + in.string());
  auto store = open_store(store_spec, schema, OpenMode::ReadWrite);
  std::size_t stored = import_document(document, schema, *store);
  store->close();
  std::cout << stored << " records\n";
  return kExitOk;
}

int cmd_migrate(const fs::path& schema_file, const std::string& from, const std::string& to) {
  Schema schema = load_schema_file(schema_file);
  auto src = open_store(from, schema, OpenMode::ReadOnly);
  auto dst = open_store(to, schema, OpenMode::ReadWrite);
  std::size_t moved = migrate(*src, *dst, schema);
  dst->close();
  std::cout << moved << " records migrated\n";
  return kExitOk;
}

int cmd_bench(const std::string& sizes_text, std::int64_t seed, const std::string& out, const std::string& workdir) {
  std::vector<std::size_t> sizes;
  if (!sizes_text.empty()) {
    for (const std::string& part : split(sizes_text, ',')) sizes.push_back(parse_count(part, "size"));
  }
  fs::path dir = workdir.empty() ? fs::temp_directory_path() / ("transodb-bench-" + std::to_string(::getpid()))
                                 : fs::path(workdir);
  std::vector<BenchRow> rows;
  try {
    rows = run_bench(sizes, seed, dir);
  } catch (...) {
    if (workdir.empty()) fs::remove_all(dir);
    throw;
  }
  if (workdir.empty()) fs::remove_all(dir);

  if (out.empty()) {
    write_bench_tsv(std::cout, rows);
  } else {
    write_file_atomic(out, [&](std::ostream& os) { write_bench_tsv(os, rows); });
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Object database export, import and migration through XML Schema and canonical object XML"};
  app.require_subcommand(1);

  std::string schema_arg, store_arg, in_arg, out_arg, from_arg, to_arg, sizes_arg, workdir_arg;
  std::int64_t seed = 42;

  auto* schema_cmd = app.add_subcommand("schema", "Print the class model and schema hash of an XSD file");
  schema_cmd->add_option("file", schema_arg, "XSD file")->required();

  auto* export_cmd = app.add_subcommand("export", "Write a store's objects as a canonical .odbx document");
  export_cmd->add_option("--schema", schema_arg, "XSD file")->required();
  export_cmd->add_option("--store", store_arg, "store directory, file:PATH or mem:FIXTURE")->required();
  export_cmd->add_option("--out", out_arg, "output .odbx file")->required();

  auto* import_cmd = app.add_subcommand("import", "Load a canonical .odbx document into a store");
  import_cmd->add_option("--schema", schema_arg, "XSD file")->required();
  import_cmd->add_option("--in", in_arg, "input .odbx file")->required();
  import_cmd->add_option("--store", store_arg, "store directory or file:PATH")->required();

  auto* migrate_cmd = app.add_subcommand("migrate", "Copy every object from one store into another");
  migrate_cmd->add_option("--schema", schema_arg, "XSD file")->required();
  migrate_cmd->add_option("--from", from_arg, "source store: file:PATH or mem:FIXTURE")->required();
  migrate_cmd->add_option("--to", to_arg, "destination store: file:PATH or mem:FIXTURE")->required();

  auto* bench_cmd = app.add_subcommand("bench", "Compare canonical and verbose sizes and time export/import");
  bench_cmd->add_option("--sizes", sizes_arg, "comma-separated object counts")->required();
  bench_cmd->add_option("--seed", seed, "workload seed")->capture_default_str();
  bench_cmd->add_option("--out", out_arg, "TSV report file (default: standard output)");
  bench_cmd->add_option("--workdir", workdir_arg, "keep generated files in this directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitDomain;
  }

  try {
    if (*schema_cmd) return cmd_schema(schema_arg);
    if (*export_cmd) return cmd_export(schema_arg, store_arg, out_arg);
    if (*import_cmd) return cmd_import(schema_arg, in_arg, store_arg);
    if (*migrate_cmd) return cmd_migrate(schema_arg, from_arg, to_arg);
    if (*bench_cmd) return cmd_bench(sizes_arg, seed, out_arg, workdir_arg);
  } catch (const Error& e) {
    std::cerr << "transodb: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const fs::filesystem_error& e) {
    std::cerr << "transodb: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "transodb: " << e.what() << '\n';
    return kExitDomain;
  }
  return kExitDomain;
}
