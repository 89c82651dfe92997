// End-to-end acceptance run: one PASS/FAIL line per criterion, exit status 1
// if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "../oracles.hpp"
#include "../store_contract.hpp"
#include "transodb/bench.hpp"
#include "transodb/conformance.hpp"
#include "transodb/error.hpp"
#include "transodb/graph.hpp"
#include "transodb/instrumentation.hpp"
#include "transodb/objectxml.hpp"
#include "transodb/store.hpp"
#include "transodb/xsd_frontend.hpp"

using namespace transodb;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
  void require(bool cond, const std::string& why) {
    if (!cond) fail(why);
  }
};

std::string fmt(const char* format, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c);
  return buf;
}

template <typename Fn>
ErrorKind kind_of_failure(Fn&& fn, bool& threw) {
  threw = false;
  try {
    fn();
  } catch (const Error& e) {
    threw = true;
    return e.kind();
  }
  return ErrorKind::Usage;
}

// export -> import -> export is byte-identical for 200 random (model, graph)
// pairs with up to 2000 records.
Outcome round_trip(const fs::path& tmp) {
  Outcome o;
  std::size_t total = 0, largest = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Schema s(random_model(seed));
    std::size_t n = seed % 10 == 0 ? 2000 : (seed * 7919) % 2001;
    ObjectGraph g = random_graph(s, seed, n);
    std::string first = export_graph(g);

    std::unique_ptr<ObjectStore> store;
    if (seed % 2 == 0) {
      store = std::make_unique<MemStore>(s);
    } else {
      fs::path dir = tmp / ("rt" + std::to_string(seed));
      fs::remove_all(dir);
      store = FileStore::open(dir, s);
    }
    std::istringstream in(first);
    std::size_t stored = import_document(in, s, *store);
    std::string second = export_store(*store);
    store->close();
    if (stored != n || second != first) {
      o.fail("seed " + std::to_string(seed) + ": export differs after import (" + std::to_string(n) + " records)");
    }
    total += n;
    largest = std::max(largest, n);
  }
  if (o.pass) o.detail = "200 pairs, " + std::to_string(total) + " records, largest graph " + std::to_string(largest);
  return o;
}

const ObjectRecord& victim(const ObjectGraph& g, std::uint64_t seed) {
  return std::next(g.records.begin(), static_cast<long>(seed % g.size()))->second;
}

// MemStore -> FileStore -> MemStore chains plus collision and dangling
// injections that must leave the destination untouched.
Outcome migration(const fs::path& tmp) {
  Outcome o;
  std::size_t collisions = 0, danglings = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    std::string tag = "seed " + std::to_string(seed) + ": ";
    Schema s(random_model(1000 + seed));
    std::size_t n = 1 + (seed * 131) % 1000;
    ObjectGraph g = random_graph(s, seed, n);

    MemStore src(s);
    for (const auto& [oid, r] : g.records) src.put(r);
    src.commit();
    std::string original = export_store(src);
    o.require(original == export_graph(g), tag + "source export differs from the graph");

    fs::path mid_dir = tmp / ("mig" + std::to_string(seed));
    fs::remove_all(mid_dir);
    auto mid = FileStore::open(mid_dir, s);
    o.require(migrate(src, *mid, s) == n, tag + "MemStore->FileStore count");
    MemStore back(s);
    o.require(migrate(*mid, back, s) == n, tag + "FileStore->MemStore count");
    o.require(export_store(back) == original, tag + "chain export differs from the original");

    // collision: a fresh FileStore that already holds one of the source OIDs
    fs::path busy_dir = tmp / ("busy" + std::to_string(seed));
    fs::remove_all(busy_dir);
    {
      auto seeded = FileStore::open(busy_dir, s);
      seeded->put(victim(g, seed));
      seeded->commit();
      seeded->close();
    }
    auto files_before = oracle::snapshot(busy_dir);
    auto busy = FileStore::open(busy_dir, s);
    std::string export_before = export_store(*busy);
    bool threw = false;
    ErrorKind kind = kind_of_failure([&] { migrate(src, *busy, s); }, threw);
    o.require(threw && kind == ErrorKind::DuplicateOid, tag + "collision did not abort with DuplicateOid");
    o.require(export_store(*busy) == export_before, tag + "collision changed the FileStore contents");
    busy->close();
    o.require(oracle::snapshot(busy_dir) == files_before, tag + "collision changed the FileStore files");

    ++collisions;

    MemStore mem_busy(s);
    mem_busy.put(victim(g, seed));
    mem_busy.commit();
    kind = kind_of_failure([&] { migrate(src, mem_busy, s); }, threw);
    o.require(threw && kind == ErrorKind::DuplicateOid && export_store(mem_busy) == export_before,
              tag + "collision changed the MemStore destination");

    // dangling: the source gains a record whose reference has no target
    const ClassLayout* holder = nullptr;
    for (const auto& [name, def] : s.model().classes) {
      const ClassLayout& l = s.layout(name);
      if (std::any_of(l.fields.begin(), l.fields.end(), [](const FieldDef& f) { return f.kind.ref_target() != nullptr; })) {
        holder = &l;
        break;
      }
    }
    if (holder) {
      ObjectRecord injected;
      for (std::uint64_t attempt = 0; attempt < 64 && injected.oid.empty(); ++attempt) {
        for (const auto& [oid, r] : random_graph(s, seed * 64 + attempt, 8).records) {
          if (r.class_name == holder->name) {
            injected = r;
            break;
          }
        }
      }
      if (!injected.oid.empty()) {
        injected.oid = Oid("zz-injected");
        for (const FieldDef& f : holder->fields) {
          if (!f.kind.ref_target()) continue;
          if (f.kind.list) injected.values[f.name] = ValueList{Oid("zz-missing")};
          else injected.values[f.name] = Oid("zz-missing");
          break;
        }
        MemStore tainted(s);
        for (const auto& [oid, r] : g.records) tainted.put(r);
        tainted.put(injected);
        tainted.commit();

        fs::path dst_dir = tmp / ("dang" + std::to_string(seed));
        fs::remove_all(dst_dir);
        FileStore::open(dst_dir, s)->close();
        auto dangling_before = oracle::snapshot(dst_dir);
        auto dst = FileStore::open(dst_dir, s);
        kind = kind_of_failure([&] { migrate(tainted, *dst, s); }, threw);
        o.require(threw && kind == ErrorKind::DanglingRef, tag + "dangling injection did not abort with DanglingRef");
        std::size_t left = dst->count();
        dst->close();
        o.require(left == 0 && oracle::snapshot(dst_dir) == dangling_before,
                  tag + "dangling injection changed the destination");
        ++danglings;
      }
    }
  }
  o.require(danglings >= 25, "only " + std::to_string(danglings) + " models allowed a dangling injection");
  if (o.pass) {
    o.detail = "50 chains byte-equal; " + std::to_string(collisions) + " collision and " + std::to_string(danglings) +
               " dangling injections left the destination unchanged";
  }
  return o;
}

std::vector<BenchRow> bench_rows(const std::vector<std::size_t>& sizes, const fs::path& dir) {
  fs::remove_all(dir);
  return run_bench(sizes, 42, dir);
}

Outcome size_ratio(const fs::path& tmp) {
  Outcome o;
  auto rows = bench_rows({1000, 4000, 16000}, tmp / "ratio");
  std::string values;
  double previous = 1e9;
  for (const BenchRow& row : rows) {
    double ratio = static_cast<double>(row.canonical_bytes) / static_cast<double>(row.verbose_bytes);
    values += fmt("%.0f:%.5f ", static_cast<double>(row.n), ratio);
    o.require(ratio <= 0.5, fmt("ratio %.5f above 0.5 at n=%.0f", ratio, static_cast<double>(row.n)));
    o.require(ratio <= previous, fmt("ratio rises from %.5f to %.5f at n=%.0f", previous, ratio, static_cast<double>(row.n)));
    previous = ratio;
  }
  o.detail = (o.pass ? "" : o.detail + "; ") + "canonical/verbose " + values;
  return o;
}

Outcome two_files(const fs::path& tmp) {
  Outcome o;
  fs::path dir = tmp / "files";
  auto rows = bench_rows({1000}, dir);
  o.require(rows.size() == 1 && rows[0].canonical_files == 2 && rows[0].verbose_files == 4, "bench harness file counts");
  std::size_t xsd = 0, odbx = 0, other = 0;
  for (const auto& e : fs::directory_iterator(dir / "n1000" / "canonical")) {
    std::string ext = e.path().extension().string();
    (ext == ".xsd" ? xsd : ext == ".odbx" ? odbx : other)++;
  }
  o.require(xsd == 1 && odbx == 1 && other == 0, "canonical export is not exactly one .xsd and one .odbx");
  std::set<std::string> verbose;
  for (const auto& e : fs::directory_iterator(dir / "n1000" / "verbose")) verbose.insert(e.path().filename().string());
  o.require(verbose == std::set<std::string>{"schema.dtd", "schema.xml", "data.dtd", "data.xml"},
            "verbose baseline is not the four expected files");
  if (o.pass) o.detail = "canonical: 1 .xsd + 1 .odbx; verbose: schema.dtd schema.xml data.dtd data.xml";
  return o;
}

Outcome streaming(const fs::path& tmp) {
  Outcome o;
  constexpr std::size_t kRecords = 100000;
  Schema s = bench_schema();
  fs::path doc = tmp / "stream.odbx";
  {
    ObjectGraph g = synthesize_graph(s, 42, kRecords);
    std::ofstream out(doc, std::ios::binary);
    CanonicalWriter writer(out, s);
    for (const auto& [oid, r] : g.records) writer.write(r);
    writer.finish();
  }
  fs::remove_all(tmp / "stream-store");
  auto store = FileStore::open(tmp / "stream-store", s);
  std::ifstream in(doc, std::ios::binary);
  std::size_t stored = import_document(in, s, *store);
  Instrumentation after_import = instrumentation();
  o.require(stored == kRecords, "import stored " + std::to_string(stored) + " records");
  o.require(after_import.max_records_in_flight == 1,
            "import max records in flight " + std::to_string(after_import.max_records_in_flight));
  o.require(after_import.max_pending_oids < kRecords, "pending OID set reached the record count");

  fs::path out_path = tmp / "stream-out.odbx";
  {
    std::ofstream out(out_path, std::ios::binary);
    export_store(*store, out);
  }
  Instrumentation after_export = instrumentation();
  o.require(after_export.max_records_in_flight == 1,
            "export max records in flight " + std::to_string(after_export.max_records_in_flight));
  o.require(oracle::slurp(out_path) == oracle::slurp(doc), "streamed export differs from the imported document");
  store->close();
  if (o.pass) {
    o.detail = "100000 records; max in flight import=" + std::to_string(after_import.max_records_in_flight) +
               " export=" + std::to_string(after_export.max_records_in_flight) +
               "; max pending OIDs=" + std::to_string(after_import.max_pending_oids);
  }
  return o;
}

Outcome scaling(const fs::path& tmp) {
  Outcome o;
  const std::vector<std::size_t> sizes{10000, 20000, 40000};
  std::vector<std::vector<double>> samples(sizes.size());
  for (int run = 0; run < 5; ++run) {
    auto rows = bench_rows(sizes, tmp / "scaling");
    for (std::size_t i = 0; i < rows.size(); ++i) samples[i].push_back(rows[i].export_ms + rows[i].import_ms);
  }
  std::vector<double> median;
  for (auto& v : samples) {
    std::sort(v.begin(), v.end());
    median.push_back(v[v.size() / 2]);
  }
  for (std::size_t i = 1; i < median.size(); ++i) {
    o.require(median[i] <= 3 * median[i - 1] + 50,
              fmt("t(%.0f)=%.1fms exceeds 3*t(n)+50ms", static_cast<double>(sizes[i]), median[i]));
  }
  o.detail = (o.pass ? "" : o.detail + "; ") + fmt("median export+import ms: 10k=%.1f 20k=%.1f 40k=%.1f", median[0], median[1], median[2]);
  return o;
}

Outcome schema_round_trip() {
  Outcome o;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    ClassModel m = random_model(seed);
    SchemaParseResult r = parse_schema(emit_schema(m), m.name);
    if (!r.ok() || dump_model(*r.model) != dump_model(m)) o.fail("model seed " + std::to_string(seed) + " does not round-trip");
  }
  std::string empty_hash = schema_hash(ClassModel{"m", {}});
  o.require(empty_hash == "cbf29ce484222325", "empty dump hash " + empty_hash);
  o.require(oracle::fnv1a64_hex("") == empty_hash, "independent FNV-1a disagrees on the empty dump");
  Schema bench = bench_schema();
  o.require(oracle::fnv1a64_hex(bench.dump()) == bench.hash(), "independent FNV-1a disagrees on the bench dump");
  if (o.pass) o.detail = "200 models; empty dump hash " + empty_hash;
  return o;
}

Outcome adapter_conformance(const fs::path& tmp) {
  Outcome o;
  for (const contract::Backend& backend : {contract::mem_backend(), contract::file_backend(tmp / "contract")}) {
    for (const auto& check : contract::all_checks()) {
      std::string failure;
      try {
        failure = check.run(backend);
      } catch (const std::exception& e) {
        failure = std::string("threw: ") + e.what();
      }
      o.require(failure.empty(), backend.name + " " + check.name + ": " + failure);
    }
  }
  if (o.pass) o.detail = "MemStore and FileStore pass ordering, duplicate rejection, commit visibility, reopen persistence, index rebuild";
  return o;
}

}  // namespace

int main() {
  oracle::TempDir tmp("acceptance");
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"round-trip fidelity", [&] { return round_trip(tmp.path()); }},
      {"heterogeneous migration", [&] { return migration(tmp.path()); }},
      {"lightweight format", [&] { return size_ratio(tmp.path()); }},
      {"two-file representation", [&] { return two_files(tmp.path()); }},
      {"streaming memory", [&] { return streaming(tmp.path()); }},
      {"scaling", [&] { return scaling(tmp.path()); }},
      {"schema round-trip", [&] { return schema_round_trip(); }},
      {"adapter conformance", [&] { return adapter_conformance(tmp.path()); }},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome.fail(std::string("threw: ") + e.what());
    }
    double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!outcome.pass) ++failures;
    std::cout << (outcome.pass ? "PASS" : "FAIL") << "  " << c.name << "  (" << fmt("%.1fs", seconds) << ")  "
              << outcome.detail << std::endl;
  }
  std::cout << (criteria.size() - failures) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failures == 0 ? 0 : 1;
}
