#include <cstdlib>

#include "doctest.h"
#include "oracles.hpp"
#include "store_contract.hpp"
#include "transodb/conformance.hpp"
#include "transodb/instrumentation.hpp"
#include "transodb/xsd_frontend.hpp"

using namespace transodb;

namespace {

Error error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e;
  }
  FAIL("expected an error");
  return Error(ErrorKind::Usage, "");
}

std::string empty_document(const Schema& s) {
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<objects schema=\"" + s.name() + "\" schemaHash=\"" + s.hash() +
         "\">\n</objects>\n";
}

ObjectRecord person(std::string oid, std::optional<std::string> spouse = std::nullopt) {
  ObjectRecord r{"Person", Oid(oid), {}};
  r.values["name"] = "n" + oid;
  r.values["age"] = std::int64_t{1};
  if (spouse) r.values["spouse"] = Oid(*spouse);
  return r;
}

void run_contract(const contract::Backend& backend) {
  for (const auto& check : contract::all_checks()) {
    CAPTURE(backend.name);
    std::string check_name = check.name;
    CAPTURE(check_name);
    std::string failure = check.run(backend);
    CHECK_MESSAGE(failure.empty(), failure);
  }
}

}  // namespace

TEST_CASE("contract: MemStore") { run_contract(contract::mem_backend()); }

TEST_CASE("contract: FileStore") {
  oracle::TempDir tmp("contract");
  run_contract(contract::file_backend(tmp.path()));
}

TEST_CASE("FileStore on-disk layout") {
  oracle::TempDir tmp("layout");
  Schema s = bench_schema();
  auto store = FileStore::open(tmp / "db", s);
  CHECK(oracle::slurp(tmp / "db" / "schema.xsd") == emit_schema(s.model()));
  CHECK(std::filesystem::exists(tmp / "db" / "LOCK"));
  store->put(person("b"));
  store->put(person("a", "b"));
  store->commit();

  std::string log = oracle::slurp(tmp / "db" / "objects.log");
  auto lines = oracle::lines_of(log);
  REQUIRE(lines.size() == 2);  // insertion order
  CHECK(lines[0] == "<o c=\"Person\" id=\"b\"><name>nb</name><age>1</age></o>");
  CHECK(lines[1] == "<o c=\"Person\" id=\"a\"><name>na</name><age>1</age><spouse r=\"b\"/></o>");

  auto index = oracle::lines_of(oracle::slurp(tmp / "db" / "index.idx"));
  REQUIRE(index.size() == 2);  // sorted by OID
  CHECK(index[0] == "a\t" + std::to_string(lines[0].size() + 1) + "\t" + std::to_string(lines[1].size()));
  CHECK(index[1] == "b\t0\t" + std::to_string(lines[0].size()));
  store->close();
  CHECK_FALSE(std::filesystem::exists(tmp / "db" / "LOCK"));
}

TEST_CASE("FileStore lock and read-only handles") {
  oracle::TempDir tmp("lock");
  Schema s = bench_schema();
  auto writer = FileStore::open(tmp / "db", s);
  CHECK(error_of([&] { FileStore::open(tmp / "db", s); }).kind() == ErrorKind::Io);

  auto reader = FileStore::open(tmp / "db", s, OpenMode::ReadOnly);
  CHECK(reader->count() == 0);
  CHECK(error_of([&] { reader->put(person("x")); }).kind() == ErrorKind::Usage);

  ::setenv("TRANSODB_NO_LOCK", "1", 1);
  CHECK_NOTHROW(FileStore::open(tmp / "db", s)->close());
  ::unsetenv("TRANSODB_NO_LOCK");

  writer->close();
  CHECK_NOTHROW(FileStore::open(tmp / "db", s)->close());
  CHECK(error_of([&] { FileStore::open(tmp / "missing", s, OpenMode::ReadOnly); }).kind() == ErrorKind::Io);
}

TEST_CASE("FileStore refuses a different model") {
  oracle::TempDir tmp("mismatch");
  FileStore::open(tmp / "db", bench_schema())->close();
  CHECK(error_of([&] { FileStore::open(tmp / "db", Schema(random_model(3))); }).kind() == ErrorKind::HeaderMismatch);
}

TEST_CASE("FileStore drops a torn final line") {
  oracle::TempDir tmp("torn");
  Schema s = bench_schema();
  auto records = synthesize_graph(s, 9, 30).record_list();
  auto store = FileStore::open(tmp / "db", s);
  for (const auto& r : records) store->put(r);
  store->commit();
  std::string before = export_store(*store);
  store->close();
  store.reset();
  {
    std::ofstream log(tmp / "db" / "objects.log", std::ios::app | std::ios::binary);
    log << "<o c=\"Person\" id=\"zz\"><name>half";
  }
  std::filesystem::remove(tmp / "db" / "index.idx");
  auto reopened = FileStore::open(tmp / "db", s);
  CHECK(reopened->index_rebuilt());
  CHECK(export_store(*reopened) == before);
  CHECK(oracle::slurp(tmp / "db" / "objects.log").back() == '\n');
}

TEST_CASE("import of the empty document") {
  Schema s = bench_schema();
  MemStore store(s);
  CHECK(import_document(empty_document(s), s, store) == 0);
  CHECK(export_store(store) == empty_document(s));
}

TEST_CASE("import of a 2-cycle") {
  Schema s = bench_schema();
  std::vector<ObjectRecord> records{person("o1", "o2"), person("o2", "o1")};
  std::string doc = write_canonical(records, s);
  oracle::TempDir tmp("cycle");
  auto file = FileStore::open(tmp / "db", s);
  MemStore mem(s);
  for (ObjectStore* store : {static_cast<ObjectStore*>(file.get()), static_cast<ObjectStore*>(&mem)}) {
    CHECK(import_document(doc, s, *store) == 2);
    CHECK(store->get(Oid("o1")) == records[0]);
    CHECK(store->get(Oid("o2")) == records[1]);
    CHECK(export_store(*store) == doc);
  }
}

TEST_CASE("failed imports leave the store unchanged") {
  Schema s = bench_schema();
  oracle::TempDir tmp("rollback");
  auto file = FileStore::open(tmp / "db", s);
  MemStore mem(s);
  std::string seed_doc = write_canonical(std::vector<ObjectRecord>{person("a"), person("b", "a")}, s);

  ObjectRecord employee{"Employee", Oid("e"), {{"name", std::string("e")}, {"age", std::int64_t{1}}, {"salary", 1.0}}};
  ObjectRecord bad_manager = employee;
  bad_manager.oid = Oid("f");
  bad_manager.values["manager"] = Oid("a");  // a is a Person
  ObjectRecord forward_bad = employee;
  forward_bad.oid = Oid("c0");
  forward_bad.values["manager"] = Oid("p9");  // resolved later to a Person

  struct Case {
    std::string name;
    std::string doc;
    ErrorKind kind;
  };
  std::vector<Case> cases{
      {"dangling", write_canonical(std::vector<ObjectRecord>{person("c", "missing")}, s), ErrorKind::DanglingRef},
      {"collision", write_canonical(std::vector<ObjectRecord>{person("c"), person("b")}, s), ErrorKind::DuplicateOid},
      {"type", write_canonical(std::vector<ObjectRecord>{bad_manager}, s), ErrorKind::RefTypeMismatch},
      {"forward type", write_canonical(std::vector<ObjectRecord>{forward_bad, person("p9")}, s), ErrorKind::RefTypeMismatch},
      {"header", empty_document(Schema(random_model(4))), ErrorKind::HeaderMismatch},
  };
  std::string truncated = write_canonical(synthesize_graph(s, 1, 10).record_list(), s);
  truncated.resize(truncated.size() / 2);
  cases.push_back({"truncated", truncated, ErrorKind::Structure});

  for (ObjectStore* store : {static_cast<ObjectStore*>(file.get()), static_cast<ObjectStore*>(&mem)}) {
    REQUIRE(import_document(seed_doc, s, *store) == 2);
    for (const Case& c : cases) {
      CAPTURE(c.name);
      auto before_files = oracle::snapshot(tmp / "db");
      Error e = error_of([&] { import_document(c.doc, s, *store); });
      CHECK(e.kind() == c.kind);
      CHECK(store->count() == 2);
      CHECK(export_store(*store) == seed_doc);
      if (store == file.get()) CHECK(oracle::snapshot(tmp / "db") == before_files);
    }
  }
  file->close();
  CHECK(export_store(*FileStore::open(tmp / "db", s)) == seed_doc);
}

TEST_CASE("truncated import reports a line") {
  Schema s = bench_schema();
  std::string doc = write_canonical(synthesize_graph(s, 1, 10).record_list(), s);
  std::size_t cut = doc.find("<o ", doc.find("<o ") + 1) + 20;
  MemStore store(s);
  Error e = error_of([&] { import_document(doc.substr(0, cut), s, store); });
  CHECK(e.kind() == ErrorKind::Structure);
  CHECK(e.where().line >= 3);
  CHECK(store.count() == 0);
}

TEST_CASE("import resolves references into previously stored records") {
  Schema s = bench_schema();
  MemStore store(s);
  import_document(write_canonical(std::vector<ObjectRecord>{person("a")}, s), s, store);
  CHECK(import_document(write_canonical(std::vector<ObjectRecord>{person("b", "a")}, s), s, store) == 1);
  CHECK(store.count() == 2);
}

TEST_CASE("export equals write_canonical and is identical across backends") {
  Schema s = bench_schema();
  std::vector<ObjectRecord> records = synthesize_graph(s, 42, 300).record_list();
  std::string expected = write_canonical(records, s);
  oracle::TempDir tmp("cross");
  auto file = FileStore::open(tmp / "db", s);
  MemStore mem(s);
  for (auto it = records.rbegin(); it != records.rend(); ++it) {
    file->put(*it);
    mem.put(*it);
  }
  file->commit();
  CHECK(export_store(mem) == expected);
  CHECK(export_store(*file) == expected);
  std::ostringstream streamed;
  export_store(*file, streamed);
  CHECK(streamed.str() == expected);
  CHECK(export_store(MemStore(s)) == empty_document(s));
}

TEST_CASE("streaming counters on import and export") {
  Schema s = bench_schema();
  std::string doc = export_graph(synthesize_graph(s, 42, 2000));
  oracle::TempDir tmp("stream");
  auto file = FileStore::open(tmp / "db", s);
  std::istringstream in(doc);
  import_document(in, s, *file);
  CHECK(instrumentation().max_records_in_flight == 1);
  CHECK(instrumentation().max_pending_oids > 0);
  CHECK(instrumentation().max_pending_oids < 2000);
  CHECK(instrumentation().pending_oids == 0);
  std::ostringstream out;
  export_store(*file, out);
  CHECK(instrumentation().max_records_in_flight == 1);
  CHECK(out.str() == doc);
}

TEST_CASE("migrate") {
  Schema s = bench_schema();
  oracle::TempDir tmp("migrate");

  SUBCASE("empty source") {
    MemStore src(s);
    auto dst = FileStore::open(tmp / "a", s);
    CHECK(migrate(src, *dst, s) == 0);
    CHECK(export_store(*dst) == empty_document(s));
  }
  SUBCASE("MemStore to FileStore to MemStore") {
    MemStore src(s);
    for (const auto& [oid, r] : synthesize_graph(s, 42, 500).records) src.put(r);
    src.commit();
    std::string original = export_store(src);
    auto mid = FileStore::open(tmp / "b", s);
    CHECK(migrate(src, *mid, s) == 500);
    MemStore back(s);
    CHECK(migrate(*mid, back, s) == 500);
    CHECK(export_store(back) == original);
    CHECK(instrumentation().max_records_in_flight == 1);
  }
  SUBCASE("collision leaves the destination unchanged") {
    MemStore src(s);
    for (const auto& [oid, r] : synthesize_graph(s, 42, 50).records) src.put(r);
    auto dst = FileStore::open(tmp / "c", s);
    dst->put(person("o17"));
    dst->commit();
    auto before = oracle::snapshot(tmp / "c");
    CHECK(error_of([&] { migrate(src, *dst, s); }).kind() == ErrorKind::DuplicateOid);
    CHECK(dst->count() == 1);
    CHECK(oracle::snapshot(tmp / "c") == before);
  }
  SUBCASE("misuse") {
    MemStore a(s);
    CHECK(error_of([&] { migrate(a, a, s); }).kind() == ErrorKind::Usage);
    Schema other(random_model(5));
    MemStore b(other);
    CHECK(error_of([&] { migrate(a, b, s); }).kind() == ErrorKind::ModelMismatch);
    CHECK(error_of([&] { migrate(b, a, s); }).kind() == ErrorKind::ModelMismatch);
  }
}
