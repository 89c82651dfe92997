#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "transodb/bench.hpp"
#include "transodb/conformance.hpp"
#include "transodb/error.hpp"
#include "transodb/graph.hpp"
#include "transodb/store.hpp"
#include "transodb/xsd_frontend.hpp"

namespace py = pybind11;
using namespace transodb;

namespace {

Schema schema_from_xsd(const std::string& text, const std::string& name) {
  SchemaParseResult parsed = parse_schema(text, name);
  if (!parsed.ok()) {
    std::string message = "schema rejected";
    for (const SchemaDiagnostic& d : parsed.diagnostics) message += "\n" + format_diagnostic(d);
    throw Error(ErrorKind::Validation, message);
  }
  return Schema(std::move(*parsed.model));
}

std::vector<std::string> oids_of(const ObjectStore& store) {
  std::vector<std::string> out;
  out.reserve(store.count());
  store.scan([&](const ObjectRecord& r) { out.push_back(r.oid.str()); });
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Object store export, import and migration through XML Schema";

  py::enum_<ErrorKind>(m, "ErrorKind")
      .value("Validation", ErrorKind::Validation)
      .value("Structure", ErrorKind::Structure)
      .value("HeaderMismatch", ErrorKind::HeaderMismatch)
      .value("ModelMismatch", ErrorKind::ModelMismatch)
      .value("DanglingRef", ErrorKind::DanglingRef)
      .value("DuplicateOid", ErrorKind::DuplicateOid)
      .value("RefTypeMismatch", ErrorKind::RefTypeMismatch)
      .value("Io", ErrorKind::Io)
      .value("Usage", ErrorKind::Usage);

  m.attr("TransodbError") = py::handle(PyErr_NewException("transodb._core.TransodbError", PyExc_RuntimeError, nullptr));
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object type = py::module_::import("transodb._core").attr("TransodbError");
      py::object exc = type(e.what());
      exc.attr("kind") = py::cast(e.kind());
      exc.attr("line") = e.where().line;
      PyErr_SetObject(type.ptr(), exc.ptr());
    }
  });

  py::class_<Oid>(m, "Oid")
      .def(py::init<std::string>())
      .def("__str__", &Oid::str)
      .def("__repr__", [](const Oid& o) { return "Oid('" + o.str() + "')"; })
      .def("__eq__", [](const Oid& a, const Oid& b) { return a == b; })
      .def("__hash__", [](const Oid& o) { return py::hash(py::str(o.str())); });

  py::class_<ObjectRecord>(m, "Record")
      .def(py::init([](std::string class_name, std::string oid, std::map<std::string, Value, std::less<>> values) {
             return ObjectRecord{std::move(class_name), Oid(std::move(oid)), std::move(values)};
           }),
           py::arg("class_name"), py::arg("oid"), py::arg("values") = std::map<std::string, Value, std::less<>>{})
      .def_readwrite("class_name", &ObjectRecord::class_name)
      .def_property_readonly("oid", [](const ObjectRecord& r) { return r.oid.str(); })
      .def_readwrite("values", &ObjectRecord::values)
      .def("__eq__", [](const ObjectRecord& a, const ObjectRecord& b) { return a == b; });

  py::class_<Schema>(m, "Schema")
      .def_static("from_xsd", &schema_from_xsd, py::arg("text"), py::arg("name"))
      .def_property_readonly("name", &Schema::name)
      .def_property_readonly("hash", &Schema::hash)
      .def("dump", &Schema::dump)
      .def("to_xsd", [](const Schema& s) { return emit_schema(s.model()); })
      .def("classes", [](const Schema& s) {
        std::vector<std::string> names;
        for (const auto& [name, def] : s.model().classes) names.push_back(name);
        return names;
      })
      .def("fields", [](const Schema& s, const std::string& cls) {
        std::vector<std::string> names;
        for (const FieldDef& f : s.layout(cls).fields) names.push_back(f.name);
        return names;
      })
      .def("is_subtype", &Schema::is_subtype);

  py::class_<ObjectStore>(m, "ObjectStore")
      .def_property_readonly("schema", &ObjectStore::schema)
      .def("put", &ObjectStore::put)
      .def("get", [](const ObjectStore& s, const std::string& oid) { return s.get(Oid(oid)); })
      .def("__contains__", [](const ObjectStore& s, const std::string& oid) { return s.contains(Oid(oid)); })
      .def("class_of", [](const ObjectStore& s, const std::string& oid) { return s.class_of(Oid(oid)); })
      .def("oids", &oids_of)
      .def("__len__", &ObjectStore::count)
      .def("commit", &ObjectStore::commit)
      .def("rollback", &ObjectStore::rollback)
      .def("close", &ObjectStore::close)
      .def("__enter__", [](ObjectStore& s) -> ObjectStore& { return s; }, py::return_value_policy::reference)
      .def("__exit__", [](ObjectStore& s, py::args) { s.close(); });

  py::class_<MemStore, ObjectStore>(m, "MemStore").def(py::init<Schema>(), py::arg("schema"));

  py::class_<FileStore, ObjectStore>(m, "FileStore")
      .def_static(
          "open",
          [](const std::filesystem::path& dir, const Schema& schema, bool read_only) {
            return FileStore::open(dir, schema, read_only ? OpenMode::ReadOnly : OpenMode::ReadWrite);
          },
          py::arg("directory"), py::arg("schema"), py::arg("read_only") = false)
      .def_property_readonly("directory", &FileStore::directory)
      .def_property_readonly("index_rebuilt", &FileStore::index_rebuilt);

  m.def("bench_schema", &bench_schema);
  m.def("bench_model_xsd", [] { return std::string(bench_model_xsd()); });
  m.def("random_schema", [](std::uint64_t seed) { return Schema(random_model(seed)); }, py::arg("seed"));

  m.def(
      "import_document",
      [](const std::string& document, const Schema& schema, ObjectStore& store) {
        return import_document(std::string_view(document), schema, store);
      },
      py::arg("document"), py::arg("schema"), py::arg("store"));
  m.def("export_store", py::overload_cast<const ObjectStore&>(&export_store), py::arg("store"));
  m.def("migrate", &migrate, py::arg("src"), py::arg("dst"), py::arg("schema"));

  m.def(
      "synthesize_document",
      [](const Schema& schema, std::int64_t seed, std::size_t n) { return export_graph(synthesize_graph(schema, seed, n)); },
      py::arg("schema"), py::arg("seed"), py::arg("n"));
  m.def(
      "random_document",
      [](const Schema& schema, std::uint64_t seed, std::size_t n) { return export_graph(random_graph(schema, seed, n)); },
      py::arg("schema"), py::arg("seed"), py::arg("n"));

  py::class_<BenchRow>(m, "BenchRow")
      .def_readonly("n", &BenchRow::n)
      .def_readonly("canonical_bytes", &BenchRow::canonical_bytes)
      .def_readonly("verbose_bytes", &BenchRow::verbose_bytes)
      .def_readonly("export_ms", &BenchRow::export_ms)
      .def_readonly("import_ms", &BenchRow::import_ms)
      .def_readonly("canonical_files", &BenchRow::canonical_files)
      .def_readonly("verbose_files", &BenchRow::verbose_files);
  m.def("run_bench", &run_bench, py::arg("sizes"), py::arg("seed"), py::arg("workdir"));

#ifdef VERSION_INFO
#define TRANSODB_STR(x) #x
#define TRANSODB_XSTR(x) TRANSODB_STR(x)
  m.attr("__version__") = TRANSODB_XSTR(VERSION_INFO);
#else
  m.attr("__version__") = "dev";
#endif
}
