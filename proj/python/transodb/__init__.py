"""Object store export, import and migration through XML Schema."""

from ._core import (
    BenchRow,
    ErrorKind,
    FileStore,
    MemStore,
    ObjectStore,
    Oid,
    Record,
    Schema,
    TransodbError,
    __version__,
    bench_model_xsd,
    bench_schema,
    export_store,
    import_document,
    migrate,
    random_document,
    random_schema,
    run_bench,
    synthesize_document,
)

__all__ = [
    "BenchRow",
    "ErrorKind",
    "FileStore",
    "MemStore",
    "ObjectStore",
    "Oid",
    "Record",
    "Schema",
    "TransodbError",
    "__version__",
    "bench_model_xsd",
    "bench_schema",
    "export_store",
    "import_document",
    "migrate",
    "random_document",
    "random_schema",
    "run_bench",
    "synthesize_document",
]
