#pragma once

// Uniform storage contract plus two backends. Puts are staged until commit();
// rollback() discards everything put since the last commit.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "transodb/objectxml.hpp"
#include "transodb/schema_model.hpp"

namespace transodb {

class ObjectStore {
 public:
  explicit ObjectStore(Schema schema) : schema_(std::move(schema)) {}
  virtual ~ObjectStore() = default;

  ObjectStore(const ObjectStore&) = delete;
  ObjectStore& operator=(const ObjectStore&) = delete;

  /// Model bound at open time; every put is validated against it.
  const Schema& schema() const { return schema_; }

  /// Throws Error(Validation) or Error(DuplicateOid); never overwrites.
  virtual void put(const ObjectRecord& record) = 0;
  virtual std::optional<ObjectRecord> get(const Oid& oid) const = 0;
  virtual bool contains(const Oid& oid) const = 0;
  /// Class of the stored record, without necessarily decoding it.
  virtual std::optional<std::string> class_of(const Oid& oid) const = 0;
  /// Visits every record in byte-wise OID order, one at a time.
  virtual void scan(const std::function<void(const ObjectRecord&)>& visit) const = 0;
  virtual std::size_t count() const = 0;
  virtual void commit() = 0;
  virtual void rollback() = 0;
  /// Discards uncommitted puts and releases resources. Idempotent.
  virtual void close() = 0;

 private:
  Schema schema_;
};

class MemStore final : public ObjectStore {
 public:
  explicit MemStore(Schema schema) : ObjectStore(std::move(schema)) {}

  void put(const ObjectRecord& record) override;
  std::optional<ObjectRecord> get(const Oid& oid) const override;
  bool contains(const Oid& oid) const override { return records_.contains(oid); }
  std::optional<std::string> class_of(const Oid& oid) const override;
  void scan(const std::function<void(const ObjectRecord&)>& visit) const override;
  std::size_t count() const override { return records_.size(); }
  void commit() override { uncommitted_.clear(); }
  void rollback() override;
  void close() override { rollback(); }

 private:
  std::map<Oid, ObjectRecord> records_;
  std::vector<Oid> uncommitted_;
};

enum class OpenMode { ReadWrite, ReadOnly };

/// Directory-backed store:
///   schema.xsd   emit_schema() of the bound model
///   objects.log  one canonical record line per put, append-only
///   index.idx    "OID\toffset\tlength" per record, sorted, rewritten at commit
///   LOCK         held by the single read-write handle
class FileStore final : public ObjectStore {
 public:
  /// Creates the store when `dir` does not exist (ReadWrite only). Verifies
  /// the stored schema hash and rebuilds a missing or stale index.
  /// Set TRANSODB_NO_LOCK=1 to skip the lock file.
  static std::unique_ptr<FileStore> open(const std::filesystem::path& dir, Schema schema,
                                         OpenMode mode = OpenMode::ReadWrite);
  ~FileStore() override;

  void put(const ObjectRecord& record) override;
  std::optional<ObjectRecord> get(const Oid& oid) const override;
  bool contains(const Oid& oid) const override { return index_.contains(oid); }
  std::optional<std::string> class_of(const Oid& oid) const override;
  void scan(const std::function<void(const ObjectRecord&)>& visit) const override;
  std::size_t count() const override { return index_.size(); }
  void commit() override;
  void rollback() override;
  void close() override;

  const std::filesystem::path& directory() const { return dir_; }
  /// True when open() had to reconstruct index.idx from objects.log.
  bool index_rebuilt() const { return index_rebuilt_; }

 private:
  struct Entry {
    std::uint64_t offset = 0;
    std::uint32_t length = 0;
    mutable int class_id = -1;  // position in class_names_, -1 until known
  };

  FileStore(std::filesystem::path dir, Schema schema, OpenMode mode);
  void acquire_lock();
  void load_index();
  void rebuild_index();
  void write_index() const;
  void flush_pending() const;
  std::string read_line(const Entry& entry) const;
  int class_id(const std::string& name) const;
  void require_writable() const;

  std::filesystem::path dir_;
  OpenMode mode_;
  int fd_ = -1;
  bool locked_ = false;
  bool index_rebuilt_ = false;
  std::map<Oid, Entry> index_;
  std::vector<std::string> class_names_;
  std::vector<Oid> uncommitted_;
  std::uint64_t committed_size_ = 0;
  std::uint64_t log_size_ = 0;  // including buffered bytes
  mutable std::string buffer_;   // rendered lines not yet written
  mutable std::uint64_t flushed_size_ = 0;
};

/// Streams `document` into `store`: each record is put as soon as it is
/// decoded, references are checked against the store after the pass, and the
/// import is committed only if everything resolved. On any failure the store
/// is rolled back and the error rethrown.
std::size_t import_document(std::istream& document, const Schema& schema, ObjectStore& store);
std::size_t import_document(std::string_view document, const Schema& schema, ObjectStore& store);

/// Canonical document of the store's contents, streamed record by record.
void export_store(const ObjectStore& store, std::ostream& out);
std::string export_store(const ObjectStore& store);

/// Record-by-record copy of `src` into `dst` with the same checks and
/// rollback as import_document. Returns the number of records migrated.
std::size_t migrate(const ObjectStore& src, ObjectStore& dst, const Schema& schema);

}  // namespace transodb
