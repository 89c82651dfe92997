#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstdlib>
#include <cstring>
#include <fstream>

#include "transodb/error.hpp"
#include "transodb/fsutil.hpp"
#include "transodb/instrumentation.hpp"
#include "transodb/objectxml.hpp"
#include "transodb/store.hpp"
#include "transodb/xsd_frontend.hpp"

namespace transodb {

namespace fs = std::filesystem;

namespace {

constexpr std::size_t kFlushThreshold = 1 << 20;

[[noreturn]] void io_failure(const std::string& what) {
  throw Error(ErrorKind::Io, what + ": " + std::strerror(errno));
}

bool lock_disabled() {
  const char* env = std::getenv("TRANSODB_NO_LOCK");
  return env && std::string_view(env) == "1";
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return !text.empty() && ec == std::errc() && ptr == text.data() + text.size();
}

}  // namespace

FileStore::FileStore(fs::path dir, Schema schema, OpenMode mode)
    : ObjectStore(std::move(schema)), dir_(std::move(dir)), mode_(mode) {
  for (const auto& [name, def] : this->schema().model().classes) class_names_.push_back(name);
}

FileStore::~FileStore() {
  try {
    close();
  } catch (...) {
  }
}

std::unique_ptr<FileStore> FileStore::open(const fs::path& dir, Schema schema, OpenMode mode) {
  std::error_code ec;
  if (!fs::exists(dir, ec)) {
    if (mode == OpenMode::ReadOnly) throw Error(ErrorKind::Io, "no store at " + dir.string());
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());
  } else if (!fs::is_directory(dir, ec)) {
    throw Error(ErrorKind::Io, dir.string() + " is not a directory");
  }

  std::unique_ptr<FileStore> store(new FileStore(dir, std::move(schema), mode));
  if (mode == OpenMode::ReadWrite) store->acquire_lock();

  const fs::path schema_path = dir / "schema.xsd";
  const fs::path log_path = dir / "objects.log";
  if (!fs::exists(schema_path, ec)) {
    if (mode == OpenMode::ReadOnly) throw Error(ErrorKind::Io, "no schema.xsd in " + dir.string());
    if (fs::exists(log_path, ec)) throw Error(ErrorKind::Io, "objects.log without schema.xsd in " + dir.string());
    write_file_atomic(schema_path, emit_schema(store->schema().model()));
    write_file_atomic(dir / "index.idx", std::string_view());
  } else {
    SchemaParseResult stored = parse_schema(read_file(schema_path), store->schema().name());
    if (!stored.ok()) throw Error(ErrorKind::Validation, "unreadable schema.xsd in " + dir.string());
    std::string stored_hash = schema_hash(*stored.model);
    if (stored_hash != store->schema().hash()) {
      throw Error(ErrorKind::HeaderMismatch, "store " + dir.string() + " has schema hash " + stored_hash +
                                                 ", expected " + store->schema().hash());
    }
  }

  int flags = mode == OpenMode::ReadOnly ? O_RDONLY : (O_RDWR | O_CREAT);
  store->fd_ = ::open(log_path.c_str(), flags | O_CLOEXEC, 0644);
  if (store->fd_ < 0) io_failure("cannot open " + log_path.string());
  struct stat st {};
  if (::fstat(store->fd_, &st) != 0) io_failure("cannot stat " + log_path.string());
  store->log_size_ = store->committed_size_ = store->flushed_size_ = static_cast<std::uint64_t>(st.st_size);
  store->load_index();
  return store;
}

void FileStore::acquire_lock() {
  if (lock_disabled()) return;
  const fs::path lock_path = dir_ / "LOCK";
  int fd = ::open(lock_path.c_str(), O_WRONLY | O_CREAT | O_EXCL | O_CLOEXEC, 0644);
  if (fd < 0) {
    if (errno == EEXIST) {
      throw Error(ErrorKind::Io, "store " + dir_.string() + " is locked by another writer (remove LOCK if stale)");
    }
    io_failure("cannot create " + lock_path.string());
  }
  std::string pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] auto written = ::write(fd, pid.data(), pid.size());
  ::close(fd);
  locked_ = true;
}

void FileStore::load_index() {
  const fs::path index_path = dir_ / "index.idx";
  std::ifstream in(index_path, std::ios::binary);
  if (!in) return rebuild_index();

  std::uint64_t covered = 0;
  std::uint64_t end = 0;
  std::string line;
  while (std::getline(in, line)) {
    std::string_view view(line);
    auto tab1 = view.find('\t');
    auto tab2 = tab1 == std::string_view::npos ? tab1 : view.find('\t', tab1 + 1);
    Entry entry;
    if (tab2 == std::string_view::npos || !Oid::is_valid(view.substr(0, tab1)) ||
        !parse_number(view.substr(tab1 + 1, tab2 - tab1 - 1), entry.offset) ||
        !parse_number(view.substr(tab2 + 1), entry.length)) {
      return rebuild_index();
    }
    if (!index_.emplace(Oid(std::string(view.substr(0, tab1))), entry).second) return rebuild_index();
    covered += std::uint64_t{entry.length} + 1;
    end = std::max(end, entry.offset + entry.length + 1);
  }
  if (covered != log_size_ || end != log_size_) rebuild_index();
}

void FileStore::rebuild_index() {
  index_.clear();
  index_rebuilt_ = true;
  std::ifstream in(dir_ / "objects.log", std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + (dir_ / "objects.log").string());

  std::uint64_t offset = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (in.eof()) break;  // torn final line without its newline
    ObjectRecord record = parse_record(line, schema());
    Entry entry{offset, static_cast<std::uint32_t>(line.size()), class_id(record.class_name)};
    if (!index_.emplace(record.oid, entry).second) {
      throw Error(ErrorKind::Validation, "objects.log in " + dir_.string() + " repeats OID " + record.oid.str());
    }
    offset += line.size() + 1;
  }
  if (offset != log_size_ && mode_ == OpenMode::ReadWrite) {
    if (::ftruncate(fd_, static_cast<off_t>(offset)) != 0) io_failure("cannot truncate objects.log");
  }
  log_size_ = committed_size_ = flushed_size_ = offset;
  if (mode_ == OpenMode::ReadWrite) write_index();
}

void FileStore::write_index() const {
  write_file_atomic(dir_ / "index.idx", [&](std::ostream& out) {
    std::string line;
    for (const auto& [oid, entry] : index_) {
      line = oid.str();
      line += '\t';
      line += std::to_string(entry.offset);
      line += '\t';
      line += std::to_string(entry.length);
      line += '\n';
      out << line;
    }
  });
}

int FileStore::class_id(const std::string& name) const {
  auto it = std::find(class_names_.begin(), class_names_.end(), name);
  return it == class_names_.end() ? -1 : static_cast<int>(it - class_names_.begin());
}

void FileStore::require_writable() const {
  if (mode_ != OpenMode::ReadWrite) throw Error(ErrorKind::Usage, "store " + dir_.string() + " is open read-only");
  if (fd_ < 0) throw Error(ErrorKind::Usage, "store " + dir_.string() + " is closed");
}

void FileStore::flush_pending() const {
  std::size_t done = 0;
  while (done < buffer_.size()) {
    ssize_t n = ::pwrite(fd_, buffer_.data() + done, buffer_.size() - done,
                         static_cast<off_t>(flushed_size_ + done));
    if (n < 0) {
      if (errno == EINTR) continue;
      io_failure("cannot append to objects.log");
    }
    done += static_cast<std::size_t>(n);
  }
  flushed_size_ += buffer_.size();
  buffer_.clear();
}

std::string FileStore::read_line(const Entry& entry) const {
  if (entry.offset + entry.length > flushed_size_) flush_pending();
  std::string line(entry.length, '\0');
  std::size_t done = 0;
  while (done < line.size()) {
    ssize_t n = ::pread(fd_, line.data() + done, line.size() - done, static_cast<off_t>(entry.offset + done));
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) io_failure("cannot read objects.log");
    done += static_cast<std::size_t>(n);
  }
  return line;
}

void FileStore::put(const ObjectRecord& record) {
  require_writable();
  validate_record(schema(), record);
  if (index_.contains(record.oid)) throw Error(ErrorKind::DuplicateOid, "OID " + record.oid.str() + " already stored");

  std::size_t start = buffer_.size();
  render_record(buffer_, schema(), record);
  auto length = static_cast<std::uint32_t>(buffer_.size() - start);
  buffer_ += '\n';
  index_.emplace(record.oid, Entry{log_size_, length, class_id(record.class_name)});
  log_size_ += std::uint64_t{length} + 1;
  uncommitted_.push_back(record.oid);
  if (buffer_.size() >= kFlushThreshold) flush_pending();
}

std::optional<ObjectRecord> FileStore::get(const Oid& oid) const {
  auto it = index_.find(oid);
  if (it == index_.end()) return std::nullopt;
  return parse_record(read_line(it->second), schema());
}

std::optional<std::string> FileStore::class_of(const Oid& oid) const {
  auto it = index_.find(oid);
  if (it == index_.end()) return std::nullopt;
  const Entry& entry = it->second;
  if (entry.class_id < 0) {
    std::string line = read_line(entry);
    constexpr std::string_view prefix = "<o c=\"";
    auto close = line.find('"', prefix.size());
    std::string name = line.starts_with(prefix) && close != std::string::npos
                           ? line.substr(prefix.size(), close - prefix.size())
                           : parse_record(line, schema()).class_name;
    entry.class_id = class_id(name);
    if (entry.class_id < 0) return name;
  }
  return class_names_[static_cast<std::size_t>(entry.class_id)];
}

void FileStore::scan(const std::function<void(const ObjectRecord&)>& visit) const {
  flush_pending();
  for (const auto& [oid, entry] : index_) {
    RecordInFlight in_flight;
    ObjectRecord record = parse_record(read_line(entry), schema());
    visit(record);
  }
}

void FileStore::commit() {
  require_writable();
  flush_pending();
  if (::fsync(fd_) != 0) io_failure("cannot sync objects.log");
  write_index();
  committed_size_ = log_size_;
  uncommitted_.clear();
}

void FileStore::rollback() {
  if (mode_ != OpenMode::ReadWrite || fd_ < 0) return;
  buffer_.clear();
  if (log_size_ != committed_size_ || flushed_size_ != committed_size_) {
    if (::ftruncate(fd_, static_cast<off_t>(committed_size_)) != 0) io_failure("cannot truncate objects.log");
  }
  for (const Oid& oid : uncommitted_) index_.erase(oid);
  uncommitted_.clear();
  log_size_ = flushed_size_ = committed_size_;
}

void FileStore::close() {
  if (fd_ >= 0) {
    rollback();
    ::close(fd_);
    fd_ = -1;
  }
  if (locked_) {
    std::error_code ec;
    fs::remove(dir_ / "LOCK", ec);
    locked_ = false;
  }
}

}  // namespace transodb
