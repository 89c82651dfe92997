#include <algorithm>
#include <istream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "transodb/error.hpp"
#include "transodb/instrumentation.hpp"
#include "transodb/store.hpp"

namespace transodb {

namespace {

// References whose target was not yet stored when they were seen.
struct PendingRef {
  std::string first_referrer;  // "oid.field"
  std::set<std::string> required_classes;
};

/// Puts records one at a time and keeps only the unresolved reference set.
class ImportSession {
 public:
  ImportSession(ObjectStore& store, const Schema& schema) : store_(store), schema_(schema) {
    if (!store.schema().same_classes(schema)) {
      throw Error(ErrorKind::ModelMismatch, "store is bound to a different class model");
    }
  }

  void accept(const ObjectRecord& record) {
    store_.put(record);
    ++stored_;

    if (auto it = pending_.find(record.oid.str()); it != pending_.end()) {
      for (const std::string& required : it->second.required_classes) {
        check_type(it->second.first_referrer, record.oid, record.class_name, required);
      }
      pending_.erase(it);
    }

    const ClassLayout& layout = schema_.layout(record.class_name);
    for_each_ref(record, [&](const std::string& field, const Oid& target) {
      const std::string& declared = *layout.fields[*layout.index_of(field)].kind.ref_target();
      std::string referrer = record.oid.str() + "." + field;
      if (auto cls = store_.class_of(target)) {
        check_type(referrer, target, *cls, declared);
        return;
      }
      auto [it, inserted] = pending_.try_emplace(target.str());
      if (inserted) it->second.first_referrer = std::move(referrer);
      it->second.required_classes.insert(declared);
    });
    note_pending_oids(pending_.size());
  }

  std::size_t finish() {
    std::vector<std::string> dangling;
    for (const auto& [oid, ref] : pending_) dangling.push_back(ref.first_referrer + " -> " + oid);
    std::sort(dangling.begin(), dangling.end());
    if (!dangling.empty()) {
      fail(ErrorKind::DanglingRef, std::to_string(dangling.size()) + " unresolved reference(s)", dangling);
    }
    if (!mismatches_.empty()) {
      fail(ErrorKind::RefTypeMismatch, std::to_string(mismatches_.size()) + " reference(s) to the wrong class",
           mismatches_);
    }
    store_.commit();
    return stored_;
  }

  void abort() noexcept {
    try {
      store_.rollback();
    } catch (...) {
    }
  }

 private:
  void check_type(const std::string& referrer, const Oid& target, const std::string& actual,
                  const std::string& declared) {
    if (!schema_.has_class(actual) || !schema_.is_subtype(actual, declared)) {
      mismatches_.push_back(referrer + " -> " + target.str() + " has class " + actual + ", expected " + declared);
    }
  }

  [[noreturn]] static void fail(ErrorKind kind, std::string message, const std::vector<std::string>& items) {
    constexpr std::size_t kShown = 10;
    for (std::size_t i = 0; i < items.size() && i < kShown; ++i) message += (i == 0 ? ": " : "; ") + items[i];
    if (items.size() > kShown) message += "; ...";
    throw Error(kind, message);
  }

  ObjectStore& store_;
  const Schema& schema_;
  std::unordered_map<std::string, PendingRef> pending_;
  std::vector<std::string> mismatches_;
  std::size_t stored_ = 0;
};

template <typename Source>
std::size_t import_from(Source&& document, const Schema& schema, ObjectStore& store) {
  InstrumentedOperation op;
  ImportSession session(store, schema);
  try {
    read_canonical(document, schema, [&](ObjectRecord&& record) { session.accept(record); });
    return session.finish();
  } catch (...) {
    session.abort();
    throw;
  }
}

}  // namespace

std::size_t import_document(std::istream& document, const Schema& schema, ObjectStore& store) {
  return import_from(document, schema, store);
}

std::size_t import_document(std::string_view document, const Schema& schema, ObjectStore& store) {
  return import_from(document, schema, store);
}

void export_store(const ObjectStore& store, std::ostream& out) {
  InstrumentedOperation op;
  CanonicalWriter writer(out, store.schema());
  store.scan([&](const ObjectRecord& record) { writer.write(record); });
  writer.finish();
}

std::string export_store(const ObjectStore& store) {
  std::ostringstream out;
  export_store(store, out);
  return std::move(out).str();
}

std::size_t migrate(const ObjectStore& src, ObjectStore& dst, const Schema& schema) {
  if (&src == &dst) throw Error(ErrorKind::Usage, "source and destination are the same store");
  if (!src.schema().same_classes(schema)) {
    throw Error(ErrorKind::ModelMismatch, "source store is bound to a different class model");
  }
  InstrumentedOperation op;
  ImportSession session(dst, schema);
  try {
    src.scan([&](const ObjectRecord& record) { session.accept(record); });
    return session.finish();
  } catch (...) {
    session.abort();
    throw;
  }
}

}  // namespace transodb
