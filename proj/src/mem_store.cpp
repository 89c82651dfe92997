#include "transodb/error.hpp"
#include "transodb/instrumentation.hpp"
#include "transodb/store.hpp"

namespace transodb {

void MemStore::put(const ObjectRecord& record) {
  validate_record(schema(), record);
  auto [it, inserted] = records_.try_emplace(record.oid, record);
  if (!inserted) throw Error(ErrorKind::DuplicateOid, "OID " + record.oid.str() + " already stored");
  uncommitted_.push_back(record.oid);
}

std::optional<ObjectRecord> MemStore::get(const Oid& oid) const {
  auto it = records_.find(oid);
  if (it == records_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::string> MemStore::class_of(const Oid& oid) const {
  auto it = records_.find(oid);
  if (it == records_.end()) return std::nullopt;
  return it->second.class_name;
}

void MemStore::scan(const std::function<void(const ObjectRecord&)>& visit) const {
  for (const auto& [oid, record] : records_) {
    RecordInFlight in_flight;
    visit(record);
  }
}

void MemStore::rollback() {
  for (const Oid& oid : uncommitted_) records_.erase(oid);
  uncommitted_.clear();
}

}  // namespace transodb
