#include "transodb/instrumentation.hpp"

#include <algorithm>

namespace transodb {

namespace {
thread_local Instrumentation counters;
thread_local int operation_depth = 0;
}  // namespace

Instrumentation& instrumentation() { return counters; }

void reset_instrumentation() { counters = Instrumentation{}; }

RecordInFlight::RecordInFlight() {
  ++counters.records_in_flight;
  counters.max_records_in_flight = std::max(counters.max_records_in_flight, counters.records_in_flight);
}

RecordInFlight::~RecordInFlight() { --counters.records_in_flight; }

InstrumentedOperation::InstrumentedOperation() {
  if (operation_depth++ == 0) reset_instrumentation();
}

InstrumentedOperation::~InstrumentedOperation() { --operation_depth; }

void note_pending_oids(std::size_t count) {
  counters.pending_oids = count;
  counters.max_pending_oids = std::max(counters.max_pending_oids, count);
}

}  // namespace transodb
