#pragma once

#include <cstddef>

namespace transodb {

/// Per-thread counters used to check the streaming memory bounds of the codec
/// and store paths. Reset when an outermost instrumented operation starts.
struct Instrumentation {
  std::size_t records_in_flight = 0;
  std::size_t max_records_in_flight = 0;
  std::size_t pending_oids = 0;
  std::size_t max_pending_oids = 0;
};

Instrumentation& instrumentation();
void reset_instrumentation();

/// Marks one decoded/streamed record as materialized for its lifetime.
class RecordInFlight {
 public:
  RecordInFlight();
  ~RecordInFlight();
  RecordInFlight(const RecordInFlight&) = delete;
  RecordInFlight& operator=(const RecordInFlight&) = delete;
};

/// Resets the counters when no other scope is active on this thread.
class InstrumentedOperation {
 public:
  InstrumentedOperation();
  ~InstrumentedOperation();
  InstrumentedOperation(const InstrumentedOperation&) = delete;
  InstrumentedOperation& operator=(const InstrumentedOperation&) = delete;
};

void note_pending_oids(std::size_t count);

}  // namespace transodb
