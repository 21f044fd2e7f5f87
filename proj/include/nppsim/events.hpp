#pragma once

#include <cstdint>
#include <string>

namespace nppsim {

// Lifecycle event kinds, in tiebreak rank order for the total ordering of
// the event log: (time, robot_id, kind rank).
enum class EventKind : std::uint8_t {
    ReadingTaken = 0,
    ThresholdExceeded = 1,
    ReportSent = 2,
    AckReceived = 3,
    BatteryLow = 4,
    DockArrive = 5,
    TrainDone = 6,
    WeightsUploaded = 7,
    GlobalModelInstalled = 8,
};

const char* event_kind_name(EventKind kind);

struct Event {
    double time_s = 0.0;
    std::uint32_t robot_id = 0;
    EventKind kind = EventKind::ReadingTaken;
    std::string detail;
};

}  // namespace nppsim
