#include "nppsim/events.hpp"

namespace nppsim {

const char* event_kind_name(EventKind kind) {
    switch (kind) {
        case EventKind::ReadingTaken: return "ReadingTaken";
        case EventKind::ThresholdExceeded: return "ThresholdExceeded";
        case EventKind::ReportSent: return "ReportSent";
        case EventKind::AckReceived: return "AckReceived";
        case EventKind::BatteryLow: return "BatteryLow";
        case EventKind::DockArrive: return "DockArrive";
        case EventKind::TrainDone: return "TrainDone";
        case EventKind::WeightsUploaded: return "WeightsUploaded";
        case EventKind::GlobalModelInstalled: return "GlobalModelInstalled";
    }
    return "?";
}

}  // namespace nppsim
