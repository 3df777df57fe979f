#ifndef CMS_DEVICE_HPP
#define CMS_DEVICE_HPP

#include <cstdint>
#include <string>

#include "cms/geometry.hpp"
#include "cms/mobility.hpp"

namespace cms {

// Cloud-assigned identifier; ids are totally ordered so every tie-break in
// the simulator is deterministic. 0 is never assigned.
using DeviceId = std::uint32_t;
inline constexpr DeviceId kInvalidDevice = 0;

enum class PowerState { Sleeping, Ready, Active };

const char* to_string(PowerState s);

struct Device {
    DeviceId id = kInvalidDevice;
    Position pos;
    Velocity vel;
    PowerState state = PowerState::Active;
    double range = 0.0;       // radio range in meters, fixed for the device's lifetime
    bool has_uplink = false;  // cellular/Wi-Fi internet uplink
    std::string hw_key;       // opaque registration key
    double last_traffic = 0.0; // last time the device originated or relayed
};

struct DutySchedule {
    double sleep_period = 10.0; // seconds between wake-ups
    double probe_window = 1.0;  // seconds spent probing per period
    double idle_timeout = 5.0;  // seconds of silence before an Active device sleeps
};

// One duty-cycle decision. Legal transitions: Sleeping->Ready,
// Ready->Active, Ready->Sleeping, Active->Sleeping; anything else keeps the
// current state.
//   - a Sleeping device wakes into Ready while `now` falls in the probe window;
//   - a Ready device goes Active when the probe detected a neighbor, and back
//     to Sleeping once the window has passed;
//   - an Active device drops to Sleeping after idle_timeout without traffic.
PowerState tick_power_state(const Device& d, const DutySchedule& sched, double now,
                            bool neighbor_present);

// Symmetric link rule: devices hear each other iff their distance does not
// exceed the smaller of the two ranges (boundary inclusive).
bool in_range(const Device& a, const Device& b);

} // namespace cms

#endif
