#include "cms/device.hpp"

#include <cmath>

namespace cms {

const char* to_string(PowerState s) {
    switch (s) {
    case PowerState::Sleeping: return "sleeping";
    case PowerState::Ready: return "ready";
    case PowerState::Active: return "active";
    }
    return "?";
}

PowerState tick_power_state(const Device& d, const DutySchedule& sched, double now,
                            bool neighbor_present) {
    const double phase = std::fmod(now, sched.sleep_period);
    switch (d.state) {
    case PowerState::Sleeping:
        return phase < sched.probe_window ? PowerState::Ready : PowerState::Sleeping;
    case PowerState::Ready:
        if (neighbor_present) return PowerState::Active;
        return phase >= sched.probe_window ? PowerState::Sleeping : PowerState::Ready;
    case PowerState::Active:
        return (now - d.last_traffic) > sched.idle_timeout ? PowerState::Sleeping
                                                           : PowerState::Active;
    }
    return d.state;
}

bool in_range(const Device& a, const Device& b) {
    return distance(a.pos, b.pos) <= std::min(a.range, b.range);
}

} // namespace cms
