#ifndef CMS_WORLD_HPP
#define CMS_WORLD_HPP

#include <cstddef>
#include <deque>
#include <vector>

#include "cms/device.hpp"
#include "cms/geometry.hpp"

namespace cms {

// Mutable simulation state shared by discovery, the cloud store and the
// engine. Devices are kept sorted by id; the parallel per-device vectors
// below are indexed like `devices`.
struct World {
    CellGrid grid;
    std::vector<Device> devices;
    double now = 0.0;

    // Noisy cell reports, newest last, capped at the observation window.
    std::vector<std::deque<CellIndex>> cell_observations;
    // Recent positions, newest last, for direction classification.
    std::vector<std::deque<Position>> position_history;
    // Completed link-up interval durations in seconds, newest last.
    std::vector<std::vector<double>> link_durations;

    void add_device(Device d);

    bool contains(DeviceId id) const;
    std::size_t index_of(DeviceId id) const; // throws UnknownDevice
    const Device& device(DeviceId id) const { return devices[index_of(id)]; }
    Device& device(DeviceId id) { return devices[index_of(id)]; }

    bool link_active(std::size_t i, std::size_t j) const;

    // Indices of Active devices within symmetric radio range of device i
    // (itself Active or not), ascending.
    std::vector<std::size_t> active_neighbors(std::size_t i) const;

    // Hop counts from src over the Active in-range graph; -1 = unreachable.
    // src itself gets 0 when Active, -1 otherwise.
    std::vector<int> active_hops_from(DeviceId src) const;
};

} // namespace cms

#endif
