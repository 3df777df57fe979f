#include "cms/world.hpp"

#include <algorithm>
#include <queue>
#include <string>

#include "cms/errors.hpp"

namespace cms {

void World::add_device(Device d) {
    const auto it = std::lower_bound(devices.begin(), devices.end(), d.id,
                                     [](const Device& a, DeviceId id) { return a.id < id; });
    const auto offset = static_cast<std::size_t>(it - devices.begin());
    devices.insert(it, std::move(d));
    cell_observations.emplace(cell_observations.begin() + offset);
    position_history.emplace(position_history.begin() + offset);
    link_durations.emplace(link_durations.begin() + offset);
}

bool World::contains(DeviceId id) const {
    const auto it = std::lower_bound(devices.begin(), devices.end(), id,
                                     [](const Device& a, DeviceId i) { return a.id < i; });
    return it != devices.end() && it->id == id;
}

std::size_t World::index_of(DeviceId id) const {
    const auto it = std::lower_bound(devices.begin(), devices.end(), id,
                                     [](const Device& a, DeviceId i) { return a.id < i; });
    if (it == devices.end() || it->id != id) {
        throw UnknownDevice("device id " + std::to_string(id) + " is not registered");
    }
    return static_cast<std::size_t>(it - devices.begin());
}

bool World::link_active(std::size_t i, std::size_t j) const {
    if (i == j) return false;
    const Device& a = devices[i];
    const Device& b = devices[j];
    return a.state == PowerState::Active && b.state == PowerState::Active && in_range(a, b);
}

std::vector<std::size_t> World::active_neighbors(std::size_t i) const {
    std::vector<std::size_t> out;
    const Device& d = devices[i];
    for (std::size_t j = 0; j < devices.size(); ++j) {
        if (j == i) continue;
        const Device& o = devices[j];
        if (o.state == PowerState::Active && in_range(d, o)) out.push_back(j);
    }
    return out;
}

std::vector<int> World::active_hops_from(DeviceId src) const {
    const std::size_t s = index_of(src);
    std::vector<int> hops(devices.size(), -1);
    if (devices[s].state != PowerState::Active) return hops;
    hops[s] = 0;
    std::queue<std::size_t> q;
    q.push(s);
    while (!q.empty()) {
        const std::size_t cur = q.front();
        q.pop();
        for (std::size_t j = 0; j < devices.size(); ++j) {
            if (hops[j] >= 0 || !link_active(cur, j)) continue;
            hops[j] = hops[cur] + 1;
            q.push(j);
        }
    }
    return hops;
}

} // namespace cms
