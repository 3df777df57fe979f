#ifndef CMS_TRANSPORT_HPP
#define CMS_TRANSPORT_HPP

#include <deque>
#include <span>
#include <vector>

#include "cms/config.hpp"
#include "cms/world.hpp"

namespace cms {

// Probabilities of the four movement directions, summing to 1.
struct DirectionDistribution {
    double up = 0.25;
    double down = 0.25;
    double left = 0.25;
    double right = 0.25;
};

enum class MoveDirection { Up, Down, Left, Right, None };

// Dominant axis direction of the displacement accumulated over the last
// `window` recorded positions; None when (effectively) stationary or when
// the history is too short to tell.
MoveDirection dominant_direction(const std::deque<Position>& history, int window);

// Classifies every moving device's dominant direction over the window and
// normalizes the counts. All-stationary worlds yield the uniform
// distribution.
DirectionDistribution direction_probabilities(const World& world, int window);

// Shannon entropy -sum p_i log2 p_i in bits, with 0 log 0 = 0. Bounded by
// log2(4) = 2.
double entropy_per_symbol(const DirectionDistribution& d);

struct TransportParams {
    double symbol_rate = 1.0;    // symbols per second
    double bits_per_meter = 1.0; // calibration of the bits/s -> m/s step
    double v_max = 20.0;
    int window = 4; // ticks of position history per direction estimate
};

// The per-device velocity pipeline: direction probabilities over each
// device's own radio neighborhood, entropy per symbol, transmission
// t * symbol_rate * H bits/s, and velocity capped at v_max. One output per
// device, in id order. Throws EmptyWorld when there are no devices.
std::vector<double> compute_velocities(const World& world, double t,
                                       const TransportParams& params = {});

struct ThroughputSample {
    int device_count = 0;
    double speed = 0.0; // m/s, the per-table mobility speed
    double t = 0.0;     // offered-load multiplier, the tables' column variable
    double value = 0.0; // delivered megabits per simulated second
};

// Runs one scenario per (count, speed, t) cell and measures payload bits
// successfully relayed through the cloud path per simulated second. Cells
// get seeds derived from the base config's seed and may run in parallel
// (`jobs` worker threads; <= 0 picks the hardware concurrency).
// Throws EmptyScenario when a device count is zero.
std::vector<ThroughputSample> measure_throughput(const ScenarioConfig& base,
                                                 std::span<const int> device_counts,
                                                 std::span<const double> speeds,
                                                 std::span<const double> t_grid, int jobs = 1);

inline const std::vector<double>& default_t_grid() {
    static const std::vector<double> grid{0.1, 0.2, 0.4, 0.6, 0.8, 1.0};
    return grid;
}

} // namespace cms

#endif
