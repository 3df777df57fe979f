#ifndef CMS_MOBILITY_HPP
#define CMS_MOBILITY_HPP

#include <algorithm>
#include <cmath>

#include "cms/geometry.hpp"

namespace cms {

struct Velocity {
    double vx = 0.0;
    double vy = 0.0;

    double speed() const { return std::sqrt(vx * vx + vy * vy); }
};

struct GaussMarkovParams {
    double alpha = 0.75;          // memory, in [0, 1]
    double mean_speed = 5.0;      // m/s
    double mean_direction = 0.0;  // radians
    double noise_std = 1.5;       // m/s per component
    double v_max = 20.0;          // hard speed cap, m/s
};

// The L1 -> L2 waypoint pair plus the fixed diagonal offsets.
struct WaypointState {
    Position current;  // L1
    Position target;   // L2
    double delta_x = 0.0;
    double delta_y = 0.0;
};

template <typename T>
concept UniformRng = requires(T r, double lo, double hi) {
    { r.uniform(lo, hi) } -> std::convertible_to<double>;
};

template <typename T>
concept GaussianRng = requires(T r) {
    { r.gaussian() } -> std::convertible_to<double>;
};

// One diagonal-waypoint location update: draws a point of the L1->L2
// bounding box (the diagonal region of the triangle spanned by the two
// waypoints) and offsets it by (delta_x, delta_y) up or down from the
// diagonal. The result is clamped into the grid region.
template <UniformRng R>
Position diagonal_waypoint_step(const WaypointState& w, bool above, const CellGrid& region,
                                R& rng) {
    const double d = distance(w.current, w.target);
    double x = w.current.x;
    double y = w.current.y;
    if (d > 0.0) {
        const double x_lo = std::min(w.current.x, w.target.x);
        const double x_hi = std::max(w.current.x, w.target.x);
        const double y_lo = std::min(w.current.y, w.target.y);
        const double y_hi = std::max(w.current.y, w.target.y);
        x = rng.uniform(x_lo, x_hi);
        y = rng.uniform(y_lo, y_hi);
    }
    if (above) {
        x += w.delta_x;
        y += w.delta_y;
    } else {
        x -= w.delta_x;
        y -= w.delta_y;
    }
    return region.clamp({x, y, w.current.z});
}

// True when p lies strictly above the a->b line (positive cross product);
// decides the offset direction of the next waypoint step.
inline bool above_diagonal(const Position& p, const Position& a, const Position& b) {
    const double cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
    return cross > 0.0;
}

// One Gauss-Markov velocity update:
//   v' = alpha*v + (1-alpha)*mean + sqrt(1-alpha^2)*noise   (per component)
// rescaled onto the v_max circle when it exceeds the cap.
template <GaussianRng R>
Velocity gauss_markov_step(const Velocity& v, const GaussMarkovParams& p, double dt, R& rng) {
    (void)dt; // the update is per step; dt scales displacement, not velocity
    const double mean_vx = p.mean_speed * std::cos(p.mean_direction);
    const double mean_vy = p.mean_speed * std::sin(p.mean_direction);
    const double memory = p.alpha;
    const double pull = 1.0 - p.alpha;
    const double diffuse = std::sqrt(std::max(0.0, 1.0 - p.alpha * p.alpha));
    Velocity out;
    out.vx = memory * v.vx + pull * mean_vx + diffuse * p.noise_std * rng.gaussian();
    out.vy = memory * v.vy + pull * mean_vy + diffuse * p.noise_std * rng.gaussian();
    const double s = out.speed();
    if (s > p.v_max) {
        const double k = p.v_max / s;
        out.vx *= k;
        out.vy *= k;
    }
    return out;
}

} // namespace cms

#endif
