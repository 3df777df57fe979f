#include "cms/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cms/errors.hpp"

namespace cms {

double distance(const Position& a, const Position& b) {
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    const double dz = b.z - a.z;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

bool CellGrid::contains(const Position& p) const {
    return p.x >= origin.x && p.x < origin.x + width() && p.y >= origin.y &&
           p.y < origin.y + height();
}

Position CellGrid::clamp(const Position& p) const {
    // Pull the upper edge just inside the half-open region so a clamped
    // point always maps to a cell.
    const double eps = 1e-9 * cell_size;
    Position out = p;
    out.x = std::min(std::max(p.x, origin.x), origin.x + width() - eps);
    out.y = std::min(std::max(p.y, origin.y), origin.y + height() - eps);
    return out;
}

CellIndex cell_of(const Position& p, const CellGrid& g) {
    if (!g.contains(p)) {
        throw OutOfRegion("point (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                          ") outside grid region");
    }
    int col = static_cast<int>(std::floor((p.x - g.origin.x) / g.cell_size));
    int row = static_cast<int>(std::floor((p.y - g.origin.y) / g.cell_size));
    // contains() is authoritative; guard against division rounding at the edges.
    col = std::clamp(col, 0, g.cols - 1);
    row = std::clamp(row, 0, g.rows - 1);
    return {col, row};
}

std::vector<CellIndex> neighbors(const CellIndex& c, const CellGrid& g) {
    std::vector<CellIndex> out;
    out.reserve(4);
    // Emitted in row-major flat-index order: down, left, right, up.
    if (c.row > 0) out.push_back({c.col, c.row - 1});
    if (c.col > 0) out.push_back({c.col - 1, c.row});
    if (c.col + 1 < g.cols) out.push_back({c.col + 1, c.row});
    if (c.row + 1 < g.rows) out.push_back({c.col, c.row + 1});
    return out;
}

int manhattan(const CellIndex& a, const CellIndex& b) {
    return std::abs(a.col - b.col) + std::abs(a.row - b.row);
}

TransitionMatrix build_transition_matrix(const CellGrid& g, double self_weight) {
    const int n = g.cell_count();
    TransitionMatrix tm;
    tm.n = n;
    tm.p.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        const auto nbrs = neighbors(g.unflatten(i), g);
        if (nbrs.empty()) {
            tm.at(i, i) = 1.0;
            continue;
        }
        tm.at(i, i) = self_weight;
        const double share = (1.0 - self_weight) / static_cast<double>(nbrs.size());
        for (const auto& nb : nbrs) {
            tm.at(i, g.flatten(nb)) = share;
        }
    }
    return tm;
}

} // namespace cms
