#ifndef CMS_GEOMETRY_HPP
#define CMS_GEOMETRY_HPP

#include <cstddef>
#include <vector>

namespace cms {

// Continuous coordinates in meters. Discovery operates on the x-y plane;
// z is carried for completeness and ignored by the cell grid.
struct Position {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

double distance(const Position& a, const Position& b);

struct CellIndex {
    int col = 0;
    int row = 0;

    friend bool operator==(const CellIndex&, const CellIndex&) = default;
    friend auto operator<=>(const CellIndex&, const CellIndex&) = default;
};

// Fixed-area cell partition of the rectangular simulation region.
// The region is half-open: [origin.x, origin.x + cols*cell_size) x
// [origin.y, origin.y + rows*cell_size), so every in-region point maps to
// exactly one cell.
struct CellGrid {
    Position origin;
    double cell_size = 1.0;
    int cols = 1;
    int rows = 1;

    int cell_count() const { return cols * rows; }
    double width() const { return cols * cell_size; }
    double height() const { return rows * cell_size; }

    bool contains(const Position& p) const;
    bool contains(const CellIndex& c) const {
        return c.col >= 0 && c.col < cols && c.row >= 0 && c.row < rows;
    }

    // Row-major flat index of a cell, the state number used by the
    // transition matrix and the Viterbi decoder.
    int flatten(const CellIndex& c) const { return c.row * cols + c.col; }
    CellIndex unflatten(int state) const { return {state % cols, state / cols}; }

    Position cell_center(const CellIndex& c) const {
        return {origin.x + (c.col + 0.5) * cell_size, origin.y + (c.row + 0.5) * cell_size, 0.0};
    }

    // Clamps a point into the (closed approximation of the) region.
    Position clamp(const Position& p) const;
};

// Maps an in-region point to its cell. Throws OutOfRegion otherwise.
CellIndex cell_of(const Position& p, const CellGrid& g);

// Von-Neumann neighbors (up/down/left/right) that exist inside the grid,
// sorted by flat index. Never contains the cell itself; no diagonals.
std::vector<CellIndex> neighbors(const CellIndex& c, const CellGrid& g);

int manhattan(const CellIndex& a, const CellIndex& b);

// Row-stochastic matrix over grid cells. Entries are zero except on the
// diagonal and between von-Neumann neighbor cells.
struct TransitionMatrix {
    int n = 0;
    std::vector<double> p; // n*n, row-major

    double at(int i, int j) const { return p[static_cast<std::size_t>(i) * n + j]; }
    double& at(int i, int j) { return p[static_cast<std::size_t>(i) * n + j]; }
};

// Row i carries self_weight on i and splits the remaining mass equally among
// the existing neighbors of i. Cells without neighbors keep all mass on
// themselves, so every row sums to one by construction.
TransitionMatrix build_transition_matrix(const CellGrid& g, double self_weight);

} // namespace cms

#endif
