#pragma once

#include <vector>

#include "bboe/dynamics.hpp"
#include "bboe/types.hpp"

namespace bboe {

/// Uniform grid over workspace position for exact nearest-neighbor and
/// radius queries under the full weighted state metric. The position terms
/// lower-bound the metric (angular terms only add), so ring expansion over
/// cells with positional bounds is exact. Ties are broken toward the lower
/// node id, matching a linear scan in insertion order.
class GridIndex {
public:
    struct Hit {
        int id = -1;
        double dist = 0.0;
    };

    GridIndex(const SystemSpec& spec, const Interval& bx, const Interval& by,
              double cell_size = 1.0);

    void insert(int id, const State& s);
    int size() const { return count_; }

    /// Exact nearest under the full metric; requires size() > 0.
    Hit nearest(const State& q) const;

    /// All entries with metric distance <= r (inclusive), in deterministic
    /// cell-scan order. out is cleared first.
    void radius(const State& q, double r, std::vector<Hit>& out) const;

private:
    struct Cell {
        std::vector<int> ids;
        std::vector<double> xs, ys, hs, es;
    };

    int cell_x(double x) const;
    int cell_y(double y) const;
    double metric_sq(const Cell& c, std::size_t k, const State& q) const;
    // Squared positional lower bound from q to cell (ix, iy).
    double cell_lb_sq(const State& q, int ix, int iy) const;

    Interval bx_, by_;
    double cell_size_;
    int nx_ = 0, ny_ = 0;
    int dim_ = 3;
    bool extra_angular_ = false;
    std::array<double, kMaxDim> w_{};
    std::vector<Cell> cells_;
    int count_ = 0;
};

}  // namespace bboe
