#include "bboe/spatial.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

namespace bboe {

GridIndex::GridIndex(const SystemSpec& spec, const Interval& bx,
                     const Interval& by, double cell_size)
    : bx_(bx), by_(by), cell_size_(cell_size), dim_(spec.state_dim),
      extra_angular_(spec.state_dim > 3 && spec.angular[3]),
      w_(spec.metric_weights) {
    assert(cell_size > 0.0);
    nx_ = std::max(1, static_cast<int>(std::ceil(bx.width() / cell_size)));
    ny_ = std::max(1, static_cast<int>(std::ceil(by.width() / cell_size)));
    cells_.resize(static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_));
}

int GridIndex::cell_x(double x) const {
    const int i = static_cast<int>(std::floor((x - bx_.lo) / cell_size_));
    return std::clamp(i, 0, nx_ - 1);
}

int GridIndex::cell_y(double y) const {
    const int i = static_cast<int>(std::floor((y - by_.lo) / cell_size_));
    return std::clamp(i, 0, ny_ - 1);
}

void GridIndex::insert(int id, const State& s) {
    Cell& c = cells_[static_cast<std::size_t>(cell_y(s[1])) *
                         static_cast<std::size_t>(nx_) +
                     static_cast<std::size_t>(cell_x(s[0]))];
    c.ids.push_back(id);
    c.xs.push_back(s[0]);
    c.ys.push_back(s[1]);
    c.hs.push_back(s[2]);
    if (dim_ > 3) c.es.push_back(s[3]);
    ++count_;
}

double GridIndex::metric_sq(const Cell& c, std::size_t k, const State& q) const {
    const double dx = c.xs[k] - q[0];
    const double dy = c.ys[k] - q[1];
    const double dh = wrap_angle(c.hs[k] - q[2]);
    double acc = w_[0] * dx * dx + w_[1] * dy * dy + w_[2] * dh * dh;
    if (dim_ > 3) {
        double de = c.es[k] - q[3];
        if (extra_angular_) de = wrap_angle(de);
        acc += w_[3] * de * de;
    }
    return acc;
}

double GridIndex::cell_lb_sq(const State& q, int ix, int iy) const {
    const double cx_lo = bx_.lo + ix * cell_size_;
    const double cy_lo = by_.lo + iy * cell_size_;
    double dx = 0.0;
    if (q[0] < cx_lo) dx = cx_lo - q[0];
    else if (q[0] > cx_lo + cell_size_) dx = q[0] - (cx_lo + cell_size_);
    double dy = 0.0;
    if (q[1] < cy_lo) dy = cy_lo - q[1];
    else if (q[1] > cy_lo + cell_size_) dy = q[1] - (cy_lo + cell_size_);
    return w_[0] * dx * dx + w_[1] * dy * dy;
}

GridIndex::Hit GridIndex::nearest(const State& q) const {
    assert(count_ > 0);
    const int qx = cell_x(q[0]);
    const int qy = cell_y(q[1]);
    double best_sq = std::numeric_limits<double>::infinity();
    int best_id = -1;
    const double wmin_pos = std::min(w_[0], w_[1]);
    const int max_ring = std::max(nx_, ny_);
    for (int ring = 0; ring <= max_ring; ++ring) {
        // Once even the closest possible point of this ring cannot beat the
        // incumbent, no farther ring can either.
        if (best_id >= 0 && ring >= 1) {
            const double reach = (ring - 1) * cell_size_;
            if (wmin_pos * reach * reach > best_sq) break;
        }
        const int x0 = qx - ring, x1 = qx + ring;
        const int y0 = qy - ring, y1 = qy + ring;
        for (int iy = std::max(0, y0); iy <= std::min(ny_ - 1, y1); ++iy) {
            const bool y_edge = (iy == y0 || iy == y1);
            for (int ix = std::max(0, x0); ix <= std::min(nx_ - 1, x1); ++ix) {
                if (!y_edge && ix != x0 && ix != x1) continue;
                if (cell_lb_sq(q, ix, iy) > best_sq) continue;
                const Cell& c = cells_[static_cast<std::size_t>(iy) *
                                           static_cast<std::size_t>(nx_) +
                                       static_cast<std::size_t>(ix)];
                for (std::size_t k = 0; k < c.ids.size(); ++k) {
                    const double d = metric_sq(c, k, q);
                    if (d < best_sq || (d == best_sq && c.ids[k] < best_id)) {
                        best_sq = d;
                        best_id = c.ids[k];
                    }
                }
            }
        }
    }
    return Hit{best_id, std::sqrt(best_sq)};
}

void GridIndex::radius(const State& q, double r, std::vector<Hit>& out) const {
    out.clear();
    if (count_ == 0 || r < 0.0) return;
    const double rx = w_[0] > 0.0 ? r / std::sqrt(w_[0]) : bx_.width();
    const double ry = w_[1] > 0.0 ? r / std::sqrt(w_[1]) : by_.width();
    const int x0 = std::max(0, cell_x(q[0] - rx));
    const int x1 = std::min(nx_ - 1, cell_x(q[0] + rx));
    const int y0 = std::max(0, cell_y(q[1] - ry));
    const int y1 = std::min(ny_ - 1, cell_y(q[1] + ry));
    const double r_sq = r * r;
    for (int iy = y0; iy <= y1; ++iy) {
        for (int ix = x0; ix <= x1; ++ix) {
            if (cell_lb_sq(q, ix, iy) > r_sq) continue;
            const Cell& c = cells_[static_cast<std::size_t>(iy) *
                                       static_cast<std::size_t>(nx_) +
                                   static_cast<std::size_t>(ix)];
            for (std::size_t k = 0; k < c.ids.size(); ++k) {
                const double d = metric_sq(c, k, q);
                if (d <= r_sq) out.push_back(Hit{c.ids[k], std::sqrt(d)});
            }
        }
    }
}

}  // namespace bboe
