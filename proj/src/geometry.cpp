#include "varsample/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace varsample::geometry {

Box::Box(Eigen::VectorXd lo_, Eigen::VectorXd hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
    if (lo.size() != hi.size() || lo.size() == 0) throw std::invalid_argument("bad box bounds");
    if ((hi.array() < lo.array()).any()) throw std::invalid_argument("box with hi < lo");
}

int Box::longest_axis() const {
    int axis = 0;
    double best = hi[0] - lo[0];
    for (int v = 1; v < dim(); ++v) {
        double s = hi[v] - lo[v];
        if (s > best) {
            best = s;
            axis = v;
        }
    }
    return axis;
}

bool Box::contains(const Eigen::VectorXd& p) const {
    return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all();
}

double Box::min_sq_dist(const Eigen::VectorXd& p) const {
    double acc = 0.0;
    for (int v = 0; v < dim(); ++v) {
        double d = std::max({lo[v] - p[v], p[v] - hi[v], 0.0});
        acc += d * d;
    }
    return acc;
}

double Box::max_sq_dist(const Eigen::VectorXd& p) const {
    // the farthest point of a box from p is a corner
    double acc = 0.0;
    for (int v = 0; v < dim(); ++v) {
        double d = std::max(std::abs(lo[v] - p[v]), std::abs(hi[v] - p[v]));
        acc += d * d;
    }
    return acc;
}

std::vector<Box> split_box(const Box& b) {
    int axis = b.longest_axis();
    double mid = 0.5 * (b.lo[axis] + b.hi[axis]);
    Box left = b, right = b;
    left.hi[axis] = mid;
    right.lo[axis] = mid;
    return {left, right};
}

CoveredRegions::CoveredRegions(const Box& root, double cell_hint) : root_(root) {
    const int n = root.dim();
    cells_per_axis_.resize(n);
    cell_size_.resize(n);
    // keep the whole grid at or below ~2^18 cells
    const double max_total = 262144.0;
    const int per_axis_cap = std::max(1, static_cast<int>(std::floor(
                                             std::pow(max_total, 1.0 / n))));
    for (int v = 0; v < n; ++v) {
        double side = root.hi[v] - root.lo[v];
        int cells = 1;
        if (cell_hint > 0.0 && side > 0.0)
            cells = std::clamp(static_cast<int>(std::ceil(side / cell_hint)), 1, per_axis_cap);
        cells_per_axis_[v] = cells;
        cell_size_[v] = side > 0.0 ? side / cells : 1.0;
    }
    std::size_t total = 1;
    for (int v = 0; v < n; ++v) total *= static_cast<std::size_t>(cells_per_axis_[v]);
    cell_balls_.assign(total, {});
    use_grid_ = total > 1;
}

std::vector<std::size_t> CoveredRegions::cells_of(const Eigen::VectorXd& lo,
                                                  const Eigen::VectorXd& hi) const {
    const int n = root_.dim();
    std::vector<int> first(n), last(n);
    for (int v = 0; v < n; ++v) {
        double a = std::max(lo[v], root_.lo[v]);
        double b = std::min(hi[v], root_.hi[v]);
        if (a > b) return {};  // no overlap with the root region
        int f = static_cast<int>(std::floor((a - root_.lo[v]) / cell_size_[v]));
        int l = static_cast<int>(std::floor((b - root_.lo[v]) / cell_size_[v]));
        first[v] = std::clamp(f, 0, cells_per_axis_[v] - 1);
        last[v] = std::clamp(l, 0, cells_per_axis_[v] - 1);
    }
    std::vector<std::size_t> out;
    std::vector<int> idx = first;
    for (;;) {
        std::size_t flat = 0;
        for (int v = 0; v < n; ++v) flat = flat * cells_per_axis_[v] + idx[v];
        out.push_back(flat);
        int v = n - 1;
        while (v >= 0) {
            if (++idx[v] <= last[v]) break;
            idx[v] = first[v];
            --v;
        }
        if (v < 0) break;
    }
    return out;
}

void CoveredRegions::insert(Ball b) {
    const auto id = static_cast<std::uint32_t>(balls_.size());
    if (use_grid_) {
        Eigen::VectorXd lo = (b.center.array() - b.radius).matrix();
        Eigen::VectorXd hi = (b.center.array() + b.radius).matrix();
        for (std::size_t c : cells_of(lo, hi)) cell_balls_[c].push_back(id);
    }
    balls_.push_back(std::move(b));
    visit_stamp_.push_back(0);
}

template <typename Pred>
const Ball* CoveredRegions::scan_cells(const Box& b, Pred&& pred) const {
    if (!use_grid_) {
        for (const Ball& ball : balls_)
            if (pred(ball)) return &ball;
        return nullptr;
    }
    ++stamp_;
    for (std::size_t c : cells_of(b.lo, b.hi)) {
        for (std::uint32_t id : cell_balls_[c]) {
            if (visit_stamp_[id] == stamp_) continue;
            visit_stamp_[id] = stamp_;
            if (pred(balls_[id])) return &balls_[id];
        }
    }
    return nullptr;
}

bool CoveredRegions::intersects_any(const Box& b) const {
    return scan_cells(b, [&](const Ball& ball) { return ball.intersects(b); }) != nullptr;
}

std::optional<Ball> CoveredRegions::containing(const Box& b) const {
    const Ball* found = scan_cells(b, [&](const Ball& ball) { return ball.contains(b); });
    if (found) return *found;
    return std::nullopt;
}

bool CoveredRegions::intersects_any_brute(const Box& b) const {
    return std::any_of(balls_.begin(), balls_.end(),
                       [&](const Ball& ball) { return ball.intersects(b); });
}

std::optional<Ball> CoveredRegions::containing_brute(const Box& b) const {
    for (const Ball& ball : balls_)
        if (ball.contains(b)) return ball;
    return std::nullopt;
}

std::vector<Box> split_box_dynamic(const Box& b, const CoveredRegions& regions) {
    const int n = b.dim();
    const double sqrt_n = std::sqrt(static_cast<double>(n));

    // inscribed boxes of stored balls, clipped to b
    struct Clip {
        Eigen::VectorXd lo, hi;
        Eigen::VectorXd axis_len;
        double base_vol = 0.0;
    };
    std::vector<Clip> clips;
    for (const Ball& ball : regions.balls()) {
        if (!ball.intersects(b)) continue;
        double half = ball.radius / sqrt_n;
        Clip c;
        c.lo = (ball.center.array() - half).max(b.lo.array()).matrix();
        c.hi = (ball.center.array() + half).min(b.hi.array()).matrix();
        clips.push_back(std::move(c));
    }
    if (clips.empty()) return split_box(b);
    for (auto& c : clips) {
        c.axis_len = c.hi - c.lo;
        bool empty = false;
        double vol = 1.0;
        for (int v = 0; v < n; ++v) {
            if (c.axis_len[v] <= 0.0) empty = true;
            vol *= std::max(c.axis_len[v], 0.0);
        }
        c.base_vol = empty ? 0.0 : vol;
    }

    double best_score = -1.0;
    int best_axis = -1;
    double best_cut = 0.0;
    for (int v = 0; v < n; ++v) {
        double side = b.hi[v] - b.lo[v];
        if (side <= 0.0) continue;
        for (int i = 1; i <= 8; ++i) {
            double cut = b.lo[v] + side * (static_cast<double>(i) / 9.0);
            for (const Clip& c : clips) {
                if (c.base_vol <= 0.0) continue;
                double lo_len = std::clamp(cut, c.lo[v], c.hi[v]) - c.lo[v];
                double hi_len = c.hi[v] - std::clamp(cut, c.lo[v], c.hi[v]);
                double per_axis = c.base_vol / c.axis_len[v];
                double score = per_axis * std::max(lo_len, hi_len);
                if (score > best_score) {
                    best_score = score;
                    best_axis = v;
                    best_cut = cut;
                }
            }
        }
    }
    if (best_axis < 0) return split_box(b);

    Box left = b, right = b;
    left.hi[best_axis] = best_cut;
    right.lo[best_axis] = best_cut;
    return {left, right};
}

BoxTree::BoxTree(Box root) {
    Node n;
    n.box = std::move(root);
    nodes_.push_back(std::move(n));
}

std::vector<std::size_t> BoxTree::expand(std::size_t id, std::vector<Box> children) {
    std::vector<std::size_t> out;
    out.reserve(children.size());
    for (Box& c : children) {
        Node n;
        n.box = std::move(c);
        n.depth = nodes_[id].depth + 1;
        n.creation_index = next_creation_++;
        n.parent = static_cast<std::int64_t>(id);
        out.push_back(nodes_.size());
        nodes_.push_back(std::move(n));
    }
    nodes_[id].expanded = true;
    nodes_[id].children = out;
    return out;
}

std::size_t BoxTree::adopt(Box b, int depth, std::uint64_t creation_index) {
    Node n;
    n.box = std::move(b);
    n.depth = depth;
    n.creation_index = creation_index;
    next_creation_ = std::max(next_creation_, creation_index + 1);
    nodes_.push_back(std::move(n));
    return nodes_.size() - 1;
}

}  // namespace varsample::geometry
