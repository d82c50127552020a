#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace varsample::geometry {

// Axis-aligned box [lo1,hi1] x ... x [loN,hiN], closed, nonempty.
struct Box {
    Eigen::VectorXd lo;
    Eigen::VectorXd hi;

    Box() = default;
    Box(Eigen::VectorXd lo_, Eigen::VectorXd hi_);

    int dim() const { return static_cast<int>(lo.size()); }
    Eigen::VectorXd center() const { return 0.5 * (lo + hi); }
    Eigen::VectorXd sides() const { return hi - lo; }
    double max_side() const { return (hi - lo).maxCoeff(); }
    int longest_axis() const;  // ties broken toward the lowest index
    double measure() const { return (hi - lo).prod(); }
    bool contains(const Eigen::VectorXd& p) const;

    // squared distance from p to the nearest / farthest point of the box
    double min_sq_dist(const Eigen::VectorXd& p) const;
    double max_sq_dist(const Eigen::VectorXd& p) const;
};

enum class BallKind { Sample, Exclusion };

// Closed Euclidean ball; Sample balls certify coverage of the variety near a
// sample point, Exclusion balls certify absence of variety points.
struct Ball {
    Eigen::VectorXd center;
    double radius = 0.0;
    BallKind kind = BallKind::Sample;

    bool intersects(const Box& b) const { return b.min_sq_dist(center) <= radius * radius; }
    bool contains(const Box& b) const { return b.max_sq_dist(center) <= radius * radius; }
    bool contains(const Eigen::VectorXd& p) const {
        return (p - center).squaredNorm() <= radius * radius;
    }
};

// Default splitting rule: bisect the longest side (ties -> lowest index).
std::vector<Box> split_box(const Box& b);

// Spatial store of covered regions over a root box. Uniform grid hashing is
// an accelerator only: every query answer matches a brute-force scan.
class CoveredRegions {
public:
    CoveredRegions() = default;
    // cell_hint is the preferred cell edge length (typically epsilon); cell
    // counts are clamped so the grid stays small
    CoveredRegions(const Box& root, double cell_hint);

    std::size_t size() const { return balls_.size(); }
    const std::vector<Ball>& balls() const { return balls_; }

    void insert(Ball b);

    // some stored ball intersects b (closed semantics: contact counts)
    bool intersects_any(const Box& b) const;
    // a stored ball containing b, if one exists
    std::optional<Ball> containing(const Box& b) const;

    bool intersects_any_brute(const Box& b) const;
    std::optional<Ball> containing_brute(const Box& b) const;

private:
    std::vector<std::size_t> cells_of(const Eigen::VectorXd& lo,
                                      const Eigen::VectorXd& hi) const;
    template <typename Pred>
    const Ball* scan_cells(const Box& b, Pred&& pred) const;

    Box root_;
    Eigen::VectorXi cells_per_axis_;
    Eigen::VectorXd cell_size_;
    std::vector<std::vector<std::uint32_t>> cell_balls_;
    std::vector<Ball> balls_;
    mutable std::vector<std::uint32_t> visit_stamp_;
    mutable std::uint32_t stamp_ = 0;
    bool use_grid_ = false;
};

// Heuristic split: pick the axis-aligned cut (8 candidate positions per axis)
// for which one output box has the largest-measure intersection with a stored
// ball's inscribed box. Falls back to split_box when nothing intersects b.
std::vector<Box> split_box_dynamic(const Box& b, const CoveredRegions& regions);

// Search tree over boxes, children created lazily by a splitting rule.
class BoxTree {
public:
    struct Node {
        Box box;
        int depth = 0;
        std::uint64_t creation_index = 0;
        std::int64_t parent = -1;
        bool done = false;
        bool expanded = false;
        std::vector<std::size_t> children;
    };

    explicit BoxTree(Box root);

    std::size_t size() const { return nodes_.size(); }
    const Node& node(std::size_t id) const { return nodes_[id]; }
    Node& node(std::size_t id) { return nodes_[id]; }

    // appends children produced by the given boxes; returns their ids
    std::vector<std::size_t> expand(std::size_t id, std::vector<Box> children);
    // inserts a detached node with a given depth and creation index (used
    // when restoring a frontier from a checkpoint)
    std::size_t adopt(Box b, int depth, std::uint64_t creation_index);
    void mark_done(std::size_t id) { nodes_[id].done = true; }
    std::uint64_t next_creation_index() const { return next_creation_; }
    void bump_creation_counter(std::uint64_t v) { next_creation_ = std::max(next_creation_, v); }

private:
    std::vector<Node> nodes_;
    std::uint64_t next_creation_ = 1;
};

}  // namespace varsample::geometry
