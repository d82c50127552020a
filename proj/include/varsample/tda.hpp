#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace varsample::tda {

constexpr double kInfDeath = std::numeric_limits<double>::infinity();

struct SimplexCapError : std::runtime_error {
    std::size_t count_estimate;
    std::size_t cap;
    SimplexCapError(std::size_t est, std::size_t cap_)
        : std::runtime_error("simplex cap exceeded: at least " + std::to_string(est) +
                             " simplices (cap " + std::to_string(cap_) + ")"),
          count_estimate(est),
          cap(cap_) {}
};

// Vietoris-Rips filtration, dimension-capped. A simplex is present iff every
// edge has length <= threshold; its filtration value is its diameter. Order:
// (value, dimension, lexicographic vertex order).
class FiltrationComplex {
public:
    // builds all simplices of dimension <= p_max+1 (needed to compute H_{p_max})
    static FiltrationComplex rips(const std::vector<Eigen::VectorXd>& points, double t_max,
                                  int p_max, std::size_t simplex_cap = 400'000'000);

    int max_dim() const { return static_cast<int>(layers_.size()) - 1; }
    int homology_dim_cap() const { return p_max_; }
    double threshold() const { return t_max_; }
    std::size_t count(int dim) const {
        return dim <= max_dim() ? layers_[dim].diameter.size() : 0;
    }
    std::size_t total_count() const;

    // storage order is lexicographic within a dimension
    const std::uint32_t* vertices(int dim, std::size_t idx) const {
        return layers_[dim].verts.data() + idx * (dim + 1);
    }
    double diameter(int dim, std::size_t idx) const { return layers_[dim].diameter[idx]; }
    // filtration order within a dimension: position -> storage index
    const std::vector<std::uint32_t>& filtration_order(int dim) const {
        return layers_[dim].filt_order;
    }
    // storage index -> filtration position within the dimension
    const std::vector<std::uint32_t>& filtration_position(int dim) const {
        return layers_[dim].filt_pos;
    }

    // boundary of a simplex as sorted filtration positions one dimension down
    std::vector<std::uint32_t> boundary_positions(int dim, std::size_t storage_idx) const;

private:
    struct Layer {
        std::vector<std::uint32_t> verts;  // (dim+1) entries per simplex, lex sorted
        std::vector<double> diameter;
        std::vector<std::uint32_t> filt_order;
        std::vector<std::uint32_t> filt_pos;
    };
    std::size_t lex_lookup(int dim, const std::uint32_t* key) const;

    std::vector<Layer> layers_;
    double t_max_ = 0.0;
    int p_max_ = 0;
};

struct DiagramPoint {
    double birth = 0.0;
    double death = kInfDeath;  // infinite when the class never dies in range
    int dim = 0;
};

// Multiset of [birth, death) intervals per homology dimension.
struct PersistenceDiagram {
    std::vector<DiagramPoint> points;
    int ambient_dim = 0;
    double epsilon = 0.0;
    double delta = 0.0;
    double threshold = kInfDeath;
    int p_max = 0;
    std::size_t suppressed_zero_pairs = 0;

    // Betti numbers of the complex at parameter t (counts birth <= t < death)
    std::vector<std::size_t> betti_at(double t) const;
};

// Z/2 boundary-matrix reduction with the clearing (twist) optimization.
PersistenceDiagram compute_persistence(const FiltrationComplex& fc);
// plain left-to-right reduction in global filtration order; reference path
PersistenceDiagram compute_persistence_standard(const FiltrationComplex& fc);

struct InferenceCorner {
    double a = 0.0;  // birth bound 2*eps*sqrt((n+1)/(2n))
    double b = 0.0;  // death bound 4*eps + 2*delta
};

InferenceCorner inference_corner(int n, double epsilon, double delta);

// Per-dimension counts of diagram points above-left of the corner; each count
// is a lower bound for the Betti number of the sampled space, valid under the
// homological-feature-size assumption reported alongside.
struct InferenceVerdict {
    InferenceCorner corner;
    std::vector<std::size_t> counts;   // index = homology dimension
    bool threshold_censored = false;   // diagram threshold < corner.b
    double hfs_assumption = 0.0;       // requires hfs(X) > 2*(epsilon+delta)
    double epsilon = 0.0;
    double delta = 0.0;
    int ambient_dim = 0;
};

InferenceVerdict infer_betti(const PersistenceDiagram& diag, int n, double epsilon, double delta);

void write_diagram_csv(const PersistenceDiagram& diag, const std::string& path);
PersistenceDiagram read_diagram_csv(const std::string& path);
void write_diagram_svg(const PersistenceDiagram& diag, const InferenceVerdict& verdict,
                       const std::string& path);

}  // namespace varsample::tda
