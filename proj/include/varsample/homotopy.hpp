#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "varsample/polysys.hpp"
#include "varsample/rng.hpp"

namespace varsample::homotopy {

using polysys::Complex;
using polysys::CPolynomial;

struct EvalWorkspace {
    std::vector<Complex> pow;  // power table, stride entries per variable
};

// M complex polynomial equations in M unknowns with cached symbolic Jacobian.
class SquareSystem {
public:
    SquareSystem() = default;
    explicit SquareSystem(std::vector<CPolynomial> equations);

    int size() const { return n_; }
    const std::vector<CPolynomial>& equations() const { return eqs_; }
    const CPolynomial& jacobian_entry(int eq, int var) const { return jac_[eq * n_ + var]; }
    int degree(int eq) const { return eqs_[eq].total_degree(); }

    Eigen::VectorXcd evaluate(const Eigen::VectorXcd& u) const;
    void evaluate_with_jacobian(const Eigen::VectorXcd& u, Eigen::VectorXcd& H,
                                Eigen::MatrixXcd& J) const;

private:
    std::vector<CPolynomial> eqs_;
    std::vector<CPolynomial> jac_;
    int n_ = 0;
};

enum class PathStatus { Tracking, Converged, Diverged, SingularEndpoint };

const char* to_string(PathStatus s);

struct PathPoint {
    Eigen::VectorXcd u;
    double t = 1.0;
    double step_size = 0.0;
    PathStatus status = PathStatus::Tracking;
    double residual = 0.0;   // ||H(u, t)||_inf at the reported point
    double condition = 0.0;  // Jacobian condition estimate at a converged endpoint
    int steps = 0;
};

struct TrackerConfig {
    double tracking_tol = 1e-8;
    double endpoint_tol = 1e-11;
    double min_step = 1e-14;
    double max_step = 1e-1;
    int max_newton_iter = 3;
    double divergence_bound = 1e8;
    double endgame_start_t = 0.1;
    int max_steps = 50000;
    // endpoints whose Jacobian condition estimate exceeds this are reported
    // singular even when the residual converged (positive-dimensional or
    // multiple endpoints)
    double endpoint_cond_max = 1e14;

    void validate() const;
};

// Straight-line homotopy H(u,t) = t*start(u) + (1-t)*target(u), tracked from
// t=1 down to t=0. Coefficients are affine in t, so one merged term scan
// evaluates H and its Jacobian.
class Homotopy {
public:
    Homotopy(const SquareSystem& start, const SquareSystem& target);

    int size() const { return n_; }
    const SquareSystem& target() const { return *target_; }

    void evaluate(const Eigen::VectorXcd& u, double t, Eigen::VectorXcd& H,
                  EvalWorkspace& ws) const;
    void evaluate_with_jacobian(const Eigen::VectorXcd& u, double t, Eigen::VectorXcd& H,
                                Eigen::MatrixXcd& J, EvalWorkspace& ws) const;
    // dH/dt = start(u) - target(u)
    void dt(const Eigen::VectorXcd& u, Eigen::VectorXcd& out, EvalWorkspace& ws) const;

private:
    struct TPoly {
        std::vector<Complex> c0;  // coefficient at t=0
        std::vector<Complex> c1;  // slope in t
        std::vector<int> exps;    // num_vars entries per term
    };
    static TPoly merge(const CPolynomial& target, const CPolynomial& start, int n);
    void fill_pow(const Eigen::VectorXcd& u, EvalWorkspace& ws) const;
    Complex eval_tpoly(const TPoly& p, double t, const Complex* pow) const;
    Complex eval_tpoly_slope(const TPoly& p, const Complex* pow) const;

    int n_ = 0;
    int stride_ = 0;  // power-table stride = max exponent + 1
    std::vector<TPoly> eqs_;
    std::vector<TPoly> jac_;
    const SquareSystem* target_;
};

// Bezout start system {gamma_i * (u_i^{d_i} - 1)} and its full solution set
// (tensor products of roots of unity), gamma_i random unit modulus.
struct StartSystem {
    SquareSystem system;
    std::vector<Eigen::VectorXcd> solutions;
};

StartSystem total_degree_start(const SquareSystem& square, std::uint64_t seed);

// Fourth-order predictor on the Davidenko ODE plus Newton corrector with
// adaptive stepping; ends Converged / Diverged / SingularEndpoint.
PathPoint track_path(const Homotopy& h, const Eigen::VectorXcd& start,
                     const TrackerConfig& cfg);

// all paths, optionally over several threads; per-path arithmetic identical
// regardless of thread count
std::vector<PathPoint> track_all(const Homotopy& h, const std::vector<Eigen::VectorXcd>& starts,
                                 const TrackerConfig& cfg, int threads = 1);

enum class RefineStatus { Ok, Singular, NoConvergence };

struct RefineResult {
    Eigen::VectorXcd u;
    double residual = 0.0;
    double condition = 0.0;  // 2-norm condition estimate of the final Jacobian
    RefineStatus status = RefineStatus::Ok;
};

RefineResult newton_refine(const SquareSystem& square, const Eigen::VectorXcd& u0, double tol,
                           int max_iter);

}  // namespace varsample::homotopy
