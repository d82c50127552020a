#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "varsample/homotopy.hpp"
#include "varsample/polysys.hpp"

namespace varsample::mindist {

// Square Fritz John system for min_{x in V} ||x - y||^2 with multipliers
// lambda in P^{N-d} pinned by a random affine patch. Unknown order:
// x_1..x_N, lambda_0..lambda_{N-d}; equations: f(x) - t*beta block (N-d),
// lambda_0 (x - y) + sum_i lambda_i grad f_i(x) block (N), patch (1).
struct FritzJohnSystem {
    homotopy::SquareSystem target;  // t = 0: G_y
    homotopy::SquareSystem start;   // t = 1: f - beta block
    Eigen::VectorXd test_point;
    Eigen::VectorXcd beta;   // N-d entries, drawn from the complex unit sphere
    Eigen::VectorXcd patch;  // N-d+1 covector c with c . lambda = 1
    int num_vars = 0;        // N
    int dim = 0;             // d
    int size = 0;            // 2N - d + 1
};

FritzJohnSystem build_fritz_john(const polysys::PolynomialSystem& sys, const Eigen::VectorXd& y,
                                 std::uint64_t seed);

struct Witness {
    Eigen::VectorXd point;        // refined near-variety point (pi_1 of an endpoint)
    double distance = 0.0;        // ||point - y||_2
    double residual = 0.0;        // ||f(point)||_2 after real refinement
    double accuracy_bound = 0.0;  // ||J^+|| * residual, certified distance bound
    double fj_residual = 0.0;     // Fritz John residual at the complex endpoint
    bool certified = false;       // accuracy_bound <= delta / 2
};

struct MinDistanceResult {
    std::vector<Witness> witnesses;  // deduplicated, sorted by distance
    double min_distance = std::numeric_limits<double>::infinity();
    double certified_accuracy = 0.0;  // max accuracy bound over witnesses
    // distance between the requested y and the test point actually solved;
    // nonzero only when degeneracy forced a perturbation. Exclusion radii
    // must shrink by this amount to stay sound.
    double perturbation = 0.0;
    int paths_tracked = 0;
    int converged_endpoints = 0;
    int real_endpoints = 0;
    int retries = 0;
    bool failed = false;  // hard failure: every retry ended with no endpoints
    std::string failure_reason;

    bool empty() const { return witnesses.empty(); }
};

struct MinDistanceConfig {
    homotopy::TrackerConfig tracker;
    double delta = 1e-6;          // certification target for witnesses
    double real_imag_tol = 1e-6;  // imaginary-part infinity-norm acceptance
    double dedup_tol = 1e-8;
    // retries 1-2 re-randomize (beta, patch, gamma) only; from the third on,
    // y is nudged by an escalating relative amount, starting at 1e-10. A
    // doubly-degenerate test point (e.g. the center of a symmetric region)
    // can sit so close to the discriminant that the first nudge still tracks
    // as singular, hence the escalation.
    int max_retries = 6;
    // a run counts as successful only when some endpoint converged with a
    // Jacobian condition at most this; ill-conditioned "endpoints" sit on
    // positive-dimensional junk near a degenerate test point
    double healthy_cond_max = 1e8;
    int path_threads = 1;
    int refine_iters = 60;
};

// Solves the Fritz John system, producing homotopy endpoints. The internal
// backend is the two-phase tracker (total-degree to t=1, then the parameter
// homotopy to t=0); the subprocess backend shells out to an external solver.
class Backend {
public:
    virtual ~Backend() = default;
    virtual std::vector<homotopy::PathPoint> solve(const FritzJohnSystem& fj,
                                                   const MinDistanceConfig& cfg,
                                                   std::uint64_t seed) = 0;
    virtual std::string name() const = 0;
};

class InternalBackend : public Backend {
public:
    std::vector<homotopy::PathPoint> solve(const FritzJohnSystem& fj,
                                           const MinDistanceConfig& cfg,
                                           std::uint64_t seed) override;
    std::string name() const override { return "internal"; }
};

// Writes the square target system as JSON, runs `solver_path input output`,
// reads endpoint vectors back. Wire format documented in the README.
class SubprocessBackend : public Backend {
public:
    explicit SubprocessBackend(std::string solver_path) : solver_path_(std::move(solver_path)) {}
    std::vector<homotopy::PathPoint> solve(const FritzJohnSystem& fj,
                                           const MinDistanceConfig& cfg,
                                           std::uint64_t seed) override;
    std::string name() const override { return "external:" + solver_path_; }

private:
    std::string solver_path_;
};

// Filters converged endpoints with small imaginary x-part, refines the real
// projections against f, certifies distance bounds, deduplicates.
MinDistanceResult harvest_real_endpoints(const std::vector<homotopy::PathPoint>& endpoints,
                                         const polysys::PolynomialSystem& sys,
                                         const FritzJohnSystem& fj, const Eigen::VectorXd& y,
                                         const MinDistanceConfig& cfg);

// MinDistance subroutine: witnesses within delta of V_R plus the minimum
// distance; empty witness set means no real endpoint (V_R empty by the
// endpoint criterion). Retries with fresh (beta, patch, gamma) when a run
// produces no endpoints at all; the final retry perturbs y slightly.
MinDistanceResult min_distance(const polysys::PolynomialSystem& sys, const Eigen::VectorXd& y,
                               const MinDistanceConfig& cfg, std::uint64_t seed,
                               Backend* backend = nullptr);

// serialization used by the subprocess backend (and the solve-square tool)
std::string square_system_to_json(const homotopy::SquareSystem& sys);
homotopy::SquareSystem square_system_from_json(const std::string& text);
std::string endpoints_to_json(const std::vector<homotopy::PathPoint>& pts);
std::vector<homotopy::PathPoint> endpoints_from_json(const std::string& text);

}  // namespace varsample::mindist
