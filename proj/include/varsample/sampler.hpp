#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "varsample/geometry.hpp"
#include "varsample/mindist.hpp"
#include "varsample/polysys.hpp"

namespace varsample::sampler {

struct Heuristics {
    bool dynamic_split = false;
    bool dynamic_sample = false;
    double rho = 0.0;  // dynamic sampling refusal threshold
    bool priority_search = false;
};

struct SamplerConfig {
    double epsilon = 0.1;
    double delta = 1e-6;
    geometry::Box region;
    Heuristics heuristics;
    std::uint64_t seed = 0;
    int workers = 1;  // concurrent MinDistance calls
    mindist::MinDistanceConfig mindist_cfg;
    std::size_t checkpoint_every = 100;  // MinDistance calls between snapshots
    std::string checkpoint_path;         // empty disables checkpointing

    void validate() const;
};

struct SamplePoint {
    Eigen::VectorXd x;
    Eigen::VectorXd origin;      // test point y whose MinDistance call produced x
    double residual = 0.0;       // ||f(x)||_2
    double accuracy_bound = 0.0; // certified distance-to-variety bound
};

// (delta, epsilon) claim plus the run statistics backing it
struct Certificate {
    double delta = 0.0;
    double epsilon = 0.0;  // weakened to epsilon + rho under dynamic sampling
    std::size_t mindist_calls = 0;
    int tree_depth = 0;
};

struct SampleCloud {
    std::vector<SamplePoint> points;
    std::vector<std::string> var_names;
    double epsilon = 0.0;
    double delta = 0.0;
    std::uint64_t seed = 0;
    Certificate certificate;
    std::vector<geometry::Ball> balls;  // covered regions at termination
    geometry::Box region;
    bool variety_empty = false;
    std::size_t coverage_checks = 0;    // small-box containment assertions evaluated
    std::size_t coverage_failures = 0;  // assertions that did not hold
};

struct SamplerAbort : std::runtime_error {
    std::string checkpoint_path;
    SamplerAbort(const std::string& msg, std::string ckpt)
        : std::runtime_error(msg), checkpoint_path(std::move(ckpt)) {}
};

// Breadth-first search of the box tree: a node triggers MinDistance at its
// center when it is small enough or misses every covered region; exclusion
// and sample balls accumulate until every box is inside a stored ball.
SampleCloud sample(const polysys::PolynomialSystem& sys, const SamplerConfig& cfg,
                   mindist::Backend* backend = nullptr, const std::string& resume_path = "");

// Greedy thinning: visit points in seeded order, keep the visited point and
// drop all others within r; result is a (delta, epsilon + r)-sample.
SampleCloud subsample(const SampleCloud& cloud, double r, std::uint64_t seed);

struct VerifyReport {
    bool pass = false;
    double max_gap = 0.0;             // worst oracle-to-cloud distance
    double max_accuracy_bound = 0.0;  // worst recomputed per-point bound
    std::string detail;
    std::optional<Eigen::VectorXd> witness;  // violating point, when failing
};

// Checks A subset of B^delta (recomputed residual bounds) and B subset of
// A^epsilon (every oracle point within the certified epsilon of the cloud).
VerifyReport verify_sample(const SampleCloud& cloud, const polysys::PolynomialSystem& sys,
                           const std::vector<Eigen::VectorXd>& oracle_points);

void save_checkpoint(const SampleCloud& partial,
                     const std::vector<geometry::BoxTree::Node>& frontier,
                     const polysys::PolynomialSystem& sys, const SamplerConfig& cfg,
                     std::uint64_t next_creation, const std::string& path);

}  // namespace varsample::sampler
