#include "varsample/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <future>
#include <queue>
#include <sstream>

#include <nlohmann/json.hpp>

namespace varsample::sampler {

using geometry::Ball;
using geometry::BallKind;
using geometry::Box;
using geometry::BoxTree;
using geometry::CoveredRegions;

void SamplerConfig::validate() const {
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    if (delta < 0.0 || delta > epsilon) throw std::invalid_argument("need 0 <= delta <= epsilon");
    if (region.dim() == 0) throw std::invalid_argument("empty region");
    if (heuristics.dynamic_sample && !(heuristics.rho >= 0.0 && heuristics.rho < epsilon))
        throw std::invalid_argument("dynamic sampling threshold must satisfy 0 <= rho < epsilon");
    if (workers < 1) throw std::invalid_argument("workers must be >= 1");
}

namespace {

// splits needed before every side of the region is at most alpha under
// longest-side bisection
int bisection_depth_bound(const Box& region, double alpha) {
    int levels = 0;
    for (int v = 0; v < region.dim(); ++v) {
        double side = region.hi[v] - region.lo[v];
        if (side > alpha) levels += static_cast<int>(std::ceil(std::log2(side / alpha)));
    }
    return levels;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t k) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (k + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

struct QueueEntry {
    std::size_t node_id;
    int depth;
    double measure;
    std::uint64_t creation;
};

struct QueueCompare {
    bool priority_search;
    // max-heap: returns true when a should be popped after b
    bool operator()(const QueueEntry& a, const QueueEntry& b) const {
        if (a.depth != b.depth) return a.depth > b.depth;
        if (priority_search && a.measure != b.measure) return a.measure < b.measure;
        return a.creation > b.creation;
    }
};

struct Pending {
    std::size_t node_id;
    bool dispatched = false;
    std::future<mindist::MinDistanceResult> fut;
};

}  // namespace

SampleCloud sample(const polysys::PolynomialSystem& sys, const SamplerConfig& cfg,
                   mindist::Backend* backend, const std::string& resume_path) {
    cfg.validate();
    if (cfg.region.dim() != sys.num_vars())
        throw std::invalid_argument("region dimension does not match the system");
    if (!sys.is_square_for_dim())
        throw std::invalid_argument("system must have exactly num_vars - dim polynomials");

    mindist::InternalBackend internal;
    if (!backend) backend = &internal;

    const int N = sys.num_vars();
    const double alpha = (cfg.epsilon - cfg.delta) / std::sqrt(static_cast<double>(N));
    const int depth_bound = bisection_depth_bound(cfg.region, alpha);
    // beyond this depth dynamic splitting hands back to plain bisection so
    // that boxes still shrink below alpha on every branch
    const int dynamic_guard_depth = 2 * depth_bound + 16;

    mindist::MinDistanceConfig mcfg = cfg.mindist_cfg;
    mcfg.delta = cfg.delta;

    SampleCloud cloud;
    cloud.var_names = sys.var_names();
    cloud.epsilon = cfg.epsilon;
    cloud.delta = cfg.delta;
    cloud.seed = cfg.seed;
    cloud.region = cfg.region;
    cloud.certificate.delta = cfg.delta;
    cloud.certificate.epsilon =
        cfg.epsilon + (cfg.heuristics.dynamic_sample ? cfg.heuristics.rho : 0.0);

    BoxTree tree(cfg.region);
    CoveredRegions regions(cfg.region, cfg.epsilon);

    QueueCompare cmp{cfg.heuristics.priority_search};
    std::priority_queue<QueueEntry, std::vector<QueueEntry>, QueueCompare> queue(cmp);
    auto enqueue = [&](std::size_t id) {
        const auto& n = tree.node(id);
        queue.push({id, n.depth, n.box.measure(), n.creation_index});
    };

    if (resume_path.empty()) {
        enqueue(0);
    } else {
        std::ifstream in(resume_path);
        if (!in) throw std::runtime_error("cannot read checkpoint " + resume_path);
        nlohmann::json j;
        in >> j;
        if (j.value("format", "") != "varsample-checkpoint-v1")
            throw std::runtime_error("unrecognized checkpoint format");
        if (j.at("system").get<std::string>() != polysys::print(sys))
            throw std::runtime_error("checkpoint was produced from a different system");
        if (j.at("epsilon").get<double>() != cfg.epsilon ||
            j.at("delta").get<double>() != cfg.delta ||
            j.at("seed").get<std::uint64_t>() != cfg.seed)
            throw std::runtime_error("checkpoint parameters do not match the configuration");
        for (const auto& b : j.at("balls")) {
            Ball ball;
            auto c = b.at("center").get<std::vector<double>>();
            ball.center = Eigen::Map<Eigen::VectorXd>(c.data(), static_cast<long>(c.size()));
            ball.radius = b.at("radius").get<double>();
            ball.kind = b.at("kind").get<std::string>() == "exclusion" ? BallKind::Exclusion
                                                                       : BallKind::Sample;
            regions.insert(ball);
        }
        for (const auto& p : j.at("points")) {
            SamplePoint sp;
            auto x = p.at("x").get<std::vector<double>>();
            auto o = p.at("origin").get<std::vector<double>>();
            sp.x = Eigen::Map<Eigen::VectorXd>(x.data(), static_cast<long>(x.size()));
            sp.origin = Eigen::Map<Eigen::VectorXd>(o.data(), static_cast<long>(o.size()));
            sp.residual = p.at("residual").get<double>();
            sp.accuracy_bound = p.at("accuracy_bound").get<double>();
            cloud.points.push_back(std::move(sp));
        }
        cloud.certificate.mindist_calls = j.at("mindist_calls").get<std::size_t>();
        cloud.certificate.tree_depth = j.at("tree_depth").get<int>();
        cloud.coverage_checks = j.value("coverage_checks", std::size_t{0});
        cloud.coverage_failures = j.value("coverage_failures", std::size_t{0});
        for (const auto& f : j.at("frontier")) {
            auto lo = f.at("lo").get<std::vector<double>>();
            auto hi = f.at("hi").get<std::vector<double>>();
            Box b(Eigen::Map<Eigen::VectorXd>(lo.data(), static_cast<long>(lo.size())),
                  Eigen::Map<Eigen::VectorXd>(hi.data(), static_cast<long>(hi.size())));
            enqueue(tree.adopt(std::move(b), f.at("depth").get<int>(),
                               f.at("creation").get<std::uint64_t>()));
        }
        tree.bump_creation_counter(j.value("next_creation", std::uint64_t{0}));
    }

    const double min_sep = 1e-8;  // pairwise distinctness floor for output points
    const double refuse_below =
        cfg.heuristics.dynamic_sample ? std::max(cfg.heuristics.rho, min_sep) : min_sep;

    auto nearest_point_dist = [&](const Eigen::VectorXd& x) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& p : cloud.points) best = std::min(best, (p.x - x).norm());
        return best;
    };

    auto collect_frontier = [&](const std::deque<Pending>& window) {
        std::vector<BoxTree::Node> frontier;
        auto q = queue;  // copy; checkpoints are rare
        while (!q.empty()) {
            frontier.push_back(tree.node(q.top().node_id));
            q.pop();
        }
        for (const auto& pd : window) frontier.push_back(tree.node(pd.node_id));
        return frontier;
    };

    std::deque<Pending> window;
    auto merge_one = [&]() {
        Pending pd = std::move(window.front());
        window.pop_front();
        const std::size_t id = pd.node_id;
        const Box box = tree.node(id).box;

        if (pd.dispatched) {
            mindist::MinDistanceResult r = pd.fut.get();
            ++cloud.certificate.mindist_calls;
            if (r.failed) {
                std::string ckpt = cfg.checkpoint_path;
                if (!ckpt.empty()) {
                    window.push_front(std::move(pd));  // keep the node in the frontier
                    cloud.balls = regions.balls();
                    save_checkpoint(cloud, collect_frontier(window), sys, cfg,
                                    tree.next_creation_index(), ckpt);
                }
                throw SamplerAbort("MinDistance failed at node " + std::to_string(id) + ": " +
                                       r.failure_reason,
                                   ckpt);
            }

            const Eigen::VectorXd y = box.center();
            // exclusion radii shrink by the perturbation applied inside the
            // call: distances were measured from the nudged test point
            const double excl = r.min_distance - cfg.delta - r.perturbation;
            if (r.empty()) {
                // no real endpoint: the variety misses R entirely, cover it all
                Ball all;
                all.center = y;
                all.radius = std::sqrt(cfg.region.max_sq_dist(y)) + cfg.epsilon;
                all.kind = BallKind::Exclusion;
                regions.insert(std::move(all));
            } else if (excl > 0.0) {
                regions.insert({y, excl, BallKind::Exclusion});
            }
            for (const auto& w : r.witnesses)
                regions.insert({w.point, cfg.epsilon, BallKind::Sample});
            for (const auto& w : r.witnesses) {
                if (nearest_point_dist(w.point) <= refuse_below) continue;
                cloud.points.push_back({w.point, y, w.residual, w.accuracy_bound});
            }

            // small boxes must end up covered by this call's own balls
            if (box.max_side() < alpha) {
                ++cloud.coverage_checks;
                bool covered = false;
                if (!r.empty()) {
                    const auto& nearest = r.witnesses.front();  // sorted by distance
                    covered = Ball{nearest.point, cfg.epsilon, BallKind::Sample}.contains(box);
                }
                if (!covered) {
                    double rad = r.empty() ? std::sqrt(cfg.region.max_sq_dist(y)) + cfg.epsilon
                                           : excl;
                    if (rad > 0.0) covered = Ball{y, rad, BallKind::Exclusion}.contains(box);
                }
                if (!covered) ++cloud.coverage_failures;
            }

            if (!cfg.checkpoint_path.empty() && cfg.checkpoint_every > 0 &&
                cloud.certificate.mindist_calls % cfg.checkpoint_every == 0) {
                window.push_front({id, false, {}});
                cloud.balls = regions.balls();
                save_checkpoint(cloud, collect_frontier(window), sys, cfg,
                                tree.next_creation_index(), cfg.checkpoint_path);
                window.pop_front();
            }
        }

        if (regions.containing(box)) {
            tree.mark_done(id);
            return;
        }
        std::vector<Box> children;
        if (cfg.heuristics.dynamic_split && tree.node(id).depth < dynamic_guard_depth)
            children = geometry::split_box_dynamic(box, regions);
        else
            children = geometry::split_box(box);
        for (std::size_t cid : tree.expand(id, std::move(children))) {
            cloud.certificate.tree_depth =
                std::max(cloud.certificate.tree_depth, tree.node(cid).depth);
            enqueue(cid);
        }
    };

    while (!queue.empty() || !window.empty()) {
        if (!queue.empty() && static_cast<int>(window.size()) < cfg.workers) {
            QueueEntry e = queue.top();
            queue.pop();
            const auto& node = tree.node(e.node_id);
            bool wants_call =
                node.box.max_side() <= alpha || !regions.intersects_any(node.box);
            Pending pd;
            pd.node_id = e.node_id;
            pd.dispatched = wants_call;
            if (wants_call) {
                Eigen::VectorXd y = node.box.center();
                std::uint64_t call_seed = mix_seed(cfg.seed, node.creation_index);
                if (cfg.workers == 1) {
                    std::promise<mindist::MinDistanceResult> pr;
                    pr.set_value(mindist::min_distance(sys, y, mcfg, call_seed, backend));
                    pd.fut = pr.get_future();
                } else {
                    pd.fut = std::async(std::launch::async, [&sys, y, mcfg, call_seed, backend] {
                        return mindist::min_distance(sys, y, mcfg, call_seed, backend);
                    });
                }
            }
            window.push_back(std::move(pd));
        } else {
            merge_one();
        }
    }

    cloud.variety_empty = cloud.points.empty();
    cloud.balls = regions.balls();
    return cloud;
}

SampleCloud subsample(const SampleCloud& cloud, double r, std::uint64_t seed) {
    if (!(r > 0.0)) throw std::invalid_argument("subsample radius must be positive");
    const std::size_t n = cloud.points.size();
    Rng rng(seed);
    std::vector<std::size_t> order = rng.permutation(n);
    std::vector<char> alive(n, 1), chosen(n, 0);
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t i = order[k];
        if (!alive[i]) continue;
        chosen[i] = 1;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i || !alive[j]) continue;
            if ((cloud.points[i].x - cloud.points[j].x).norm() <= r) alive[j] = 0;
        }
    }
    SampleCloud out = cloud;
    out.points.clear();
    for (std::size_t i = 0; i < n; ++i)
        if (alive[i]) out.points.push_back(cloud.points[i]);
    out.certificate.epsilon += r;  // triangle inequality: (delta, epsilon + r)-sample
    return out;
}

VerifyReport verify_sample(const SampleCloud& cloud, const polysys::PolynomialSystem& sys,
                           const std::vector<Eigen::VectorXd>& oracle_points) {
    VerifyReport rep;
    const double delta = cloud.certificate.delta;
    const double epsilon = cloud.certificate.epsilon;

    // A subset of B^delta: recompute the residual-based distance bound
    for (const auto& p : cloud.points) {
        Eigen::VectorXd f = sys.evaluate_real(p.x);
        Eigen::MatrixXd J = sys.jacobian_real(p.x);
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
        double smin = svd.singularValues().minCoeff();
        double bound = smin > 0.0 ? f.norm() / smin : std::numeric_limits<double>::infinity();
        rep.max_accuracy_bound = std::max(rep.max_accuracy_bound, bound);
        if (!(bound <= delta)) {
            rep.pass = false;
            rep.witness = p.x;
            std::ostringstream os;
            os << "cloud point with certified distance bound " << bound << " > delta " << delta;
            rep.detail = os.str();
            return rep;
        }
    }

    // B subset of A^epsilon: every oracle point has a cloud point within epsilon
    if (cloud.points.empty() && !oracle_points.empty()) {
        rep.pass = false;
        rep.witness = oracle_points.front();
        rep.detail = "empty cloud against a nonempty oracle";
        return rep;
    }
    for (const auto& q : oracle_points) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& p : cloud.points) best = std::min(best, (p.x - q).norm());
        rep.max_gap = std::max(rep.max_gap, best);
        if (!(best <= epsilon)) {
            rep.pass = false;
            rep.witness = q;
            std::ostringstream os;
            os << "oracle point at distance " << best << " from the cloud (> epsilon " << epsilon
               << ")";
            rep.detail = os.str();
            return rep;
        }
    }

    rep.pass = true;
    std::ostringstream os;
    os << "pass: max gap " << rep.max_gap << " <= epsilon " << epsilon
       << ", max distance bound " << rep.max_accuracy_bound << " <= delta " << delta;
    rep.detail = os.str();
    return rep;
}

void save_checkpoint(const SampleCloud& partial,
                     const std::vector<geometry::BoxTree::Node>& frontier,
                     const polysys::PolynomialSystem& sys, const SamplerConfig& cfg,
                     std::uint64_t next_creation, const std::string& path) {
    nlohmann::json j;
    j["format"] = "varsample-checkpoint-v1";
    j["system"] = polysys::print(sys);
    j["epsilon"] = cfg.epsilon;
    j["delta"] = cfg.delta;
    j["seed"] = cfg.seed;
    j["next_creation"] = next_creation;
    j["mindist_calls"] = partial.certificate.mindist_calls;
    j["tree_depth"] = partial.certificate.tree_depth;
    j["coverage_checks"] = partial.coverage_checks;
    j["coverage_failures"] = partial.coverage_failures;

    nlohmann::json balls = nlohmann::json::array();
    for (const auto& b : partial.balls) {
        nlohmann::json jb;
        jb["center"] = std::vector<double>(b.center.data(), b.center.data() + b.center.size());
        jb["radius"] = b.radius;
        jb["kind"] = b.kind == BallKind::Exclusion ? "exclusion" : "sample";
        balls.push_back(std::move(jb));
    }
    j["balls"] = std::move(balls);

    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : partial.points) {
        nlohmann::json jp;
        jp["x"] = std::vector<double>(p.x.data(), p.x.data() + p.x.size());
        jp["origin"] = std::vector<double>(p.origin.data(), p.origin.data() + p.origin.size());
        jp["residual"] = p.residual;
        jp["accuracy_bound"] = p.accuracy_bound;
        pts.push_back(std::move(jp));
    }
    j["points"] = std::move(pts);

    nlohmann::json fr = nlohmann::json::array();
    for (const auto& n : frontier) {
        nlohmann::json jf;
        jf["lo"] = std::vector<double>(n.box.lo.data(), n.box.lo.data() + n.box.lo.size());
        jf["hi"] = std::vector<double>(n.box.hi.data(), n.box.hi.data() + n.box.hi.size());
        jf["depth"] = n.depth;
        jf["creation"] = n.creation_index;
        fr.push_back(std::move(jf));
    }
    j["frontier"] = std::move(fr);

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write checkpoint " + path);
    out << j.dump();
}

}  // namespace varsample::sampler
