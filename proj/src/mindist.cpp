#include "varsample/mindist.hpp"

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace varsample::mindist {

using homotopy::PathPoint;
using homotopy::PathStatus;
using polysys::Complex;
using polysys::CPolynomial;

FritzJohnSystem build_fritz_john(const polysys::PolynomialSystem& sys, const Eigen::VectorXd& y,
                                 std::uint64_t seed) {
    const int N = sys.num_vars();
    const int d = sys.dim();
    const int k = N - d;
    if (sys.num_polys() != k)
        throw std::invalid_argument("system must have exactly num_vars - dim polynomials"
                                    " (randomize first)");
    if (y.size() != N) throw std::invalid_argument("test point dimension mismatch");

    const int M = 2 * N - d + 1;  // x block (N) + lambda block (N-d+1)
    Rng rng(seed);

    FritzJohnSystem fj;
    fj.test_point = y;
    fj.num_vars = N;
    fj.dim = d;
    fj.size = M;
    {
        auto b = rng.unit_complex_vector(k);
        fj.beta = Eigen::Map<Eigen::VectorXcd>(b.data(), k);
        auto c = rng.unit_complex_vector(k + 1);
        fj.patch = Eigen::Map<Eigen::VectorXcd>(c.data(), k + 1);
    }

    std::vector<int> x_map(N);
    for (int v = 0; v < N; ++v) x_map[v] = v;
    auto lambda_var = [&](int i) { return N + i; };  // lambda_0..lambda_{N-d}

    std::vector<CPolynomial> target, start;
    target.reserve(M);
    start.reserve(M);

    // f block: target f_i(x), start f_i(x) - beta_i
    for (int i = 0; i < k; ++i) {
        CPolynomial f = polysys::to_complex(sys.polys()[i]).embedded(M, x_map);
        target.push_back(f);
        f -= CPolynomial::constant(M, Complex(fj.beta[i]));
        start.push_back(std::move(f));
    }

    // Lagrange block: lambda_0 (x_j - y_j) + sum_i lambda_i d f_i / d x_j
    for (int j = 0; j < N; ++j) {
        CPolynomial row = CPolynomial::variable(M, lambda_var(0)) *
                          (CPolynomial::variable(M, j) - CPolynomial::constant(M, Complex(y[j])));
        for (int i = 0; i < k; ++i) {
            CPolynomial g = polysys::to_complex(sys.gradient(i, j)).embedded(M, x_map);
            row += CPolynomial::variable(M, lambda_var(i + 1)) * g;
        }
        target.push_back(row);
        start.push_back(row);
    }

    // patch: c . lambda = 1
    {
        CPolynomial patch(M);
        for (int i = 0; i <= k; ++i)
            patch += CPolynomial::variable(M, lambda_var(i)) *
                     CPolynomial::constant(M, fj.patch[i]);
        patch -= CPolynomial::constant(M, Complex(1.0));
        patch.canonicalize();
        target.push_back(patch);
        start.push_back(patch);
    }

    fj.target = homotopy::SquareSystem(std::move(target));
    fj.start = homotopy::SquareSystem(std::move(start));
    return fj;
}

std::vector<PathPoint> InternalBackend::solve(const FritzJohnSystem& fj,
                                              const MinDistanceConfig& cfg,
                                              std::uint64_t seed) {
    // phase 1: Bezout homotopy to the t=1 system
    auto td = homotopy::total_degree_start(fj.start, seed);
    homotopy::Homotopy phase1(td.system, fj.start);
    auto mid = homotopy::track_all(phase1, td.solutions, cfg.tracker, cfg.path_threads);

    std::vector<Eigen::VectorXcd> starts;
    for (const auto& p : mid)
        if (p.status == PathStatus::Converged) starts.push_back(p.u);

    // phase 2: the parameter homotopy H_{y,beta} from t=1 down to t=0
    homotopy::Homotopy phase2(fj.start, fj.target);
    auto ends = homotopy::track_all(phase2, starts, cfg.tracker, cfg.path_threads);

    // keep total path count visible to callers via the vector size: report
    // non-converged phase-1 paths too (as their terminal states)
    for (const auto& p : mid)
        if (p.status != PathStatus::Converged) ends.push_back(p);
    return ends;
}

namespace {

// duplicate converged endpoints at t=1 signal a genericity failure
bool has_duplicate_endpoints(const std::vector<PathPoint>& pts, double tol) {
    std::vector<const PathPoint*> conv;
    for (const auto& p : pts)
        if (p.status == PathStatus::Converged) conv.push_back(&p);
    for (std::size_t i = 0; i < conv.size(); ++i)
        for (std::size_t j = i + 1; j < conv.size(); ++j)
            if ((conv[i]->u - conv[j]->u).lpNorm<Eigen::Infinity>() <= tol) return true;
    return false;
}

// Gauss-Newton (minimal-norm step) against the underdetermined system f
struct RealRefine {
    Eigen::VectorXd x;
    double residual;        // ||f(x)||_2
    double accuracy_bound;  // ||J^+||_2 * residual
    bool converged;
};

RealRefine refine_real(const polysys::PolynomialSystem& sys, Eigen::VectorXd x, int iters) {
    RealRefine out{std::move(x), 0.0, std::numeric_limits<double>::infinity(), false};
    double prev = std::numeric_limits<double>::infinity();
    for (int it = 0; it < iters; ++it) {
        Eigen::VectorXd f = sys.evaluate_real(out.x);
        out.residual = f.norm();
        if (out.residual >= prev && it > 2) break;  // stalled
        prev = out.residual;
        if (out.residual == 0.0) break;
        Eigen::MatrixXd J = sys.jacobian_real(out.x);
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(J);
        Eigen::VectorXd step = cod.solve(f);
        if (!step.allFinite()) break;
        out.x -= step;
        if (step.lpNorm<Eigen::Infinity>() < 1e-16 * (1.0 + out.x.lpNorm<Eigen::Infinity>()))
            break;
    }
    Eigen::VectorXd f = sys.evaluate_real(out.x);
    out.residual = f.norm();
    Eigen::MatrixXd J = sys.jacobian_real(out.x);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
    double smin = svd.singularValues().minCoeff();
    out.accuracy_bound = smin > 0.0 ? out.residual / smin
                                    : std::numeric_limits<double>::infinity();
    out.converged = std::isfinite(out.accuracy_bound);
    return out;
}

}  // namespace

MinDistanceResult harvest_real_endpoints(const std::vector<PathPoint>& endpoints,
                                         const polysys::PolynomialSystem& sys,
                                         const FritzJohnSystem& fj, const Eigen::VectorXd& y,
                                         const MinDistanceConfig& cfg) {
    const int N = fj.num_vars;
    MinDistanceResult res;
    res.paths_tracked = static_cast<int>(endpoints.size());

    std::vector<Witness> raw;
    for (const auto& p : endpoints) {
        if (p.status != PathStatus::Converged) continue;
        ++res.converged_endpoints;
        Eigen::VectorXcd x = p.u.head(N);
        double imag = x.imag().lpNorm<Eigen::Infinity>();
        if (imag > cfg.real_imag_tol) continue;
        ++res.real_endpoints;

        RealRefine rr = refine_real(sys, x.real(), cfg.refine_iters);
        Witness w;
        w.point = rr.x;
        w.distance = (rr.x - y).norm();
        w.residual = rr.residual;
        w.accuracy_bound = rr.accuracy_bound;
        w.fj_residual = p.residual;
        w.certified = rr.converged && w.accuracy_bound <= 0.5 * cfg.delta;
        raw.push_back(std::move(w));
    }

    // canonical order then pairwise dedup
    std::sort(raw.begin(), raw.end(), [](const Witness& a, const Witness& b) {
        if (a.distance != b.distance) return a.distance < b.distance;
        return std::lexicographical_compare(a.point.data(), a.point.data() + a.point.size(),
                                            b.point.data(), b.point.data() + b.point.size());
    });
    for (const auto& w : raw) {
        bool dup = false;
        for (const auto& kept : res.witnesses)
            if ((w.point - kept.point).norm() <= cfg.dedup_tol) {
                dup = true;
                break;
            }
        if (!dup) res.witnesses.push_back(w);
    }

    for (const auto& w : res.witnesses) {
        res.min_distance = std::min(res.min_distance, w.distance);
        res.certified_accuracy = std::max(res.certified_accuracy, w.accuracy_bound);
    }
    return res;
}

MinDistanceResult min_distance(const polysys::PolynomialSystem& sys, const Eigen::VectorXd& y,
                               const MinDistanceConfig& cfg, std::uint64_t seed,
                               Backend* backend) {
    InternalBackend internal;
    if (!backend) backend = &internal;

    MinDistanceResult last;
    for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
        std::uint64_t s = seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(attempt);
        Eigen::VectorXd y_eff = y;
        double eta = 0.0;
        if (attempt >= 3) {
            // nudge the test point off a non-generic position, escalating
            // when the previous nudge still tracked as singular
            eta = 1e-10 * std::pow(100.0, attempt - 3) * (1.0 + y.norm());
            Rng rng(s ^ 0x5bf0a8b1ULL);
            Eigen::VectorXd dir(y.size());
            for (int i = 0; i < y.size(); ++i) dir[i] = rng.gaussian();
            dir.normalize();
            y_eff = y + eta * dir;
        }

        FritzJohnSystem fj = build_fritz_john(sys, y_eff, s);
        auto endpoints = backend->solve(fj, cfg, s + 1);

        // unknown conditions (0, e.g. from an external solver) pass the bar
        bool any_healthy =
            std::any_of(endpoints.begin(), endpoints.end(), [&](const PathPoint& p) {
                return p.status == PathStatus::Converged &&
                       (p.condition == 0.0 || p.condition <= cfg.healthy_cond_max);
            });
        bool crossing = has_duplicate_endpoints(endpoints, 1e-9);

        last = harvest_real_endpoints(endpoints, sys, fj, y_eff, cfg);
        last.retries = attempt;
        last.perturbation = (y_eff - y).norm();
        if (any_healthy && !crossing) return last;
        if (attempt == cfg.max_retries) {
            last.failed = !any_healthy;
            last.failure_reason =
                !any_healthy ? "no well-conditioned endpoint on any retry (all paths "
                               "diverged, singular, or ill-conditioned)"
                             : "duplicate endpoints persisted across retries";
            return last;
        }
    }
    return last;  // unreachable
}

// ---------------------------------------------------------------------------
// subprocess backend wire format

std::string square_system_to_json(const homotopy::SquareSystem& sys) {
    nlohmann::json j;
    j["unknowns"] = sys.size();
    nlohmann::json eqs = nlohmann::json::array();
    for (const auto& p : sys.equations()) {
        nlohmann::json terms = nlohmann::json::array();
        for (int t = 0; t < p.num_terms(); ++t) {
            nlohmann::json term;
            term["c"] = {p.coeff(t).real(), p.coeff(t).imag()};
            term["e"] = std::vector<int>(p.exps(t), p.exps(t) + p.num_vars());
            terms.push_back(std::move(term));
        }
        eqs.push_back(std::move(terms));
    }
    j["equations"] = std::move(eqs);
    return j.dump();
}

homotopy::SquareSystem square_system_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    int n = j.at("unknowns").get<int>();
    std::vector<CPolynomial> eqs;
    for (const auto& eq : j.at("equations")) {
        CPolynomial p(n);
        for (const auto& term : eq) {
            auto c = term.at("c");
            p.add_term(Complex(c.at(0).get<double>(), c.at(1).get<double>()),
                       term.at("e").get<std::vector<int>>());
        }
        p.canonicalize();
        eqs.push_back(std::move(p));
    }
    return homotopy::SquareSystem(std::move(eqs));
}

std::string endpoints_to_json(const std::vector<PathPoint>& pts) {
    nlohmann::json j;
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& p : pts) {
        nlohmann::json e;
        e["status"] = homotopy::to_string(p.status);
        e["residual"] = p.residual;
        e["condition"] = std::isfinite(p.condition) ? p.condition : 1e300;
        std::vector<double> re(p.u.size()), im(p.u.size());
        for (int i = 0; i < p.u.size(); ++i) {
            re[i] = p.u[i].real();
            im[i] = p.u[i].imag();
        }
        e["re"] = re;
        e["im"] = im;
        arr.push_back(std::move(e));
    }
    j["endpoints"] = std::move(arr);
    return j.dump();
}

std::vector<PathPoint> endpoints_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    std::vector<PathPoint> out;
    for (const auto& e : j.at("endpoints")) {
        PathPoint p;
        std::string st = e.at("status").get<std::string>();
        if (st == "converged")
            p.status = PathStatus::Converged;
        else if (st == "diverged")
            p.status = PathStatus::Diverged;
        else
            p.status = PathStatus::SingularEndpoint;
        p.residual = e.value("residual", 0.0);
        p.condition = e.value("condition", 0.0);
        auto re = e.at("re").get<std::vector<double>>();
        auto im = e.at("im").get<std::vector<double>>();
        if (re.size() != im.size()) throw std::runtime_error("endpoint re/im size mismatch");
        p.u.resize(static_cast<Eigen::Index>(re.size()));
        for (std::size_t i = 0; i < re.size(); ++i) p.u[i] = Complex(re[i], im[i]);
        p.t = 0.0;
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<PathPoint> SubprocessBackend::solve(const FritzJohnSystem& fj,
                                                const MinDistanceConfig& cfg,
                                                std::uint64_t seed) {
    char tmpl_in[] = "/tmp/varsample_fj_in_XXXXXX";
    char tmpl_out[] = "/tmp/varsample_fj_out_XXXXXX";
    int fd_in = mkstemp(tmpl_in);
    int fd_out = mkstemp(tmpl_out);
    if (fd_in < 0 || fd_out < 0) throw std::runtime_error("cannot create temp files");
    close(fd_in);
    close(fd_out);
    std::string in_path = tmpl_in, out_path = tmpl_out;

    {
        nlohmann::json j = nlohmann::json::parse(square_system_to_json(fj.target));
        j["seed"] = seed;
        j["endpoint_tol"] = cfg.tracker.endpoint_tol;
        std::ofstream out(in_path);
        out << j.dump();
    }

    std::string cmd = solver_path_ + " " + in_path + " " + out_path + " 2>/dev/null";
    int rc = std::system(cmd.c_str());

    std::vector<PathPoint> result;
    std::string err;
    if (rc != 0) {
        err = "external solver exited with status " + std::to_string(rc);
    } else {
        std::ifstream in(out_path);
        std::stringstream buf;
        buf << in.rdbuf();
        try {
            result = endpoints_from_json(buf.str());
        } catch (const std::exception& e) {
            err = std::string("cannot parse solver output: ") + e.what();
        }
    }
    std::remove(in_path.c_str());
    std::remove(out_path.c_str());
    if (!err.empty()) throw std::runtime_error(err);
    return result;
}

}  // namespace varsample::mindist
