#include "varsample/homotopy.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace varsample::homotopy {

SquareSystem::SquareSystem(std::vector<CPolynomial> equations) : eqs_(std::move(equations)) {
    n_ = static_cast<int>(eqs_.size());
    if (n_ == 0) throw std::invalid_argument("empty system");
    for (const auto& e : eqs_)
        if (e.num_vars() != n_)
            throw std::invalid_argument("system is not square: #equations != #unknowns");
    jac_.reserve(static_cast<std::size_t>(n_) * n_);
    for (const auto& e : eqs_)
        for (int v = 0; v < n_; ++v) jac_.push_back(e.derivative(v));
}

Eigen::VectorXcd SquareSystem::evaluate(const Eigen::VectorXcd& u) const {
    if (u.size() != n_) throw std::invalid_argument("point dimension mismatch");
    Eigen::VectorXcd H(n_);
    for (int i = 0; i < n_; ++i) H[i] = eqs_[i].evaluate(u.data());
    return H;
}

void SquareSystem::evaluate_with_jacobian(const Eigen::VectorXcd& u, Eigen::VectorXcd& H,
                                          Eigen::MatrixXcd& J) const {
    if (u.size() != n_) throw std::invalid_argument("point dimension mismatch");
    H.resize(n_);
    J.resize(n_, n_);
    for (int i = 0; i < n_; ++i) {
        H[i] = eqs_[i].evaluate(u.data());
        for (int v = 0; v < n_; ++v) J(i, v) = jac_[i * n_ + v].evaluate(u.data());
    }
}

const char* to_string(PathStatus s) {
    switch (s) {
        case PathStatus::Tracking: return "tracking";
        case PathStatus::Converged: return "converged";
        case PathStatus::Diverged: return "diverged";
        case PathStatus::SingularEndpoint: return "singular-endpoint";
    }
    return "?";
}

void TrackerConfig::validate() const {
    if (!(tracking_tol > 0.0) || !(endpoint_tol > 0.0))
        throw std::invalid_argument("tolerances must be positive");
    if (!(0.0 < min_step && min_step < max_step && max_step <= 1.0))
        throw std::invalid_argument("need 0 < min_step < max_step <= 1");
    if (max_newton_iter < 1) throw std::invalid_argument("max_newton_iter must be >= 1");
}

// ---------------------------------------------------------------------------
// Homotopy

Homotopy::TPoly Homotopy::merge(const CPolynomial& target, const CPolynomial& start, int n) {
    // union of exponent vectors; c(t) = target + t*(start - target)
    struct Row {
        std::vector<int> e;
        Complex c0{}, c1{};
    };
    std::vector<Row> rows;
    auto find = [&](const int* e) -> Row& {
        for (auto& r : rows)
            if (std::equal(r.e.begin(), r.e.end(), e)) return r;
        rows.push_back({std::vector<int>(e, e + n), Complex{}, Complex{}});
        return rows.back();
    };
    for (int t = 0; t < target.num_terms(); ++t) {
        Row& r = find(target.exps(t));
        r.c0 += target.coeff(t);
        r.c1 -= target.coeff(t);
    }
    for (int t = 0; t < start.num_terms(); ++t) find(start.exps(t)).c1 += start.coeff(t);

    TPoly out;
    for (auto& r : rows) {
        if (r.c0 == Complex{} && r.c1 == Complex{}) continue;
        out.c0.push_back(r.c0);
        out.c1.push_back(r.c1);
        out.exps.insert(out.exps.end(), r.e.begin(), r.e.end());
    }
    return out;
}

Homotopy::Homotopy(const SquareSystem& start, const SquareSystem& target)
    : n_(target.size()), target_(&target) {
    if (start.size() != target.size())
        throw std::invalid_argument("start/target size mismatch");
    int max_exp = 0;
    for (int i = 0; i < n_; ++i) {
        eqs_.push_back(merge(target.equations()[i], start.equations()[i], n_));
        for (int v = 0; v < n_; ++v)
            jac_.push_back(
                merge(target.jacobian_entry(i, v), start.jacobian_entry(i, v), n_));
    }
    for (const auto& p : eqs_)
        for (int e : p.exps) max_exp = std::max(max_exp, e);
    stride_ = max_exp + 1;
}

void Homotopy::fill_pow(const Eigen::VectorXcd& u, EvalWorkspace& ws) const {
    ws.pow.resize(static_cast<std::size_t>(n_) * stride_);
    for (int v = 0; v < n_; ++v) {
        Complex* row = ws.pow.data() + static_cast<std::size_t>(v) * stride_;
        row[0] = Complex(1.0, 0.0);
        for (int k = 1; k < stride_; ++k) row[k] = row[k - 1] * u[v];
    }
}

Complex Homotopy::eval_tpoly(const TPoly& p, double t, const Complex* pow) const {
    Complex acc{};
    const std::size_t nt = p.c0.size();
    const int* e = p.exps.data();
    for (std::size_t k = 0; k < nt; ++k, e += n_) {
        Complex m = p.c0[k] + t * p.c1[k];
        for (int v = 0; v < n_; ++v)
            if (e[v] > 0) m *= pow[static_cast<std::size_t>(v) * stride_ + e[v]];
        acc += m;
    }
    return acc;
}

Complex Homotopy::eval_tpoly_slope(const TPoly& p, const Complex* pow) const {
    Complex acc{};
    const std::size_t nt = p.c0.size();
    const int* e = p.exps.data();
    for (std::size_t k = 0; k < nt; ++k, e += n_) {
        if (p.c1[k] == Complex{}) continue;
        Complex m = p.c1[k];
        for (int v = 0; v < n_; ++v)
            if (e[v] > 0) m *= pow[static_cast<std::size_t>(v) * stride_ + e[v]];
        acc += m;
    }
    return acc;
}

void Homotopy::evaluate(const Eigen::VectorXcd& u, double t, Eigen::VectorXcd& H,
                        EvalWorkspace& ws) const {
    fill_pow(u, ws);
    H.resize(n_);
    for (int i = 0; i < n_; ++i) H[i] = eval_tpoly(eqs_[i], t, ws.pow.data());
}

void Homotopy::evaluate_with_jacobian(const Eigen::VectorXcd& u, double t, Eigen::VectorXcd& H,
                                      Eigen::MatrixXcd& J, EvalWorkspace& ws) const {
    fill_pow(u, ws);
    H.resize(n_);
    J.resize(n_, n_);
    for (int i = 0; i < n_; ++i) {
        H[i] = eval_tpoly(eqs_[i], t, ws.pow.data());
        for (int v = 0; v < n_; ++v)
            J(i, v) = eval_tpoly(jac_[i * n_ + v], t, ws.pow.data());
    }
}

void Homotopy::dt(const Eigen::VectorXcd& u, Eigen::VectorXcd& out, EvalWorkspace& ws) const {
    fill_pow(u, ws);
    out.resize(n_);
    for (int i = 0; i < n_; ++i) out[i] = eval_tpoly_slope(eqs_[i], ws.pow.data());
}

// ---------------------------------------------------------------------------
// start systems

StartSystem total_degree_start(const SquareSystem& square, std::uint64_t seed) {
    const int n = square.size();
    Rng rng(seed);
    std::vector<int> degrees(n);
    long double bezout = 1.0L;
    for (int i = 0; i < n; ++i) {
        degrees[i] = square.degree(i);
        if (degrees[i] < 1) throw std::invalid_argument("zero-degree equation in start system");
        bezout *= degrees[i];
    }
    if (bezout > 5e6L)
        throw std::invalid_argument("Bezout count too large to enumerate start solutions");

    std::vector<CPolynomial> eqs;
    std::vector<Complex> gammas(n);
    for (int i = 0; i < n; ++i) {
        gammas[i] = rng.unit_complex();
        CPolynomial p(n);
        std::vector<int> e(n, 0);
        e[i] = degrees[i];
        p.add_term(gammas[i], e);
        std::fill(e.begin(), e.end(), 0);
        p.add_term(-gammas[i], e);
        p.canonicalize();
        eqs.push_back(std::move(p));
    }

    StartSystem out{SquareSystem(std::move(eqs)), {}};
    const auto total = static_cast<std::size_t>(bezout);
    out.solutions.reserve(total);
    std::vector<int> idx(n, 0);
    for (;;) {
        Eigen::VectorXcd u(n);
        for (int i = 0; i < n; ++i) {
            double ang = 2.0 * M_PI * idx[i] / degrees[i];
            u[i] = Complex(std::cos(ang), std::sin(ang));
        }
        out.solutions.push_back(std::move(u));
        int i = n - 1;
        while (i >= 0) {
            if (++idx[i] < degrees[i]) break;
            idx[i] = 0;
            --i;
        }
        if (i < 0) break;
    }
    return out;
}

// ---------------------------------------------------------------------------
// tracking

namespace {

// Davidenko tangent: J_H(u,t) * du = -dH/dt
bool tangent(const Homotopy& h, const Eigen::VectorXcd& u, double t, Eigen::VectorXcd& du,
             EvalWorkspace& ws, Eigen::VectorXcd& Hbuf, Eigen::MatrixXcd& Jbuf) {
    h.evaluate_with_jacobian(u, t, Hbuf, Jbuf, ws);
    Eigen::VectorXcd rhs(h.size());
    h.dt(u, rhs, ws);
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(Jbuf);
    du = lu.solve(-rhs);
    return du.allFinite();
}

}  // namespace

PathPoint track_path(const Homotopy& h, const Eigen::VectorXcd& start,
                     const TrackerConfig& cfg) {
    cfg.validate();
    const int n = h.size();
    if (start.size() != n) throw std::invalid_argument("start point dimension mismatch");

    // endgame: below this t, jump straight to 0 and let Newton decide
    const double jump_t = 1e-10;

    EvalWorkspace ws;
    Eigen::VectorXcd H(n), k1(n), k2(n), k3(n), k4(n), u_pred(n), du(n);
    Eigen::MatrixXcd J(n, n);

    PathPoint p;
    p.u = start;
    p.t = 1.0;
    p.step_size = std::min(cfg.max_step, 0.1);
    int successes = 0;

    auto newton_correct = [&](Eigen::VectorXcd& u, double t, double tol, int iters,
                              double& res) -> bool {
        for (int it = 0; it < iters; ++it) {
            h.evaluate_with_jacobian(u, t, H, J, ws);
            res = H.lpNorm<Eigen::Infinity>();
            if (res <= tol) return true;
            Eigen::PartialPivLU<Eigen::MatrixXcd> lu(J);
            Eigen::VectorXcd step = lu.solve(H);
            if (!step.allFinite()) return false;
            u -= step;
        }
        h.evaluate(u, t, H, ws);
        res = H.lpNorm<Eigen::Infinity>();
        return res <= tol;
    };

    for (;;) {
        if (p.steps++ > cfg.max_steps) {
            p.status = PathStatus::SingularEndpoint;
            return p;
        }
        if (p.u.lpNorm<Eigen::Infinity>() > cfg.divergence_bound) {
            p.status = PathStatus::Diverged;
            return p;
        }

        double h_eff = std::min(p.step_size, p.t);
        if (p.t < cfg.endgame_start_t && p.t > jump_t) h_eff = std::min(h_eff, 0.5 * p.t);
        double t_next = p.t - h_eff;
        if (p.t <= jump_t || t_next < jump_t) t_next = 0.0;
        const double dt_step = t_next - p.t;  // negative

        // classic RK4 on the Davidenko ODE
        bool ok = tangent(h, p.u, p.t, k1, ws, H, J);
        if (ok) ok = tangent(h, p.u + 0.5 * dt_step * k1, p.t + 0.5 * dt_step, k2, ws, H, J);
        if (ok) ok = tangent(h, p.u + 0.5 * dt_step * k2, p.t + 0.5 * dt_step, k3, ws, H, J);
        if (ok) ok = tangent(h, p.u + dt_step * k3, t_next, k4, ws, H, J);
        bool corrected = false;
        double res = 0.0;
        if (ok) {
            u_pred = p.u + (dt_step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if (u_pred.allFinite() &&
                u_pred.lpNorm<Eigen::Infinity>() <= cfg.divergence_bound) {
                corrected = newton_correct(u_pred, t_next, cfg.tracking_tol,
                                           cfg.max_newton_iter, res);
                if (!corrected && res > cfg.divergence_bound) {
                    p.status = PathStatus::Diverged;
                    return p;
                }
            }
        }

        if (corrected) {
            p.u = u_pred;
            p.t = t_next;
            p.residual = res;
            if (p.t == 0.0) {
                // polish to endpoint tolerance; nonconvergence marks the
                // endpoint singular rather than raising an error
                if (newton_correct(p.u, 0.0, cfg.endpoint_tol, 30, p.residual)) {
                    h.evaluate_with_jacobian(p.u, 0.0, H, J, ws);
                    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(J);
                    double smin = svd.singularValues().minCoeff();
                    double smax = svd.singularValues().maxCoeff();
                    p.condition = smin > 0.0 ? smax / smin
                                             : std::numeric_limits<double>::infinity();
                    bool singular = p.condition > cfg.endpoint_cond_max;
                    p.status = singular ? PathStatus::SingularEndpoint : PathStatus::Converged;
                } else {
                    p.status = p.residual > cfg.divergence_bound ? PathStatus::Diverged
                                                                 : PathStatus::SingularEndpoint;
                }
                return p;
            }
            if (++successes >= 5) {
                p.step_size = std::min(2.0 * p.step_size, cfg.max_step);
                successes = 0;
            }
        } else {
            p.step_size *= 0.5;
            successes = 0;
            if (p.step_size < cfg.min_step) {
                p.status = PathStatus::SingularEndpoint;
                return p;
            }
        }
    }
}

std::vector<PathPoint> track_all(const Homotopy& h, const std::vector<Eigen::VectorXcd>& starts,
                                 const TrackerConfig& cfg, int threads) {
    std::vector<PathPoint> out(starts.size());
    if (threads <= 1 || starts.size() < 2) {
        for (std::size_t i = 0; i < starts.size(); ++i) out[i] = track_path(h, starts[i], cfg);
        return out;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= starts.size()) return;
            out[i] = track_path(h, starts[i], cfg);
        }
    };
    std::vector<std::thread> pool;
    int nt = std::min<int>(threads, static_cast<int>(starts.size()));
    pool.reserve(nt);
    for (int i = 0; i < nt; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    return out;
}

RefineResult newton_refine(const SquareSystem& square, const Eigen::VectorXcd& u0, double tol,
                           int max_iter) {
    RefineResult r;
    r.u = u0;
    Eigen::VectorXcd H;
    Eigen::MatrixXcd J;
    for (int it = 0; it < max_iter; ++it) {
        square.evaluate_with_jacobian(r.u, H, J);
        r.residual = H.lpNorm<Eigen::Infinity>();
        if (r.residual <= tol) break;
        Eigen::PartialPivLU<Eigen::MatrixXcd> lu(J);
        Eigen::VectorXcd step = lu.solve(H);
        if (!step.allFinite()) break;
        r.u -= step;
    }
    square.evaluate_with_jacobian(r.u, H, J);
    r.residual = H.lpNorm<Eigen::Infinity>();

    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(J);
    double smin = svd.singularValues().minCoeff();
    double smax = svd.singularValues().maxCoeff();
    r.condition = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
    if (r.condition > 1e14)
        r.status = RefineStatus::Singular;
    else if (r.residual > tol)
        r.status = RefineStatus::NoConvergence;
    else
        r.status = RefineStatus::Ok;
    return r;
}

}  // namespace varsample::homotopy
