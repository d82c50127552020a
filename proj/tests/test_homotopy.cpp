#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "varsample/homotopy.hpp"
#include "varsample/mindist.hpp"

using namespace varsample;
using namespace varsample::homotopy;
using polysys::Complex;
using polysys::CPolynomial;

namespace {

// univariate polynomial sum_k c_k u^k as a 1-variable system equation
CPolynomial upoly(std::initializer_list<Complex> coeffs) {
    CPolynomial p(1);
    int k = 0;
    for (Complex c : coeffs) {
        if (c != Complex{}) p.add_term(c, {k});
        ++k;
    }
    p.canonicalize();
    return p;
}

}  // namespace

TEST_CASE("total_degree_start: Bezout counts and start roots") {
    // degrees (2,2) -> 4 start solutions
    CPolynomial f1(2), f2(2);
    f1.add_term(Complex(1.0), {2, 0});
    f1.add_term(Complex(-1.0), {0, 1});
    f1.canonicalize();
    f2.add_term(Complex(1.0), {0, 2});
    f2.add_term(Complex(2.0), {1, 0});
    f2.canonicalize();
    SquareSystem sq({f1, f2});
    auto td = total_degree_start(sq, 5);
    CHECK(td.solutions.size() == 4);
    // every start solution satisfies the start system exactly
    for (const auto& s : td.solutions)
        CHECK(td.system.evaluate(s).lpNorm<Eigen::Infinity>() < 1e-14);

    // degree (1) -> single start solution u = 1
    SquareSystem lin({upoly({Complex(-3.0), Complex(2.0)})});
    auto td1 = total_degree_start(lin, 5);
    REQUIRE(td1.solutions.size() == 1);
    CHECK(std::abs(td1.solutions[0][0] - Complex(1.0)) < 1e-15);

    // zero-degree equation rejected
    SquareSystem constant({upoly({Complex(1.0)})});
    CHECK_THROWS_AS(total_degree_start(constant, 5), std::invalid_argument);
}

TEST_CASE("track_path: straight line between u-1 and u-2") {
    SquareSystem start({upoly({Complex(-1.0), Complex(1.0)})});
    SquareSystem target({upoly({Complex(-2.0), Complex(1.0)})});
    Homotopy h(start, target);
    Eigen::VectorXcd u0(1);
    u0 << Complex(1.0);
    TrackerConfig cfg;
    auto p = track_path(h, u0, cfg);
    CHECK(p.status == PathStatus::Converged);
    CHECK(std::abs(p.u[0] - Complex(2.0)) < 1e-10);
    CHECK(p.residual <= cfg.endpoint_tol);
}

TEST_CASE("track_path: gamma-twisted square roots") {
    Rng rng(3);
    Complex gamma = rng.unit_complex();
    CPolynomial s(1);
    s.add_term(gamma, {2});
    s.add_term(-gamma, {0});
    s.canonicalize();  // gamma*(u^2-1)
    SquareSystem start({s});
    SquareSystem target({upoly({Complex(-4.0), Complex(0.0), Complex(1.0)})});  // u^2 - 4
    Homotopy h(start, target);
    TrackerConfig cfg;

    std::vector<Complex> endpoints;
    for (double r : {1.0, -1.0}) {
        Eigen::VectorXcd u0(1);
        u0 << Complex(r);
        auto p = track_path(h, u0, cfg);
        REQUIRE(p.status == PathStatus::Converged);
        endpoints.push_back(p.u[0]);
    }
    // endpoints are +-2 in some order
    std::sort(endpoints.begin(), endpoints.end(),
              [](Complex a, Complex b) { return a.real() < b.real(); });
    CHECK(std::abs(endpoints[0] - Complex(-2.0)) < 1e-9);
    CHECK(std::abs(endpoints[1] - Complex(2.0)) < 1e-9);
}

TEST_CASE("circle Fritz John: eight paths find both distance critical points") {
    auto sys = testutil::circle_system();
    Eigen::VectorXd y(2);
    y << 1.7, 0.6;  // generic test point
    auto fj = mindist::build_fritz_john(sys, y, 11);

    // Bezout number of the square system: degrees (2,2,2,1)
    auto td = total_degree_start(fj.start, 12);
    CHECK(td.solutions.size() == 8);

    Homotopy phase1(td.system, fj.start);
    TrackerConfig cfg;
    auto mids = track_all(phase1, td.solutions, cfg);
    std::vector<Eigen::VectorXcd> starts;
    for (const auto& p : mids)
        if (p.status == PathStatus::Converged) starts.push_back(p.u);
    CHECK(starts.size() >= 2);

    Homotopy phase2(fj.start, fj.target);
    auto ends = track_all(phase2, starts, cfg);

    // analytic critical points of distance to the unit circle: +-y/|y|
    Eigen::VectorXd near = y / y.norm(), far = -y / y.norm();
    bool found_near = false, found_far = false;
    for (const auto& p : ends) {
        if (p.status != PathStatus::Converged) continue;
        CHECK(p.residual <= cfg.endpoint_tol);
        Eigen::VectorXcd x = p.u.head(2);
        if (x.imag().lpNorm<Eigen::Infinity>() > 1e-6) continue;
        Eigen::VectorXd xr = x.real();
        if ((xr - near).norm() < 1e-7) found_near = true;
        if ((xr - far).norm() < 1e-7) found_far = true;
    }
    CHECK(found_near);
    CHECK(found_far);
}

TEST_CASE("endpoints are bitwise reproducible for a fixed seed") {
    auto sys = testutil::circle_system();
    Eigen::VectorXd y(2);
    y << 0.3, -1.4;
    TrackerConfig cfg;

    auto run = [&](int threads) {
        auto fj = mindist::build_fritz_john(sys, y, 21);
        auto td = total_degree_start(fj.start, 22);
        Homotopy h(td.system, fj.start);
        return track_all(h, td.solutions, cfg, threads);
    };
    auto a = run(1);
    auto b = run(1);
    auto c = run(2);  // path-level parallelism must not change per-path results
    REQUIRE(a.size() == b.size());
    REQUIRE(a.size() == c.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].status == b[i].status);
        CHECK(a[i].status == c[i].status);
        if (a[i].status == PathStatus::Converged) {
            CHECK((a[i].u - b[i].u).lpNorm<Eigen::Infinity>() == 0.0);
            CHECK((a[i].u - c[i].u).lpNorm<Eigen::Infinity>() == 0.0);
        }
    }
}

TEST_CASE("every path ends in a terminal status") {
    // u^2 - t deforms to a double root at t=0: expect singular endpoints, not hangs
    SquareSystem start({upoly({Complex(-1.0), Complex(0.0), Complex(1.0)})});  // u^2 - 1
    SquareSystem target({upoly({Complex(0.0), Complex(0.0), Complex(1.0)})});  // u^2
    Homotopy h(start, target);
    TrackerConfig cfg;
    for (double r : {1.0, -1.0}) {
        Eigen::VectorXcd u0(1);
        u0 << Complex(r);
        auto p = track_path(h, u0, cfg);
        CHECK(p.status != PathStatus::Tracking);
        // the double root is still located to loose accuracy
        CHECK(std::abs(p.u[0]) < 1e-4);
    }

    // path to infinity: (1-t)*u + t*(u^2-1) has a root escaping as t -> 0
    // target u - 1 has degree < start: build explicitly
    SquareSystem start2({upoly({Complex(-1.0), Complex(0.0), Complex(1.0)})});
    SquareSystem target2({upoly({Complex(0.5), Complex(0.0), Complex(0.0), Complex(0.0)})});
    // target 0.5 (constant) would be rejected by total_degree, but tracking a
    // homotopy into an unsolvable system must terminate with diverged paths
    Homotopy h2(start2, target2);
    Eigen::VectorXcd u0(1);
    u0 << Complex(1.0);
    auto p = track_path(h2, u0, cfg);
    CHECK((p.status == PathStatus::Diverged || p.status == PathStatus::SingularEndpoint));
}

TEST_CASE("newton_refine: quadratic convergence to sqrt(2)") {
    SquareSystem sq({upoly({Complex(-2.0), Complex(0.0), Complex(1.0)})});  // u^2 - 2
    Eigen::VectorXcd u0(1);
    u0 << Complex(1.4);
    auto r = newton_refine(sq, u0, 1e-12, 20);
    CHECK(r.status == RefineStatus::Ok);
    CHECK(std::abs(r.u[0] - Complex(std::sqrt(2.0))) < 1e-12);
    CHECK(r.residual <= 1e-12);

    // exact root stays fixed
    Eigen::VectorXcd exact(1);
    exact << Complex(std::sqrt(2.0));
    auto r2 = newton_refine(sq, exact, 1e-12, 20);
    CHECK(std::abs(r2.u[0] - exact[0]) < 1e-15);

    // rank-deficient Jacobian at the root gets flagged singular
    CPolynomial f1(2), f2(2);
    f1.add_term(Complex(1.0), {2, 0});  // u^2
    f1.canonicalize();
    f2.add_term(Complex(1.0), {0, 2});  // v^2 - u
    f2.add_term(Complex(-1.0), {1, 0});
    f2.canonicalize();
    SquareSystem rankdef({f1, f2});
    Eigen::VectorXcd z(2);
    z << Complex(1e-3), Complex(1e-3);
    auto r3 = newton_refine(rankdef, z, 1e-28, 80);
    CHECK(r3.status != RefineStatus::Ok);
    CHECK(r3.condition > 1e14);
}

TEST_CASE("tracker config validation") {
    TrackerConfig bad;
    bad.min_step = 0.2;
    bad.max_step = 0.1;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    TrackerConfig neg;
    neg.tracking_tol = -1;
    CHECK_THROWS_AS(neg.validate(), std::invalid_argument);
}
