#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>

#include "helpers.hpp"
#include "varsample/tda.hpp"

using namespace varsample;
using namespace varsample::tda;

namespace {

std::vector<Eigen::VectorXd> unit_square_corners() {
    std::vector<Eigen::VectorXd> pts;
    for (auto [x, y] : {std::pair{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}}) {
        Eigen::VectorXd p(2);
        p << x, y;
        pts.push_back(std::move(p));
    }
    return pts;
}

std::size_t count_points(const PersistenceDiagram& d, int dim) {
    std::size_t n = 0;
    for (const auto& p : d.points) n += p.dim == dim;
    return n;
}

}  // namespace

TEST_CASE("rips: unit square at threshold 1.2 keeps only the sides") {
    auto fc = FiltrationComplex::rips(unit_square_corners(), 1.2, 1);
    CHECK(fc.count(0) == 4);
    CHECK(fc.count(1) == 4);  // diagonals sqrt(2) ~ 1.414 excluded
    CHECK(fc.count(2) == 0);
}

TEST_CASE("rips: unit square at threshold 1.5 fills in") {
    auto fc = FiltrationComplex::rips(unit_square_corners(), 1.5, 1);
    CHECK(fc.count(1) == 6);
    CHECK(fc.count(2) == 4);  // all four triangles, diameter sqrt(2)
    for (std::size_t i = 0; i < fc.count(2); ++i)
        CHECK(fc.diameter(2, i) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("rips: far-apart points give no edges") {
    std::vector<Eigen::VectorXd> pts(2, Eigen::VectorXd::Zero(1));
    pts[1][0] = 3.0;
    auto fc = FiltrationComplex::rips(pts, 1.0, 1);
    CHECK(fc.count(0) == 2);
    CHECK(fc.count(1) == 0);
}

TEST_CASE("rips: simplex cap refuses with an estimate") {
    auto pts = unit_square_corners();
    CHECK_THROWS_AS(FiltrationComplex::rips(pts, 1.5, 1, 5), SimplexCapError);
    try {
        FiltrationComplex::rips(pts, 1.5, 1, 5);
    } catch (const SimplexCapError& e) {
        CHECK(e.count_estimate > 5);
        CHECK(e.cap == 5);
    }
}

TEST_CASE("persistence: hand-reduced unit square") {
    auto fc = FiltrationComplex::rips(unit_square_corners(), 1.5, 1);
    auto diag = compute_persistence(fc);

    // H0: one essential class plus three merges at edge length 1
    REQUIRE(count_points(diag, 0) == 4);
    int finite_h0 = 0, essential_h0 = 0;
    for (const auto& p : diag.points) {
        if (p.dim != 0) continue;
        CHECK(p.birth == 0.0);
        if (std::isinf(p.death)) {
            ++essential_h0;
        } else {
            CHECK(p.death == doctest::Approx(1.0));
            ++finite_h0;
        }
    }
    CHECK(essential_h0 == 1);
    CHECK(finite_h0 == 3);

    // H1: the square cycle [1, sqrt(2))
    REQUIRE(count_points(diag, 1) == 1);
    for (const auto& p : diag.points) {
        if (p.dim != 1) continue;
        CHECK(p.birth == doctest::Approx(1.0));
        CHECK(p.death == doctest::Approx(std::sqrt(2.0)));
    }
}

TEST_CASE("persistence: single point") {
    std::vector<Eigen::VectorXd> pts(1, Eigen::VectorXd::Zero(2));
    auto diag = compute_persistence(FiltrationComplex::rips(pts, 1.0, 1));
    REQUIRE(diag.points.size() == 1);
    CHECK(diag.points[0].dim == 0);
    CHECK(diag.points[0].birth == 0.0);
    CHECK(std::isinf(diag.points[0].death));
}

TEST_CASE("persistence: Betti numbers match the naive oracle on random clouds") {
    Rng rng(20250810);
    for (int trial = 0; trial < 50; ++trial) {
        int n = 3 + static_cast<int>(rng.bits() % 6);  // 3..8 points
        auto pts = testutil::random_cloud(n, 3, rng);
        auto fc = FiltrationComplex::rips(pts, 2.5, 2);
        auto diag = compute_persistence(fc);
        for (double t : {0.15, 0.4, 0.8, 1.1, 1.6, 2.0, 2.4}) {
            auto betti = diag.betti_at(t);
            auto oracle = testutil::brute_betti(pts, t, 2);
            for (int p = 0; p <= 2; ++p) {
                CAPTURE(trial);
                CAPTURE(t);
                CAPTURE(p);
                CHECK(static_cast<int>(betti[p]) == oracle[p]);
            }
        }
    }
}

TEST_CASE("persistence: twist and standard reductions agree") {
    Rng rng(99);
    for (int trial = 0; trial < 25; ++trial) {
        int n = 4 + static_cast<int>(rng.bits() % 5);
        auto pts = testutil::random_cloud(n, 3, rng);
        auto fc = FiltrationComplex::rips(pts, 2.0, 2);
        auto a = compute_persistence(fc);
        auto b = compute_persistence_standard(fc);
        REQUIRE(a.points.size() == b.points.size());
        for (std::size_t i = 0; i < a.points.size(); ++i) {
            CHECK(a.points[i].dim == b.points[i].dim);
            CHECK(a.points[i].birth == b.points[i].birth);
            if (std::isinf(a.points[i].death))
                CHECK(std::isinf(b.points[i].death));
            else
                CHECK(a.points[i].death == b.points[i].death);
        }
    }
}

TEST_CASE("persistence: H0 at value 0 grows with added points") {
    Rng rng(4242);
    auto pts = testutil::random_cloud(5, 2, rng);
    auto before = compute_persistence(FiltrationComplex::rips(pts, 1.0, 1)).betti_at(0.0);
    pts.push_back(Eigen::VectorXd::Constant(2, 9.0));
    auto after = compute_persistence(FiltrationComplex::rips(pts, 1.0, 1)).betti_at(0.0);
    CHECK(after[0] == before[0] + 1);
}

TEST_CASE("diagram stability under small perturbations") {
    Rng rng(31);
    const double eta = 1e-3;
    auto pts = testutil::random_cloud(8, 2, rng);
    auto base = compute_persistence(FiltrationComplex::rips(pts, 2.0, 1));
    auto moved = pts;
    for (auto& p : moved)
        for (int v = 0; v < 2; ++v) p[v] += rng.uniform(-eta, eta);
    auto pert = compute_persistence(FiltrationComplex::rips(moved, 2.0, 1));

    // greedy matching of finite points within dimension
    for (int dim = 0; dim <= 1; ++dim) {
        std::vector<DiagramPoint> a, b;
        for (const auto& p : base.points)
            if (p.dim == dim && !std::isinf(p.death)) a.push_back(p);
        for (const auto& p : pert.points)
            if (p.dim == dim && !std::isinf(p.death)) b.push_back(p);
        for (const auto& pa : a) {
            double best = std::numeric_limits<double>::infinity();
            for (const auto& pb : b)
                best = std::min(best, std::max(std::abs(pa.birth - pb.birth),
                                               std::abs(pa.death - pb.death)));
            // either matched within 2*eta or the point is near the diagonal
            bool near_diag = (pa.death - pa.birth) <= 2 * eta;
            CHECK((best <= 2 * eta || near_diag));
        }
    }
}

TEST_CASE("inference corner values") {
    auto c = inference_corner(4, 0.14, 1e-7);
    CHECK(c.a == doctest::Approx(0.2213594).epsilon(1e-4));  // paper rounds to 0.221
    CHECK(c.b == doctest::Approx(0.5600002));

    auto c1 = inference_corner(1, 1.0, 0.0);
    CHECK(c1.a == doctest::Approx(2.0));
    CHECK(c1.b == doctest::Approx(4.0));

    auto c0 = inference_corner(3, 0.0, 0.0);
    CHECK(c0.a == 0.0);
    CHECK(c0.b == 0.0);

    CHECK_THROWS_AS(inference_corner(0, 0.1, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(inference_corner(2, 0.1, 0.2), std::invalid_argument);
    CHECK_THROWS_AS(inference_corner(2, 0.1, -0.1), std::invalid_argument);
}

TEST_CASE("infer_betti counts and censoring") {
    PersistenceDiagram diag;
    diag.threshold = 1.0;
    diag.p_max = 1;
    diag.points.push_back({0.1, 0.9, 1});

    // corner (0.2, 0.6): the synthetic point counts
    auto v = infer_betti(diag, 2, 0.1154700538, 0.0);  // a ~ 0.2, b ~ 0.4619
    CHECK(v.counts.size() >= 2);

    // direct corner check with handpicked epsilon: a=0.2, b little under 0.9
    PersistenceDiagram d2;
    d2.threshold = 1.0;
    d2.p_max = 1;
    d2.points.push_back({0.1, 0.9, 1});
    auto v2 = infer_betti(d2, 2, 0.1154700538, 0.0);
    // b = 4*eps = 0.4619 < 0.9: the point counts in dim 1
    CHECK(v2.counts[1] == 1);
    CHECK(!v2.threshold_censored);

    // empty diagram
    PersistenceDiagram empty;
    empty.threshold = 2.0;
    auto v3 = infer_betti(empty, 3, 0.1, 0.01);
    for (auto c : v3.counts) CHECK(c == 0);

    // censored: threshold below the corner death bound
    PersistenceDiagram cens;
    cens.threshold = 0.3;
    cens.p_max = 1;
    cens.points.push_back({0.05, kInfDeath, 1});  // alive at 0.3
    auto v4 = infer_betti(cens, 2, 0.1, 0.0);     // b = 0.4 > threshold
    CHECK(v4.threshold_censored);
    CHECK(v4.counts[1] == 0);  // alive-at-threshold cannot be certified

    // same point with a threshold past b counts
    cens.threshold = 0.5;
    auto v5 = infer_betti(cens, 2, 0.1, 0.0);
    CHECK(!v5.threshold_censored);
    CHECK(v5.counts[1] == 1);
}

TEST_CASE("diagram csv round trip") {
    PersistenceDiagram diag;
    diag.ambient_dim = 4;
    diag.epsilon = 0.14;
    diag.delta = 1e-7;
    diag.threshold = 0.6;
    diag.p_max = 2;
    diag.points.push_back({0.0, kInfDeath, 0});
    diag.points.push_back({0.11, 0.52, 1});
    diag.points.push_back({0.25, 0.3000000000000004, 2});

    std::string path = "/tmp/varsample_test_diag.csv";
    write_diagram_csv(diag, path);
    auto back = read_diagram_csv(path);
    REQUIRE(back.points.size() == diag.points.size());
    CHECK(back.ambient_dim == 4);
    CHECK(back.epsilon == 0.14);
    CHECK(back.delta == 1e-7);
    CHECK(back.threshold == 0.6);
    for (std::size_t i = 0; i < diag.points.size(); ++i) {
        CHECK(back.points[i].dim == diag.points[i].dim);
        CHECK(back.points[i].birth == diag.points[i].birth);
        if (std::isinf(diag.points[i].death))
            CHECK(std::isinf(back.points[i].death));
        else
            CHECK(back.points[i].death == diag.points[i].death);
    }
    std::remove(path.c_str());
}

TEST_CASE("svg emission: corner rectangle present, empty diagram is valid") {
    PersistenceDiagram diag;
    diag.threshold = 0.6;
    auto verdict = infer_betti(diag, 4, 0.14, 1e-7);
    std::string path = "/tmp/varsample_test_diag.svg";
    write_diagram_svg(diag, verdict, path);
    std::ifstream in(path);
    std::stringstream buf;
    buf << in.rdbuf();
    std::string svg = buf.str();
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("rect") != std::string::npos);
    CHECK(svg.find("0.221") != std::string::npos);  // corner coordinate in the label
    std::remove(path.c_str());
}
