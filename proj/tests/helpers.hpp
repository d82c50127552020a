#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "varsample/polysys.hpp"
#include "varsample/rng.hpp"
#include "varsample/tda.hpp"

namespace testutil {

using varsample::polysys::PolynomialSystem;
using varsample::polysys::parse;

// --- standard systems -------------------------------------------------------

inline PolynomialSystem circle_system() {
    return parse("vars: x1 x2\nx1^2 + x2^2 - 1\n");
}

inline PolynomialSystem empty_circle_system() {
    return parse("vars: x1 x2\nx1^2 + x2^2 + 1\n");
}

inline PolynomialSystem clifford_torus_system() {
    return parse("vars: x1 y1 x2 y2\nx1^2 + y1^2 - 0.5\nx2^2 + y2^2 - 0.5\n");
}

inline PolynomialSystem pentagon_system() {
    return parse(
        "vars: s1 s2 s3 c1 c2 c3\n"
        "s1^2 + c1^2 - 1\n"
        "s2^2 + c2^2 - 1\n"
        "s3^2 + c3^2 - 1\n"
        "(s1 + s2 + s3)^2 + (1 + c1 + c2 + c3)^2 - 1\n",
        2);
}

// --- independent oracles ----------------------------------------------------

// central finite differences, step h
inline Eigen::MatrixXd fd_jacobian(const PolynomialSystem& sys, const Eigen::VectorXd& x,
                                   double h = 1e-6) {
    const int n = sys.num_vars();
    const int m = sys.num_polys();
    Eigen::MatrixXd J(m, n);
    for (int v = 0; v < n; ++v) {
        Eigen::VectorXd xp = x, xm = x;
        xp[v] += h;
        xm[v] -= h;
        J.col(v) = (sys.evaluate_real(xp) - sys.evaluate_real(xm)) / (2.0 * h);
    }
    return J;
}

inline std::vector<Eigen::VectorXd> circle_oracle(int n_angles) {
    std::vector<Eigen::VectorXd> pts;
    pts.reserve(n_angles);
    for (int k = 0; k < n_angles; ++k) {
        double a = 2.0 * M_PI * k / n_angles;
        Eigen::VectorXd p(2);
        p << std::cos(a), std::sin(a);
        pts.push_back(std::move(p));
    }
    return pts;
}

inline Eigen::VectorXd torus_point(double a1, double a2) {
    const double r = std::sqrt(0.5);
    Eigen::VectorXd p(4);
    p << r * std::cos(a1), r * std::sin(a1), r * std::cos(a2), r * std::sin(a2);
    return p;
}

// grid parametrization oracle for min distance to the Clifford torus
inline double torus_grid_min_distance(const Eigen::VectorXd& y, int grid) {
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid; ++i) {
        double a1 = 2.0 * M_PI * i / grid;
        const double r = std::sqrt(0.5);
        double c1 = r * std::cos(a1), s1 = r * std::sin(a1);
        double d1 = (y[0] - c1) * (y[0] - c1) + (y[1] - s1) * (y[1] - s1);
        for (int j = 0; j < grid; ++j) {
            double a2 = 2.0 * M_PI * j / grid;
            double c2 = r * std::cos(a2), s2 = r * std::sin(a2);
            double d2 = (y[2] - c2) * (y[2] - c2) + (y[3] - s2) * (y[3] - s2);
            best = std::min(best, d1 + d2);
        }
    }
    return std::sqrt(best);
}

// --- naive Z/2 homology oracle ----------------------------------------------

// rank over GF(2) by Gaussian elimination on a dense bit matrix
inline int gf2_rank(std::vector<std::vector<char>> m) {
    if (m.empty()) return 0;
    const std::size_t rows = m.size(), cols = m[0].size();
    int rank = 0;
    std::size_t row = 0;
    for (std::size_t col = 0; col < cols && row < rows; ++col) {
        std::size_t pivot = row;
        while (pivot < rows && !m[pivot][col]) ++pivot;
        if (pivot == rows) continue;
        std::swap(m[row], m[pivot]);
        for (std::size_t r = 0; r < rows; ++r) {
            if (r != row && m[r][col])
                for (std::size_t c = col; c < cols; ++c) m[r][c] ^= m[row][c];
        }
        ++row;
        ++rank;
    }
    return rank;
}

// Betti numbers at parameter t of the Rips complex on `points`, rebuilt from
// scratch: brute-force subset enumeration, full boundary matrices, GF(2)
// rank. Independent of the FiltrationComplex implementation.
inline std::vector<int> brute_betti(const std::vector<Eigen::VectorXd>& points, double t,
                                    int p_max) {
    const int m = static_cast<int>(points.size());
    auto diam_ok = [&](const std::vector<int>& verts) {
        for (std::size_t i = 0; i < verts.size(); ++i)
            for (std::size_t j = i + 1; j < verts.size(); ++j)
                if ((points[verts[i]] - points[verts[j]]).norm() > t) return false;
        return true;
    };

    // enumerate all subsets of size 1..p_max+2 whose diameter is <= t
    std::vector<std::vector<std::vector<int>>> simplices(p_max + 3);
    std::vector<int> tuple;
    auto rec = [&](auto&& self, int start, int want) -> void {
        if (static_cast<int>(tuple.size()) == want) {
            if (diam_ok(tuple)) simplices[want].push_back(tuple);
            return;
        }
        for (int v = start; v < m; ++v) {
            tuple.push_back(v);
            self(self, v + 1, want);
            tuple.pop_back();
        }
    };
    for (int size = 1; size <= p_max + 2; ++size) rec(rec, 0, size);

    auto index_of = [&](int size, const std::vector<int>& key) -> int {
        const auto& list = simplices[size];
        for (std::size_t i = 0; i < list.size(); ++i)
            if (list[i] == key) return static_cast<int>(i);
        return -1;
    };

    // boundary operator from (p)-simplices (size p+1) to (p-1)-simplices
    auto boundary_rank = [&](int p) -> int {
        if (p <= 0) return 0;
        const auto& cols_list = simplices[p + 1];
        const auto& rows_list = simplices[p];
        if (cols_list.empty() || rows_list.empty()) return 0;
        std::vector<std::vector<char>> mat(cols_list.size(),
                                           std::vector<char>(rows_list.size(), 0));
        for (std::size_t s = 0; s < cols_list.size(); ++s) {
            for (std::size_t drop = 0; drop < cols_list[s].size(); ++drop) {
                std::vector<int> face;
                for (std::size_t k = 0; k < cols_list[s].size(); ++k)
                    if (k != drop) face.push_back(cols_list[s][k]);
                mat[s][index_of(p, face)] = 1;
            }
        }
        return gf2_rank(std::move(mat));
    };

    std::vector<int> betti(p_max + 1, 0);
    for (int p = 0; p <= p_max; ++p)
        betti[p] = static_cast<int>(simplices[p + 1].size()) - boundary_rank(p) -
                   boundary_rank(p + 1);
    return betti;
}

inline std::vector<Eigen::VectorXd> random_cloud(int n, int dim, varsample::Rng& rng,
                                                 double scale = 1.0) {
    std::vector<Eigen::VectorXd> pts;
    pts.reserve(n);
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd p(dim);
        for (int d = 0; d < dim; ++d) p[d] = rng.uniform(-scale, scale);
        pts.push_back(std::move(p));
    }
    return pts;
}

}  // namespace testutil
