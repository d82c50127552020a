#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "varsample/rng.hpp"

namespace varsample::polysys {

using Complex = std::complex<double>;

// Multivariate polynomial with dense exponent vectors, canonical merged form:
// terms sorted lexicographically by exponent vector, no duplicate exponent
// vectors, no exactly-zero coefficients.
template <typename Scalar>
class BasicPolynomial {
public:
    BasicPolynomial() = default;
    explicit BasicPolynomial(int num_vars) : num_vars_(num_vars) {}

    // terms given as (coefficient, exponent vector); canonicalized here
    BasicPolynomial(int num_vars, std::vector<std::pair<Scalar, std::vector<int>>> terms);

    int num_vars() const { return num_vars_; }
    int num_terms() const { return static_cast<int>(coeffs_.size()); }
    bool is_zero() const { return coeffs_.empty(); }
    int total_degree() const;
    int max_exponent(int var) const;

    const Scalar& coeff(int t) const { return coeffs_[t]; }
    const int* exps(int t) const { return exps_.data() + static_cast<std::size_t>(t) * num_vars_; }

    void add_term(const Scalar& c, const std::vector<int>& e);  // requires canonicalize() after
    void canonicalize();

    template <typename T>
    auto evaluate(const T* point) const {
        using R = decltype(Scalar{} * T{});
        R acc{};
        for (int t = 0; t < num_terms(); ++t) {
            R m = R(coeffs_[t]);
            const int* e = exps(t);
            for (int v = 0; v < num_vars_; ++v)
                for (int k = 0; k < e[v]; ++k) m *= point[v];
            acc += m;
        }
        return acc;
    }

    // evaluation against a precomputed power table: pow[v * stride + k] = point[v]^k
    template <typename R>
    R evaluate_pow(const R* pow, int stride) const {
        R acc{};
        for (int t = 0; t < num_terms(); ++t) {
            R m = R(coeffs_[t]);
            const int* e = exps(t);
            for (int v = 0; v < num_vars_; ++v)
                if (e[v] > 0) m *= pow[v * stride + e[v]];
            acc += m;
        }
        return acc;
    }

    BasicPolynomial derivative(int var) const;
    // same polynomial viewed in a larger variable set (original var v maps to var_map[v])
    BasicPolynomial embedded(int new_num_vars, const std::vector<int>& var_map) const;

    BasicPolynomial& operator+=(const BasicPolynomial& o);
    BasicPolynomial& operator-=(const BasicPolynomial& o);
    BasicPolynomial& operator*=(const BasicPolynomial& o);
    BasicPolynomial& operator*=(const Scalar& s);
    friend BasicPolynomial operator+(BasicPolynomial a, const BasicPolynomial& b) { return a += b; }
    friend BasicPolynomial operator-(BasicPolynomial a, const BasicPolynomial& b) { return a -= b; }
    friend BasicPolynomial operator*(BasicPolynomial a, const BasicPolynomial& b) { return a *= b; }
    friend BasicPolynomial operator*(BasicPolynomial a, const Scalar& s) { return a *= s; }

    BasicPolynomial pow(int k) const;
    bool operator==(const BasicPolynomial& o) const = default;

    static BasicPolynomial constant(int num_vars, const Scalar& c);
    static BasicPolynomial variable(int num_vars, int var);

private:
    int num_vars_ = 0;
    std::vector<Scalar> coeffs_;
    std::vector<int> exps_;  // num_vars_ entries per term, row-major
};

using Polynomial = BasicPolynomial<double>;
using CPolynomial = BasicPolynomial<Complex>;

CPolynomial to_complex(const Polynomial& p);

// N-d real polynomials in N variables cutting out a pure d-dimensional variety
class PolynomialSystem {
public:
    PolynomialSystem() = default;
    PolynomialSystem(std::vector<Polynomial> polys, int num_vars, int dim,
                     std::vector<std::string> var_names = {});

    int num_vars() const { return num_vars_; }
    int dim() const { return dim_; }
    int num_polys() const { return static_cast<int>(polys_.size()); }
    const std::vector<Polynomial>& polys() const { return polys_; }
    const std::vector<std::string>& var_names() const { return var_names_; }

    // true when the system already has exactly N-d equations
    bool is_square_for_dim() const { return num_polys() == num_vars_ - dim_; }

    Eigen::VectorXcd evaluate(const Eigen::VectorXcd& x) const;
    Eigen::VectorXd evaluate_real(const Eigen::VectorXd& x) const;
    // row i = gradient of f_i (symbolic differentiation, evaluated at x)
    Eigen::MatrixXcd jacobian(const Eigen::VectorXcd& x) const;
    Eigen::MatrixXd jacobian_real(const Eigen::VectorXd& x) const;

    const Polynomial& gradient(int poly, int var) const { return grads_[poly * num_vars_ + var]; }

private:
    std::vector<Polynomial> polys_;
    int num_vars_ = 0;
    int dim_ = 0;
    std::vector<std::string> var_names_;
    std::vector<Polynomial> grads_;  // num_polys x num_vars, row-major
};

// Random real linear combinations reducing k >= N-d polynomials to exactly
// N-d; points of the target variety stay solutions. No-op when k == N-d.
PolynomialSystem randomize(const PolynomialSystem& sys, std::uint64_t seed);

struct ParseError : std::runtime_error {
    int line;
    int column;
    ParseError(int line_, int col_, const std::string& msg)
        : std::runtime_error("parse error at line " + std::to_string(line_) + ", column " +
                             std::to_string(col_) + ": " + msg),
          line(line_),
          column(col_) {}
};

// Input grammar: header "vars: x1 x2 ..." then one polynomial per line.
// Operators + - * ^, parentheses, decimal literals; whitespace-insensitive.
// dim defaults to num_vars - num_polys unless overridden (-1 = default).
PolynomialSystem parse(const std::string& text, int dim = -1);
std::string print(const PolynomialSystem& sys);
std::string print(const Polynomial& p, const std::vector<std::string>& var_names);

}  // namespace varsample::polysys
