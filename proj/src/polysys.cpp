#include "varsample/polysys.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <numeric>
#include <sstream>

namespace varsample::polysys {

namespace {

int lex_compare(const int* a, const int* b, int n) {
    for (int i = 0; i < n; ++i) {
        if (a[i] != b[i]) return a[i] < b[i] ? -1 : 1;
    }
    return 0;
}

}  // namespace

template <typename Scalar>
BasicPolynomial<Scalar>::BasicPolynomial(int num_vars,
                                         std::vector<std::pair<Scalar, std::vector<int>>> terms)
    : num_vars_(num_vars) {
    for (auto& [c, e] : terms) add_term(c, e);
    canonicalize();
}

template <typename Scalar>
void BasicPolynomial<Scalar>::add_term(const Scalar& c, const std::vector<int>& e) {
    if (static_cast<int>(e.size()) != num_vars_)
        throw std::invalid_argument("term exponent vector has wrong length");
    for (int k : e)
        if (k < 0) throw std::invalid_argument("negative exponent");
    coeffs_.push_back(c);
    exps_.insert(exps_.end(), e.begin(), e.end());
}

template <typename Scalar>
void BasicPolynomial<Scalar>::canonicalize() {
    const int n = num_terms();
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return lex_compare(exps(a), exps(b), num_vars_) < 0;
    });

    std::vector<Scalar> new_coeffs;
    std::vector<int> new_exps;
    new_coeffs.reserve(n);
    new_exps.reserve(exps_.size());
    for (int idx = 0; idx < n;) {
        int j = idx;
        Scalar c = coeffs_[order[idx]];
        while (++j < n && lex_compare(exps(order[idx]), exps(order[j]), num_vars_) == 0)
            c += coeffs_[order[j]];
        if (c != Scalar{}) {
            new_coeffs.push_back(c);
            const int* e = exps(order[idx]);
            new_exps.insert(new_exps.end(), e, e + num_vars_);
        }
        idx = j;
    }
    coeffs_ = std::move(new_coeffs);
    exps_ = std::move(new_exps);
}

template <typename Scalar>
int BasicPolynomial<Scalar>::total_degree() const {
    int deg = 0;
    for (int t = 0; t < num_terms(); ++t) {
        const int* e = exps(t);
        deg = std::max(deg, std::accumulate(e, e + num_vars_, 0));
    }
    return deg;
}

template <typename Scalar>
int BasicPolynomial<Scalar>::max_exponent(int var) const {
    int m = 0;
    for (int t = 0; t < num_terms(); ++t) m = std::max(m, exps(t)[var]);
    return m;
}

template <typename Scalar>
BasicPolynomial<Scalar> BasicPolynomial<Scalar>::derivative(int var) const {
    BasicPolynomial out(num_vars_);
    for (int t = 0; t < num_terms(); ++t) {
        const int* e = exps(t);
        if (e[var] == 0) continue;
        std::vector<int> de(e, e + num_vars_);
        de[var] -= 1;
        out.add_term(coeffs_[t] * Scalar(static_cast<double>(e[var])), de);
    }
    out.canonicalize();
    return out;
}

template <typename Scalar>
BasicPolynomial<Scalar> BasicPolynomial<Scalar>::embedded(int new_num_vars,
                                                          const std::vector<int>& var_map) const {
    BasicPolynomial out(new_num_vars);
    std::vector<int> e2(new_num_vars);
    for (int t = 0; t < num_terms(); ++t) {
        std::fill(e2.begin(), e2.end(), 0);
        const int* e = exps(t);
        for (int v = 0; v < num_vars_; ++v) e2[var_map[v]] = e[v];
        out.add_term(coeffs_[t], e2);
    }
    out.canonicalize();
    return out;
}

template <typename Scalar>
BasicPolynomial<Scalar>& BasicPolynomial<Scalar>::operator+=(const BasicPolynomial& o) {
    if (num_vars_ != o.num_vars_) throw std::invalid_argument("mixed variable counts");
    for (int t = 0; t < o.num_terms(); ++t) {
        coeffs_.push_back(o.coeffs_[t]);
        exps_.insert(exps_.end(), o.exps(t), o.exps(t) + num_vars_);
    }
    canonicalize();
    return *this;
}

template <typename Scalar>
BasicPolynomial<Scalar>& BasicPolynomial<Scalar>::operator-=(const BasicPolynomial& o) {
    if (num_vars_ != o.num_vars_) throw std::invalid_argument("mixed variable counts");
    for (int t = 0; t < o.num_terms(); ++t) {
        coeffs_.push_back(-o.coeffs_[t]);
        exps_.insert(exps_.end(), o.exps(t), o.exps(t) + num_vars_);
    }
    canonicalize();
    return *this;
}

template <typename Scalar>
BasicPolynomial<Scalar>& BasicPolynomial<Scalar>::operator*=(const BasicPolynomial& o) {
    if (num_vars_ != o.num_vars_) throw std::invalid_argument("mixed variable counts");
    BasicPolynomial out(num_vars_);
    std::vector<int> e(num_vars_);
    for (int s = 0; s < num_terms(); ++s)
        for (int t = 0; t < o.num_terms(); ++t) {
            for (int v = 0; v < num_vars_; ++v) e[v] = exps(s)[v] + o.exps(t)[v];
            out.add_term(coeffs_[s] * o.coeffs_[t], e);
        }
    out.canonicalize();
    return *this = std::move(out);
}

template <typename Scalar>
BasicPolynomial<Scalar>& BasicPolynomial<Scalar>::operator*=(const Scalar& s) {
    if (s == Scalar{}) {
        coeffs_.clear();
        exps_.clear();
        return *this;
    }
    for (auto& c : coeffs_) c *= s;
    return *this;
}

template <typename Scalar>
BasicPolynomial<Scalar> BasicPolynomial<Scalar>::pow(int k) const {
    if (k < 0) throw std::invalid_argument("negative power");
    BasicPolynomial acc = constant(num_vars_, Scalar(1.0));
    for (int i = 0; i < k; ++i) acc *= *this;
    return acc;
}

template <typename Scalar>
BasicPolynomial<Scalar> BasicPolynomial<Scalar>::constant(int num_vars, const Scalar& c) {
    BasicPolynomial p(num_vars);
    if (c != Scalar{}) p.add_term(c, std::vector<int>(num_vars, 0));
    return p;
}

template <typename Scalar>
BasicPolynomial<Scalar> BasicPolynomial<Scalar>::variable(int num_vars, int var) {
    BasicPolynomial p(num_vars);
    std::vector<int> e(num_vars, 0);
    e[var] = 1;
    p.add_term(Scalar(1.0), e);
    return p;
}

template class BasicPolynomial<double>;
template class BasicPolynomial<Complex>;

CPolynomial to_complex(const Polynomial& p) {
    CPolynomial out(p.num_vars());
    for (int t = 0; t < p.num_terms(); ++t)
        out.add_term(Complex(p.coeff(t), 0.0),
                     std::vector<int>(p.exps(t), p.exps(t) + p.num_vars()));
    out.canonicalize();
    return out;
}

PolynomialSystem::PolynomialSystem(std::vector<Polynomial> polys, int num_vars, int dim,
                                   std::vector<std::string> var_names)
    : polys_(std::move(polys)), num_vars_(num_vars), dim_(dim), var_names_(std::move(var_names)) {
    if (dim_ < 0 || dim_ >= num_vars_) throw std::invalid_argument("need 0 <= dim < num_vars");
    for (const auto& p : polys_)
        if (p.num_vars() != num_vars_) throw std::invalid_argument("polynomial variable mismatch");
    if (var_names_.empty()) {
        for (int v = 0; v < num_vars_; ++v) var_names_.push_back("x" + std::to_string(v + 1));
    }
    grads_.reserve(polys_.size() * num_vars_);
    for (const auto& p : polys_)
        for (int v = 0; v < num_vars_; ++v) grads_.push_back(p.derivative(v));
}

Eigen::VectorXcd PolynomialSystem::evaluate(const Eigen::VectorXcd& x) const {
    if (x.size() != num_vars_) throw std::invalid_argument("point dimension mismatch");
    Eigen::VectorXcd out(num_polys());
    for (int i = 0; i < num_polys(); ++i) out[i] = polys_[i].evaluate(x.data());
    return out;
}

Eigen::VectorXd PolynomialSystem::evaluate_real(const Eigen::VectorXd& x) const {
    if (x.size() != num_vars_) throw std::invalid_argument("point dimension mismatch");
    Eigen::VectorXd out(num_polys());
    for (int i = 0; i < num_polys(); ++i) out[i] = polys_[i].evaluate(x.data());
    return out;
}

Eigen::MatrixXcd PolynomialSystem::jacobian(const Eigen::VectorXcd& x) const {
    if (x.size() != num_vars_) throw std::invalid_argument("point dimension mismatch");
    Eigen::MatrixXcd out(num_polys(), num_vars_);
    for (int i = 0; i < num_polys(); ++i)
        for (int v = 0; v < num_vars_; ++v) out(i, v) = gradient(i, v).evaluate(x.data());
    return out;
}

Eigen::MatrixXd PolynomialSystem::jacobian_real(const Eigen::VectorXd& x) const {
    if (x.size() != num_vars_) throw std::invalid_argument("point dimension mismatch");
    Eigen::MatrixXd out(num_polys(), num_vars_);
    for (int i = 0; i < num_polys(); ++i)
        for (int v = 0; v < num_vars_; ++v) out(i, v) = gradient(i, v).evaluate(x.data());
    return out;
}

PolynomialSystem randomize(const PolynomialSystem& sys, std::uint64_t seed) {
    const int target = sys.num_vars() - sys.dim();
    const int k = sys.num_polys();
    if (k < target) throw std::invalid_argument("fewer polynomials than num_vars - dim");
    if (k == target) return sys;

    Rng rng(seed);
    std::vector<Polynomial> out;
    out.reserve(target);
    for (int i = 0; i < target; ++i) {
        Polynomial combo(sys.num_vars());
        for (int j = 0; j < k; ++j) {
            Polynomial scaled = sys.polys()[j];
            scaled *= rng.uniform_away_from_zero();
            combo += scaled;
        }
        out.push_back(std::move(combo));
    }
    return PolynomialSystem(std::move(out), sys.num_vars(), sys.dim(), sys.var_names());
}

// ---------------------------------------------------------------------------
// parsing

namespace {

struct Token {
    enum Kind { Number, Ident, Plus, Minus, Star, Caret, LParen, RParen, End } kind;
    double value = 0.0;
    std::string text;
    int line = 0;
    int col = 0;
};

class Lexer {
public:
    Lexer(const std::string& s, int line) : s_(s), line_(line) {}

    Token next() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        Token t;
        t.line = line_;
        t.col = static_cast<int>(pos_) + 1;
        if (pos_ >= s_.size()) {
            t.kind = Token::End;
            return t;
        }
        char c = s_[pos_];
        switch (c) {
            case '+': ++pos_; t.kind = Token::Plus; return t;
            case '-': ++pos_; t.kind = Token::Minus; return t;
            case '*': ++pos_; t.kind = Token::Star; return t;
            case '^': ++pos_; t.kind = Token::Caret; return t;
            case '(': ++pos_; t.kind = Token::LParen; return t;
            case ')': ++pos_; t.kind = Token::RParen; return t;
            default: break;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t start = pos_;
            while (pos_ < s_.size() &&
                   (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.'))
                ++pos_;
            if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
                std::size_t mark = pos_++;
                if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
                if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
                    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_])))
                        ++pos_;
                } else {
                    pos_ = mark;  // bare 'e' belongs to an identifier-like tail; reject below
                }
            }
            t.kind = Token::Number;
            t.text = s_.substr(start, pos_ - start);
            try {
                std::size_t used = 0;
                t.value = std::stod(t.text, &used);
                if (used != t.text.size()) throw std::invalid_argument("");
            } catch (const std::exception&) {
                throw ParseError(t.line, t.col, "bad numeric literal '" + t.text + "'");
            }
            return t;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) ||
                                        s_[pos_] == '_'))
                ++pos_;
            t.kind = Token::Ident;
            t.text = s_.substr(start, pos_ - start);
            return t;
        }
        throw ParseError(t.line, t.col, std::string("unexpected character '") + c + "'");
    }

private:
    const std::string& s_;
    std::size_t pos_ = 0;
    int line_;
};

class LineParser {
public:
    LineParser(const std::string& line, int line_no, const std::map<std::string, int>& vars,
               int num_vars)
        : lexer_(line, line_no), vars_(vars), num_vars_(num_vars) {
        advance();
    }

    Polynomial parse_expr() {
        Polynomial p = parse_sum();
        expect(Token::End, "operator or end of line");
        return p;
    }

private:
    Polynomial parse_sum() {
        Polynomial p = parse_term_signed();
        while (cur_.kind == Token::Plus || cur_.kind == Token::Minus) {
            bool minus = cur_.kind == Token::Minus;
            advance();
            Polynomial q = parse_term();
            if (minus)
                p -= q;
            else
                p += q;
        }
        return p;
    }

    Polynomial parse_term_signed() {
        int sign = 1;
        while (cur_.kind == Token::Plus || cur_.kind == Token::Minus) {
            if (cur_.kind == Token::Minus) sign = -sign;
            advance();
        }
        Polynomial p = parse_term();
        if (sign < 0) p *= -1.0;
        return p;
    }

    Polynomial parse_term() {
        Polynomial p = parse_factor();
        while (cur_.kind == Token::Star) {
            advance();
            p *= parse_factor();
        }
        return p;
    }

    Polynomial parse_factor() {
        Polynomial base = parse_base();
        if (cur_.kind == Token::Caret) {
            advance();
            if (cur_.kind != Token::Number)
                throw ParseError(cur_.line, cur_.col, "expected integer exponent after '^'");
            double v = cur_.value;
            int k = static_cast<int>(v);
            if (k < 0 || static_cast<double>(k) != v)
                throw ParseError(cur_.line, cur_.col, "exponent must be a non-negative integer");
            advance();
            return base.pow(k);
        }
        return base;
    }

    Polynomial parse_base() {
        switch (cur_.kind) {
            case Token::Number: {
                Polynomial p = Polynomial::constant(num_vars_, cur_.value);
                advance();
                return p;
            }
            case Token::Ident: {
                auto it = vars_.find(cur_.text);
                if (it == vars_.end())
                    throw ParseError(cur_.line, cur_.col, "undeclared variable '" + cur_.text + "'");
                Polynomial p = Polynomial::variable(num_vars_, it->second);
                advance();
                return p;
            }
            case Token::LParen: {
                advance();
                Polynomial p = parse_sum();
                expect(Token::RParen, "')'");
                advance();
                return p;
            }
            case Token::Minus: {
                advance();
                Polynomial p = parse_factor();
                p *= -1.0;
                return p;
            }
            default:
                throw ParseError(cur_.line, cur_.col, "expected number, variable, or '('");
        }
    }

    void expect(Token::Kind k, const std::string& what) {
        if (cur_.kind != k) throw ParseError(cur_.line, cur_.col, "expected " + what);
    }

    void advance() { cur_ = lexer_.next(); }

    Lexer lexer_;
    Token cur_;
    const std::map<std::string, int>& vars_;
    int num_vars_;
};

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace

PolynomialSystem parse(const std::string& text, int dim) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    std::vector<std::string> names;
    std::map<std::string, int> vars;
    std::vector<Polynomial> polys;
    bool have_header = false;

    while (std::getline(in, line)) {
        ++line_no;
        std::string body = trim(line);
        if (body.empty() || body[0] == '#') continue;
        if (!have_header) {
            if (body.rfind("vars:", 0) != 0)
                throw ParseError(line_no, 1, "expected header line 'vars: x1 x2 ...'");
            std::istringstream hs(body.substr(5));
            std::string name;
            while (hs >> name) {
                if (vars.count(name))
                    throw ParseError(line_no, 1, "duplicate variable '" + name + "'");
                vars[name] = static_cast<int>(names.size());
                names.push_back(name);
            }
            if (names.empty()) throw ParseError(line_no, 1, "no variables declared");
            have_header = true;
            continue;
        }
        LineParser lp(line, line_no, vars, static_cast<int>(names.size()));
        polys.push_back(lp.parse_expr());
    }
    if (!have_header) throw ParseError(1, 1, "missing 'vars:' header");
    if (polys.empty()) throw ParseError(line_no, 1, "no polynomials given");

    const int n = static_cast<int>(names.size());
    if (dim < 0) dim = n - static_cast<int>(polys.size());
    if (dim < 0 || dim >= n)
        throw ParseError(line_no, 1, "system dimension out of range (got dim " +
                                          std::to_string(dim) + " with " + std::to_string(n) +
                                          " variables)");
    return PolynomialSystem(std::move(polys), n, dim, std::move(names));
}

std::string print(const Polynomial& p, const std::vector<std::string>& var_names) {
    if (p.is_zero()) return "0";
    std::ostringstream out;
    out.precision(17);
    for (int t = 0; t < p.num_terms(); ++t) {
        double c = p.coeff(t);
        if (t == 0) {
            if (c < 0) out << "- ";
        } else {
            out << (c < 0 ? " - " : " + ");
        }
        double a = std::abs(c);
        const int* e = p.exps(t);
        bool monomial = false;
        for (int v = 0; v < p.num_vars(); ++v) monomial |= e[v] > 0;
        bool wrote = false;
        if (a != 1.0 || !monomial) {
            out << a;
            wrote = true;
        }
        for (int v = 0; v < p.num_vars(); ++v) {
            if (e[v] == 0) continue;
            if (wrote) out << "*";
            out << var_names[v];
            if (e[v] > 1) out << "^" << e[v];
            wrote = true;
        }
    }
    return out.str();
}

std::string print(const PolynomialSystem& sys) {
    std::ostringstream out;
    out << "vars:";
    for (const auto& n : sys.var_names()) out << " " << n;
    out << "\n";
    for (const auto& p : sys.polys()) out << print(p, sys.var_names()) << "\n";
    return out.str();
}

}  // namespace varsample::polysys
