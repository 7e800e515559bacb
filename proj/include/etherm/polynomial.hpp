#pragma once

// Real polynomials in ascending-coefficient form and their roots.

#include <algorithm>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Eigenvalues>

namespace etherm {

using cplx = std::complex<double>;

class Polynomial {
public:
    Polynomial() : c_{0.0} {}
    Polynomial(std::initializer_list<double> coeffs) : c_(coeffs) { trim(); }
    explicit Polynomial(std::vector<double> coeffs) : c_(std::move(coeffs)) { trim(); }

    static Polynomial constant(double v) { return Polynomial(std::vector<double>{v}); }
    /// a + b s
    static Polynomial linear(double a, double b) { return Polynomial(std::vector<double>{a, b}); }

    /// Monic-times-`leading` polynomial with the given roots; complex roots
    /// must come in conjugate pairs.
    static Polynomial from_roots(const std::vector<cplx>& roots, double leading = 1.0) {
        std::vector<cplx> c{1.0};
        for (const cplx& r : roots) {
            std::vector<cplx> next(c.size() + 1, 0.0);
            for (std::size_t i = 0; i < c.size(); ++i) {
                next[i] -= r * c[i];
                next[i + 1] += c[i];
            }
            c = std::move(next);
        }
        std::vector<double> out(c.size());
        for (std::size_t i = 0; i < c.size(); ++i) out[i] = leading * c[i].real();
        return Polynomial(std::move(out));
    }

    const std::vector<double>& coeffs() const { return c_; }
    int degree() const { return static_cast<int>(c_.size()) - 1; }
    bool is_zero() const { return c_.size() == 1 && c_[0] == 0.0; }
    double operator[](std::size_t i) const { return i < c_.size() ? c_[i] : 0.0; }
    double leading() const { return c_.back(); }

    template <typename T>
    T operator()(T s) const {
        T acc = T(c_.back());
        for (std::size_t i = c_.size() - 1; i-- > 0;) acc = acc * s + T(c_[i]);
        return acc;
    }

    /// sum_k |a_k| |s|^k, the natural scale for the residual |p(s)|.
    double magnitude_scale(cplx s) const {
        const double r = std::abs(s);
        double acc = 0.0, pw = 1.0;
        for (double a : c_) {
            acc += std::abs(a) * pw;
            pw *= r;
        }
        return acc;
    }

    Polynomial derivative() const {
        if (c_.size() == 1) return Polynomial();
        std::vector<double> d(c_.size() - 1);
        for (std::size_t i = 1; i < c_.size(); ++i) d[i - 1] = static_cast<double>(i) * c_[i];
        return Polynomial(std::move(d));
    }

    /// Coefficients of p(k s): a_i -> a_i k^i.
    Polynomial scaled_argument(double k) const {
        std::vector<double> d(c_);
        double pw = 1.0;
        for (double& a : d) {
            a *= pw;
            pw *= k;
        }
        return Polynomial(std::move(d));
    }

    Polynomial& operator+=(const Polynomial& o) {
        if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), 0.0);
        for (std::size_t i = 0; i < o.c_.size(); ++i) c_[i] += o.c_[i];
        trim();
        return *this;
    }
    Polynomial& operator-=(const Polynomial& o) {
        if (o.c_.size() > c_.size()) c_.resize(o.c_.size(), 0.0);
        for (std::size_t i = 0; i < o.c_.size(); ++i) c_[i] -= o.c_[i];
        trim();
        return *this;
    }
    Polynomial& operator*=(double k) {
        for (double& a : c_) a *= k;
        trim();
        return *this;
    }

    friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
    friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
    friend Polynomial operator-(Polynomial a) { return a *= -1.0; }
    friend Polynomial operator*(Polynomial a, double k) { return a *= k; }
    friend Polynomial operator*(double k, Polynomial a) { return a *= k; }
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
        std::vector<double> out(a.c_.size() + b.c_.size() - 1, 0.0);
        for (std::size_t i = 0; i < a.c_.size(); ++i)
            for (std::size_t j = 0; j < b.c_.size(); ++j) out[i + j] += a.c_[i] * b.c_[j];
        return Polynomial(std::move(out));
    }

    friend bool operator==(const Polynomial&, const Polynomial&) = default;

private:
    void trim() {
        if (c_.empty()) c_.push_back(0.0);
        while (c_.size() > 1 && c_.back() == 0.0) c_.pop_back();
    }

    std::vector<double> c_;
};

/// Coefficients spread too widely for a reliable companion-matrix solve.
class IllConditioned : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr double kMaxCoefficientSpan = 1e14;

/// Relative backward error |p(z)| / sum |a_k||z|^k.
inline double root_residual(const Polynomial& p, cplx z) {
    const double scale = p.magnitude_scale(z);
    return scale > 0.0 ? std::abs(p(z)) / scale : 0.0;
}

/// Roots of a real polynomial via eigenvalues of the companion matrix.
/// The argument is first rescaled so the extreme coefficients have equal
/// magnitude; each root is then polished by Newton steps on the original
/// polynomial. Output is closed under conjugation.
inline std::vector<cplx> polynomial_roots(const Polynomial& p) {
    if (p.degree() < 1) return {};
    const auto& a = p.coeffs();

    // Exact roots at the origin.
    std::size_t zeros = 0;
    while (zeros < a.size() && a[zeros] == 0.0) ++zeros;
    std::vector<double> b(a.begin() + static_cast<long>(zeros), a.end());
    std::vector<cplx> roots(zeros, cplx(0.0, 0.0));
    const int n = static_cast<int>(b.size()) - 1;
    if (n < 1) return roots;

    const double alpha = std::pow(std::abs(b.front()) / std::abs(b.back()), 1.0 / n);
    std::vector<double> q(b.size());
    double pw = 1.0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        q[i] = b[i] * pw;
        pw *= alpha;
    }
    double qmax = 0.0, qmin = std::numeric_limits<double>::infinity();
    for (double v : q) {
        if (v == 0.0) continue;
        qmax = std::max(qmax, std::abs(v));
        qmin = std::min(qmin, std::abs(v));
    }
    if (qmax / qmin > kMaxCoefficientSpan)
        throw IllConditioned("polynomial_roots: coefficient span exceeds 1e14 after balancing; "
                             "rescale the time unit");

    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) comp(i, n - 1) = -q[static_cast<std::size_t>(i)] / q.back();
    Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
    if (es.info() != Eigen::Success) throw std::runtime_error("polynomial_roots: eigenvalue iteration failed");

    const Polynomial dp = p.derivative();
    std::vector<cplx> found;
    found.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        cplx z = es.eigenvalues()[i] * alpha;
        if (z.imag() < 0.0) continue;  // mirrored below
        for (int it = 0; it < 3; ++it) {
            const cplx d = dp(z);
            if (d == cplx(0.0)) break;
            const cplx cand = z - p(z) / d;
            if (root_residual(p, cand) < root_residual(p, z)) z = cand; else break;
        }
        found.push_back(z);
    }
    // Pair complex roots with their conjugates; keep counts consistent.
    for (cplx z : found) {
        const bool is_complex = std::abs(z.imag()) > 1e-12 * std::max(1.0, std::abs(z));
        if (is_complex) {
            roots.push_back(z);
            roots.push_back(std::conj(z));
        } else {
            roots.emplace_back(z.real(), 0.0);
        }
    }
    // The real-eigenvalue count from the solver already fixes the total; a
    // mismatch means a near-real pair was split by polishing.
    if (roots.size() != static_cast<std::size_t>(n) + zeros) {
        roots.resize(zeros);
        for (int i = 0; i < n; ++i) roots.push_back(es.eigenvalues()[i] * alpha);
    }
    std::sort(roots.begin(), roots.end(), [](cplx l, cplx r) {
        if (l.real() != r.real()) return l.real() < r.real();
        return l.imag() < r.imag();
    });
    return roots;
}

}  // namespace etherm
