#pragma once

// Delayed linear model at an equilibrium, the Pade-substituted plant
// transfer function and the PID closed loop.

#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "etherm/core_model.hpp"
#include "etherm/equilibrium.hpp"
#include "etherm/pid.hpp"
#include "etherm/polynomial.hpp"
#include "etherm/transfer_function.hpp"

namespace etherm {

/// Internal time unit for polynomial arithmetic (hours keep the degree-6
/// coefficients within a few decades of each other).
inline constexpr double kHour = 3600.0;

/// Every argument the delayed field could depend on. The plant uses only
/// x, x_tau1.t_sep and u_tau2; the rest are probed so that structural zeros
/// show up as exact zeros in the Jacobians.
struct DelayedArgs {
    Eigen::Vector3d x = Eigen::Vector3d::Zero();
    Eigen::Vector3d x_tau1 = Eigen::Vector3d::Zero();
    Eigen::Vector3d x_tau2 = Eigen::Vector3d::Zero();
    double u = 0.0;
    double u_tau1 = 0.0;
    double u_tau2 = 0.0;
};

inline ThermalState to_state(const Eigen::Vector3d& v) { return {v[0], v[1], v[2]}; }
inline Eigen::Vector3d to_vector(const ThermalState& s) { return {s.t_stack, s.t_sep, s.t_cool}; }

/// Plant derivative field over the generic delayed argument list.
inline Eigen::Vector3d plant_field(const DelayedArgs& a, const ExogenousInputs& in, const SystemParams& p) {
    const ThermalRates r = derivatives(to_state(a.x), a.x_tau1[1], a.u_tau2, in, p, LmtdPolicy::Strict);
    return {r.d_stack, r.d_sep, r.d_cool};
}

struct DelayedLinearModel {
    Eigen::Matrix3d a = Eigen::Matrix3d::Zero();   // 1/s
    Eigen::Matrix3d a1 = Eigen::Matrix3d::Zero();  // 1/s, delay tau1
    Eigen::Matrix3d a2 = Eigen::Matrix3d::Zero();  // 1/s, delay tau2
    Eigen::Vector3d e = Eigen::Vector3d::Zero();   // K/s per unit opening
    Eigen::Vector3d e1 = Eigen::Vector3d::Zero();
    Eigen::Vector3d e2 = Eigen::Vector3d::Zero();
    double tau1 = 0.0;
    double tau2 = 0.0;
    Equilibrium equilibrium;
};

class LinearizationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Central finite-difference Jacobians of the delayed field at `eq`.
/// Step per variable: 1e-6 relative with floors of 1e-4 K and 1e-6
/// opening. A step that crosses an LMTD domain boundary is shrunk tenfold
/// up to three times.
inline DelayedLinearModel linearize(const SystemParams& p, const Equilibrium& eq) {
    const ThermalRates res = steady_rates(eq.state, eq.valve, eq.inputs, p);
    if (!(res.norm() < 1e-8)) {
        std::ostringstream os;
        os << "linearize: equilibrium residual " << res.norm() << " K/s exceeds 1e-8";
        throw LinearizationError(os.str());
    }

    DelayedArgs base;
    base.x = base.x_tau1 = base.x_tau2 = to_vector(eq.state);
    base.u = base.u_tau1 = base.u_tau2 = eq.valve;

    auto probe = [&](auto&& slot, double floor) -> Eigen::Vector3d {
        const double v0 = slot(base);
        double h = std::max(1e-6 * std::abs(v0), floor);
        for (int attempt = 0; attempt <= 3; ++attempt, h *= 0.1) {
            DelayedArgs plus = base, minus = base;
            slot(plus) = v0 + h;
            slot(minus) = v0 - h;
            try {
                return (plant_field(plus, eq.inputs, p) - plant_field(minus, eq.inputs, p)) / (2.0 * h);
            } catch (const DomainError&) {
            }
        }
        throw LinearizationError("linearize: finite-difference step straddles the LMTD domain boundary");
    };

    DelayedLinearModel m;
    for (int j = 0; j < 3; ++j) {
        m.a.col(j) = probe([j](DelayedArgs& a) -> double& { return a.x[j]; }, 1e-4);
        m.a1.col(j) = probe([j](DelayedArgs& a) -> double& { return a.x_tau1[j]; }, 1e-4);
        m.a2.col(j) = probe([j](DelayedArgs& a) -> double& { return a.x_tau2[j]; }, 1e-4);
    }
    m.e = probe([](DelayedArgs& a) -> double& { return a.u; }, 1e-6);
    m.e1 = probe([](DelayedArgs& a) -> double& { return a.u_tau1; }, 1e-6);
    m.e2 = probe([](DelayedArgs& a) -> double& { return a.u_tau2; }, 1e-6);
    m.tau1 = p.tau1;
    m.tau2 = p.tau2;
    m.equilibrium = eq;
    if (!(m.a.allFinite() && m.a1.allFinite() && m.a2.allFinite() && m.e.allFinite() && m.e1.allFinite() &&
          m.e2.allFinite()))
        throw LinearizationError("linearize: non-finite Jacobian entry");
    return m;
}

/// Output row F selecting the feedback temperature.
inline Eigen::RowVector3d feedback_row(Feedback f) {
    return f == Feedback::AfterStack ? Eigen::RowVector3d(1, 0, 0) : Eigen::RowVector3d(0, 1, 0);
}

class SingularPlant : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

using PolyMatrix = std::array<std::array<Polynomial, 3>, 3>;

inline Polynomial det2(const Polynomial& a, const Polynomial& b, const Polynomial& c, const Polynomial& d) {
    return a * d - b * c;
}

inline Polynomial cofactor(const PolyMatrix& m, int row, int col) {
    int r[2], c[2];
    for (int i = 0, k = 0; i < 3; ++i)
        if (i != row) r[k++] = i;
    for (int j = 0, k = 0; j < 3; ++j)
        if (j != col) c[k++] = j;
    Polynomial minor = det2(m[r[0]][c[0]], m[r[0]][c[1]], m[r[1]][c[0]], m[r[1]][c[1]]);
    return ((row + col) % 2 == 0) ? minor : -minor;
}

}  // namespace detail

/// Plant F (sI - A - A1 P1 - A2 P2)^-1 (E + E1 P1 + E2 P2) with P_i the
/// first-order Pade approximations. Each row is multiplied by the Pade
/// denominators of the delays it contains, leaving a polynomial matrix M
/// and vector b; then G = F adj(M) b / det(M). Coefficients are in hours.
inline RationalTf plant_transfer(const DelayedLinearModel& m, Feedback feedback, double time_unit = kHour) {
    const RationalTf p1 = pade_first_order(m.tau1, time_unit);
    const RationalTf p2 = pade_first_order(m.tau2, time_unit);
    const Eigen::Matrix3d a = m.a * time_unit, a1 = m.a1 * time_unit, a2 = m.a2 * time_unit;
    const Eigen::Vector3d e = m.e * time_unit, e1 = m.e1 * time_unit, e2 = m.e2 * time_unit;

    detail::PolyMatrix mat;
    std::array<Polynomial, 3> b;
    for (int r = 0; r < 3; ++r) {
        const bool uses1 = a1.row(r).cwiseAbs().maxCoeff() > 0.0 || e1[r] != 0.0;
        const bool uses2 = a2.row(r).cwiseAbs().maxCoeff() > 0.0 || e2[r] != 0.0;
        const Polynomial d1 = uses1 ? p1.den : Polynomial{1.0};
        const Polynomial d2 = uses2 ? p2.den : Polynomial{1.0};
        const Polynomial mult = d1 * d2;
        for (int c = 0; c < 3; ++c) {
            Polynomial entry = Polynomial::linear(-a(r, c), r == c ? 1.0 : 0.0) * mult;
            if (uses1) entry -= a1(r, c) * (p1.num * d2);
            if (uses2) entry -= a2(r, c) * (p2.num * d1);
            mat[r][c] = entry;
        }
        Polynomial rhs = e[r] * mult;
        if (uses1) rhs += e1[r] * (p1.num * d2);
        if (uses2) rhs += e2[r] * (p2.num * d1);
        b[r] = rhs;
    }

    Polynomial det;
    for (int c = 0; c < 3; ++c) det += mat[0][c] * detail::cofactor(mat, 0, c);

    const Eigen::RowVector3d f = feedback_row(feedback);
    Polynomial num;
    for (int k = 0; k < 3; ++k) {
        if (f[k] == 0.0) continue;
        for (int j = 0; j < 3; ++j) num += f[k] * (detail::cofactor(mat, j, k) * b[j]);  // adj(k,j) = C(j,k)
    }

    RationalTf tf{num, det, time_unit};
    const double scale = std::max(std::abs(det.leading()), 1e-300);
    if (std::abs(det[0]) <= 1e-12 * scale * std::pow(time_unit, 0.0))
        throw SingularPlant("plant_transfer: polynomial matrix singular at s = 0 (degenerate equilibrium)");
    cancel_common_roots(tf);
    return tf;
}

class MarginalConfiguration : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Closed loop T_f / T_aim = -Gc Gp / (1 - Gc Gp) with Gc = kp + ki/s + kd s.
/// With ki = 0 the controller has no integrator pole.
inline RationalTf closed_loop(const RationalTf& plant, const PidParams& pid) {
    if (!plant.proper()) throw std::invalid_argument("closed_loop: plant must be proper");
    const double unit = plant.time_unit;
    const bool integral = pid.ki > 0.0;
    const Polynomial ctrl = integral ? Polynomial{pid.ki * unit, pid.kp, pid.kd / unit}
                                     : Polynomial{pid.kp, pid.kd / unit};
    const Polynomial open_num = ctrl * plant.num;
    const Polynomial den = (integral ? Polynomial::linear(0.0, 1.0) * plant.den : plant.den) - open_num;
    RationalTf cl{-open_num, den, unit};

    if (!cl.num.is_zero() && cl.num.degree() >= 1) {
        for (const cplx& z : polynomial_roots(cl.num)) {
            if (std::abs(z.real()) > 1e-9 * std::max(1.0, std::abs(z))) continue;
            if (root_residual(cl.den, z) < 1e-9) {
                std::ostringstream os;
                os << "closed_loop: pole-zero cancellation on the imaginary axis at s = " << z / unit << " 1/s";
                throw MarginalConfiguration(os.str());
            }
        }
    }
    return cl;
}

enum class PoleOrigin { Unknown, Plant, DelayApprox, Controller };

struct Pole {
    cplx value;  // 1/s
    PoleOrigin origin = PoleOrigin::Unknown;
    double residual = 0.0;
};

struct PoleSet {
    std::vector<Pole> poles;

    double max_real() const {
        double m = -std::numeric_limits<double>::infinity();
        for (const Pole& p : poles) m = std::max(m, p.value.real());
        return m;
    }
    std::size_t size() const { return poles.size(); }
};

class PoleResidualError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr double kPoleResidualTol = 1e-8;

/// Denominator roots converted to 1/s. Throws when any root fails the
/// residual check.
inline PoleSet poles(const RationalTf& tf) {
    if (tf.den.degree() < 1) throw std::invalid_argument("poles: denominator degree must be >= 1");
    PoleSet out;
    for (const cplx& z : polynomial_roots(tf.den)) {
        const double res = root_residual(tf.den, z);
        if (!(res < kPoleResidualTol)) {
            std::ostringstream os;
            os << "poles: root " << z << " has residual " << res;
            throw PoleResidualError(os.str());
        }
        out.poles.push_back({z / tf.time_unit, PoleOrigin::Unknown, res});
    }
    return out;
}

/// Tags plant poles: roots at -2/tau_i are Pade poles, the rest plant.
inline void tag_plant_origins(PoleSet& ps, const DelayedLinearModel& m) {
    for (Pole& p : ps.poles) {
        p.origin = PoleOrigin::Plant;
        for (double tau : {m.tau1, m.tau2}) {
            if (tau > 0.0 && roots_coincide(p.value * tau, cplx(-2.0, 0.0), 1e-6)) p.origin = PoleOrigin::DelayApprox;
        }
    }
}

}  // namespace etherm
