#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "etherm/polynomial.hpp"

namespace etherm {

/// Rational transfer function num(s)/den(s). Coefficients refer to s
/// measured in 1/time_unit, where time_unit is given in seconds (3600 for
/// hours). `eval` takes s in 1/s.
struct RationalTf {
    Polynomial num{1.0};
    Polynomial den{1.0};
    double time_unit = 1.0;

    cplx eval(cplx s_per_second) const {
        const cplx s = s_per_second * time_unit;
        return num(s) / den(s);
    }
    double dc_gain() const { return num[0] / den[0]; }

    /// Same function with coefficients for a different time unit.
    RationalTf in_time_unit(double unit) const {
        const double k = unit / time_unit;  // s_new = k s_old
        RationalTf out{num.scaled_argument(1.0 / k), den.scaled_argument(1.0 / k), unit};
        return out;
    }

    bool proper() const { return num.is_zero() || num.degree() <= den.degree(); }
};

inline constexpr double kCancellationTol = 1e-9;

/// True when the two roots coincide within `tol` relative to their size.
inline bool roots_coincide(cplx a, cplx b, double tol = kCancellationTol) {
    return std::abs(a - b) <= tol * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

/// Removes numerator/denominator root pairs that coincide within the
/// cancellation tolerance. Returns the number of cancelled pairs.
inline int cancel_common_roots(RationalTf& tf, double tol = kCancellationTol) {
    if (tf.num.is_zero() || tf.num.degree() < 1 || tf.den.degree() < 1) return 0;
    std::vector<cplx> zn = polynomial_roots(tf.num);
    std::vector<cplx> zd = polynomial_roots(tf.den);
    int cancelled = 0;
    for (std::size_t i = 0; i < zn.size();) {
        bool hit = false;
        for (std::size_t j = 0; j < zd.size(); ++j) {
            if (roots_coincide(zn[i], zd[j], tol)) {
                zn.erase(zn.begin() + static_cast<long>(i));
                zd.erase(zd.begin() + static_cast<long>(j));
                ++cancelled;
                hit = true;
                break;
            }
        }
        if (!hit) ++i;
    }
    if (cancelled > 0) {
        tf.num = Polynomial::from_roots(zn, tf.num.leading());
        tf.den = Polynomial::from_roots(zd, tf.den.leading());
    }
    return cancelled;
}

/// First-order Pade approximation of exp(-tau s) with tau in seconds,
/// expressed in `time_unit`: (1 - tau s/2) / (1 + tau s/2). tau = 0 gives 1.
inline RationalTf pade_first_order(double tau, double time_unit = 1.0) {
    if (!(tau >= 0.0)) throw std::invalid_argument("pade_first_order: tau must be >= 0");
    if (tau == 0.0) return {Polynomial{1.0}, Polynomial{1.0}, time_unit};
    const double half = 0.5 * tau / time_unit;
    return {Polynomial::linear(1.0, -half), Polynomial::linear(1.0, half), time_unit};
}

}  // namespace etherm
