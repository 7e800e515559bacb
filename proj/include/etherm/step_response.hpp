#pragma once

// Unit-step response of a rational transfer function: controllable
// canonical realization, exact zero-order-hold discretization.

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "etherm/transfer_function.hpp"

namespace etherm {

struct StepResponse {
    std::vector<double> t;  // s
    std::vector<double> y;
};

/// Samples y(k dt), k = 0..round(horizon/dt), for a unit step applied at t = 0.
inline StepResponse step_response(const RationalTf& tf, double horizon, double dt) {
    if (!(dt > 0.0) || !(horizon >= dt)) throw std::invalid_argument("step_response: need 0 < dt <= horizon");
    if (!tf.proper()) throw std::invalid_argument("step_response: transfer function must be proper");
    const int n = tf.den.degree();
    const auto steps = static_cast<std::size_t>(std::llround(horizon / dt));
    StepResponse r;
    r.t.resize(steps + 1);
    r.y.assign(steps + 1, 0.0);
    for (std::size_t k = 0; k <= steps; ++k) r.t[k] = static_cast<double>(k) * dt;

    const double lead = tf.den.leading();
    if (n == 0) {
        std::fill(r.y.begin() + 1, r.y.end(), tf.num[0] / lead);
        return r;
    }
    // Strictly proper part plus direct feedthrough d.
    const double d = tf.num.degree() == n ? tf.num[static_cast<std::size_t>(n)] / lead : 0.0;
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n + 1, n + 1);
    for (int i = 0; i + 1 < n; ++i) m(i, i + 1) = 1.0;
    for (int j = 0; j < n; ++j) m(n - 1, j) = -tf.den[static_cast<std::size_t>(j)] / lead;
    m(n - 1, n) = 1.0;
    Eigen::RowVectorXd c(n);
    for (int j = 0; j < n; ++j)
        c[j] = tf.num[static_cast<std::size_t>(j)] / lead - d * tf.den[static_cast<std::size_t>(j)] / lead;

    const Eigen::MatrixXd phi = (m * (dt / tf.time_unit)).exp();
    const Eigen::MatrixXd ad = phi.topLeftCorner(n, n);
    const Eigen::VectorXd bd = phi.topRightCorner(n, 1);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    for (std::size_t k = 1; k <= steps; ++k) {
        x = ad * x + bd;
        r.y[k] = c.dot(x) + d;
    }
    return r;
}

}  // namespace etherm
