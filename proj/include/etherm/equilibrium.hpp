#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

#include "etherm/core_model.hpp"
#include "etherm/pid.hpp"

namespace etherm {

/// No steady state with a valve opening strictly inside (0, 1).
class InfeasibleCooling : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NoConvergence : public std::runtime_error {
public:
    NoConvergence(const std::string& what, double residual) : std::runtime_error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

struct Equilibrium {
    ThermalState state;
    double valve = 0.0;
    ExogenousInputs inputs;
};

/// Rate vector at a candidate steady state (delayed values equal to current).
inline ThermalRates steady_rates(const ThermalState& x, double valve, const ExogenousInputs& in,
                                 const SystemParams& p) {
    return derivatives(x, x.t_sep, valve, in, p, LmtdPolicy::Strict);
}

/// Solves for the steady state with the temperature selected by `pinned`
/// held at `controlled_temp`. Unknowns are the two free temperatures and
/// the valve; the coil outlet is iterated as log(t_stack - t_cool) so every
/// iterate stays inside the LMTD domain.
inline Equilibrium find_equilibrium(const SystemParams& p, const ExogenousInputs& inputs, double controlled_temp,
                                    Feedback pinned, int max_iterations = 100) {
    using Vec3 = Eigen::Vector3d;
    const double lye = p.lye_capacity_flow();

    auto unpack = [&](const Vec3& z) {
        ThermalState x;
        if (pinned == Feedback::AfterStack) {
            x.t_stack = controlled_temp;
            x.t_sep = z[0];
        } else {
            x.t_sep = controlled_temp;
            x.t_stack = z[0];
        }
        x.t_cool = x.t_stack - std::exp(z[1]);
        return x;
    };
    auto residual = [&](const Vec3& z, Vec3& r) {
        try {
            const ThermalRates d = steady_rates(unpack(z), z[2], inputs, p);
            r = Vec3(d.d_stack, d.d_sep, d.d_cool);
            return r.allFinite();
        } catch (const DomainError&) {
            return false;
        }
    };

    // Initial guess from the stack balance with no loss correction.
    Vec3 z;
    {
        ThermalState guess{controlled_temp, controlled_temp, controlled_temp};
        double gap = 5.0;
        for (int k = 0; k < 20; ++k) {
            if (pinned == Feedback::AfterStack) guess.t_sep = controlled_temp - gap;
            else guess.t_stack = controlled_temp + gap;
            const AlgebraicOutputs y = algebraic(guess, inputs, p, LmtdPolicy::CoolingOff);
            gap = std::clamp((y.q_ele - y.q_dis_stack) / lye, 0.0, 50.0);
        }
        z[0] = pinned == Feedback::AfterStack ? guess.t_sep : guess.t_stack;
        z[1] = std::log(0.5);
        z[2] = 0.1;
    }

    Vec3 r;
    if (!residual(z, r)) throw NoConvergence("find_equilibrium: initial guess outside model domain", INFINITY);
    double rnorm = r.norm();
    for (int it = 0; it < max_iterations && rnorm > 1e-13; ++it) {
        Eigen::Matrix3d jac;
        const std::array<double, 3> h{1e-6 * std::max(1.0, std::abs(z[0])), 1e-7, 1e-8};
        for (int j = 0; j < 3; ++j) {
            Vec3 zp = z, zm = z, rp, rm;
            zp[j] += h[j];
            zm[j] -= h[j];
            if (!residual(zp, rp) || !residual(zm, rm))
                throw NoConvergence("find_equilibrium: Jacobian probe left model domain", rnorm);
            jac.col(j) = (rp - rm) / (2.0 * h[j]);
        }
        const Vec3 step = jac.fullPivLu().solve(-r);
        double lambda = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls) {
            const Vec3 trial = z + lambda * step;
            Vec3 rt;
            if (residual(trial, rt) && rt.norm() < (1.0 - 1e-4 * lambda) * rnorm) {
                z = trial;
                r = rt;
                rnorm = rt.norm();
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!accepted) break;
    }
    if (!(rnorm < 1e-8)) {
        std::ostringstream os;
        os << "find_equilibrium: no convergence, last residual " << rnorm << " K/s";
        throw NoConvergence(os.str(), rnorm);
    }
    Equilibrium eq{unpack(z), z[2], inputs};
    if (!(eq.valve > 0.0 && eq.valve < 1.0)) {
        std::ostringstream os;
        os << "find_equilibrium: steady valve opening " << eq.valve
           << " outside (0, 1); rescale k_valve or move the operating point";
        throw InfeasibleCooling(os.str());
    }
    return eq;
}

/// Rated operating point: 820 A with the stack outlet at 80 degC.
inline Equilibrium rated_equilibrium(const SystemParams& p, double t_amb = 25.0, double t_cool_in = 30.0) {
    ExogenousInputs in{820.0, t_amb, t_cool_in, 80.0};
    return find_equilibrium(p, in, 80.0, Feedback::AfterStack);
}

}  // namespace etherm
