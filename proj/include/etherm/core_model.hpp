#pragma once

// Plant physics: algebraic heat/voltage relations and the delayed
// three-temperature derivative field. All functions are pure.

#include <cmath>
#include <sstream>

#include "etherm/params.hpp"

namespace etherm {

/// Per-row condition flags recorded by the simulator (bitmask).
enum TraceFlag : unsigned {
    kFlagNone = 0u,
    kFlagCoolingOff = 1u,        // LMTD ends inverted, coil exchange set to 0
    kFlagReverseConvection = 2u, // stack colder than ambient
};

/// How `derivatives` treats an inverted LMTD.
enum class LmtdPolicy {
    Strict,     // propagate DomainError
    CoolingOff, // use Delta T = 0 and raise kFlagCoolingOff
};

inline constexpr double kKelvinOffset = 273.15;
inline constexpr double kLmtdRelEps = 1e-9;

/// Cell voltage from the empirical U-I curve; `t_bar` is the mean of stack
/// and separator temperatures in degC. Logarithm is base 10.
inline double cell_voltage(double current_density, double t_bar, const SystemParams& p) {
    if (!(current_density >= 0.0)) {
        std::ostringstream os;
        os << "cell_voltage: negative current density " << current_density << " A/m^2";
        throw DomainError(os.str());
    }
    const double arg = (p.t1 + p.t2 / t_bar + p.t3 / (t_bar * t_bar)) * current_density + 1.0;
    if (!(arg > 0.0) || !std::isfinite(arg)) {
        std::ostringstream os;
        os << "cell_voltage: non-positive Tafel argument " << arg << " at current density "
           << current_density << " A/m^2, t_bar " << t_bar << " degC";
        throw DomainError(os.str());
    }
    return p.u_rev + (p.r1 + p.r2 * t_bar) * current_density + p.s_tafel * std::log10(arg);
}

/// Heat released by the stack, W. Signed: negative below thermoneutral.
inline double electrolysis_heat(double current, double u_cell, const SystemParams& p) {
    return (u_cell - p.u_th) * (current / p.n_parallel) * p.n_cells;
}

/// Convective plus radiative loss of the stack surface, W.
/// For t_stack < t_amb the convection coefficient uses |dT| and the loss is
/// negative (heat gained); callers flag this as kFlagReverseConvection.
inline double stack_heat_loss(double t_stack, double t_amb, const SystemParams& p) {
    const double dt = t_stack - t_amb;
    const double h = 2.51 * 0.52 * std::pow(std::abs(dt) / p.stack_diameter, 0.25);
    const double q_conv = h * p.stack_surface_area * dt;
    const double tk = t_stack + kKelvinOffset;
    const double ta = t_amb + kKelvinOffset;
    const double q_rad =
        p.stefan_boltzmann * p.stack_surface_area * p.emissivity * (tk * tk * tk * tk - ta * ta * ta * ta);
    return q_conv + q_rad;
}

/// Log-mean temperature difference of the counter-flow coil, K.
/// d1 = t_stack - t_cool (hot inlet / cold outlet), d2 = t_sep - t_cool_in.
inline double lmtd(double t_stack, double t_sep, double t_cool, double t_cool_in) {
    const double d1 = t_stack - t_cool;
    const double d2 = t_sep - t_cool_in;
    if (!(d1 > 0.0)) {
        std::ostringstream os;
        os << "lmtd: hot-inlet end inverted (t_stack - t_cool = " << d1 << " K)";
        throw DomainError(os.str());
    }
    if (!(d2 > 0.0)) {
        std::ostringstream os;
        os << "lmtd: cold-inlet end inverted (t_sep - t_cool_in = " << d2 << " K)";
        throw DomainError(os.str());
    }
    if (std::abs(d1 - d2) < kLmtdRelEps * std::max(d1, d2)) return 0.5 * (d1 + d2);
    return (d1 - d2) / std::log(d1 / d2);
}

/// Separator loss to ambient, W (signed).
inline double separator_heat_loss(double t_bar, double t_amb, const SystemParams& p) {
    return (t_bar - t_amb) / p.r_sep;
}

/// Coolant volume flow, m^3/s. Callers clamp the opening to [0, 1].
inline double coolant_flow(double valve_opening, const SystemParams& p) {
    return p.k_valve * valve_opening;
}

/// Evaluates every algebraic relation at the current state.
inline AlgebraicOutputs algebraic(const ThermalState& x, const ExogenousInputs& in, const SystemParams& p,
                                  LmtdPolicy policy = LmtdPolicy::CoolingOff, unsigned* flags = nullptr) {
    AlgebraicOutputs y;
    const double t_bar = 0.5 * (x.t_stack + x.t_sep);
    const double i_density = in.current / p.n_parallel / p.cell_area;
    y.u_cell = cell_voltage(i_density, t_bar, p);
    y.q_ele = electrolysis_heat(in.current, y.u_cell, p);
    y.q_dis_stack = stack_heat_loss(x.t_stack, in.t_amb, p);
    y.q_dis_sep = separator_heat_loss(t_bar, in.t_amb, p);
    if (flags && x.t_stack < in.t_amb) *flags |= kFlagReverseConvection;

    const double d1 = x.t_stack - x.t_cool;
    const double d2 = x.t_sep - in.t_cool_in;
    if (policy == LmtdPolicy::CoolingOff && !(d1 > 0.0 && d2 > 0.0)) {
        y.lmtd = 0.0;
        if (flags) *flags |= kFlagCoolingOff;
    } else {
        y.lmtd = lmtd(x.t_stack, x.t_sep, x.t_cool, in.t_cool_in);
    }
    return y;
}

/// Delayed derivative field. `delayed_t_sep` is T_sep(t - tau1) and
/// `delayed_valve` the valve opening at t - tau2; everything else is
/// evaluated at the current state.
inline ThermalRates derivatives(const ThermalState& x, double delayed_t_sep, double delayed_valve,
                                const ExogenousInputs& in, const SystemParams& p,
                                LmtdPolicy policy = LmtdPolicy::CoolingOff, unsigned* flags = nullptr) {
    const AlgebraicOutputs y = algebraic(x, in, p, policy, flags);
    const double lye = p.lye_capacity_flow();
    const double coil = p.ka_coil * y.lmtd;
    const double coolant = coolant_flow(delayed_valve, p) * p.cool_density * p.cool_specific_heat;

    ThermalRates r;
    r.d_stack = (y.q_ele - y.q_dis_stack - lye * (x.t_stack - delayed_t_sep)) / p.c_stack;
    r.d_sep = (0.5 * lye * (x.t_stack - x.t_sep) - coil - y.q_dis_sep) / p.c_sep;
    r.d_cool = (coolant * (in.t_cool_in - x.t_cool) + coil) / p.c_cool;
    return r;
}

}  // namespace etherm
