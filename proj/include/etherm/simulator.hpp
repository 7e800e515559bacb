#pragma once

// Fixed-step RK4 integration of the delayed plant under in-loop PID control.

#include <cmath>
#include <cstddef>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "etherm/core_model.hpp"
#include "etherm/history.hpp"
#include "etherm/pid.hpp"
#include "etherm/schedule.hpp"

namespace etherm {

struct ScenarioConfig {
    double duration = 3600.0;         // s
    double dt = 1.0;                  // s
    double controller_period = 1.0;  // s
    Schedule current_profile{820.0};
    Schedule ambient_profile{25.0};
    Schedule setpoint_profile{80.0};
    double coolant_inlet = 30.0;
    ThermalState initial_state{80.0, 72.0, 79.0};
    double initial_valve = 0.0;
    PidParams pid;

    /// Controller steps per integration step count.
    long controller_every() const { return std::lround(controller_period / dt); }

    void validate() const {
        if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("scenario.dt", "must be > 0");
        if (!(duration >= 0.0) || !std::isfinite(duration)) throw ValidationError("scenario.duration", "must be >= 0");
        if (!(controller_period >= dt))
            throw ValidationError("scenario.controller_period", "must be >= dt");
        const double ratio = controller_period / dt;
        if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio)
            throw ValidationError("scenario.controller_period", "must be an integer multiple of dt");
        current_profile.validate("scenario.current_profile");
        ambient_profile.validate("scenario.ambient_profile");
        setpoint_profile.validate("scenario.setpoint_profile");
        for (const auto& [t, i] : current_profile.points())
            if (i < 0.0) throw ValidationError("scenario.current_profile", "current must be >= 0");
        if (!std::isfinite(coolant_inlet)) throw ValidationError("scenario.coolant_inlet", "must be finite");
        if (!initial_state.finite()) throw ValidationError("scenario.initial_state", "must be finite");
        if (!(initial_valve >= 0.0 && initial_valve <= 1.0))
            throw ValidationError("scenario.initial_valve", "must lie in [0, 1]");
        pid.validate();
    }
};

struct TraceRow {
    double t = 0.0;
    double current = 0.0;
    double t_stack = 0.0;
    double t_sep = 0.0;
    double t_cool = 0.0;
    double valve = 0.0;
    double t_aim = 0.0;
    double q_ele = 0.0;
    double q_dis_total = 0.0;
    unsigned flags = kFlagNone;
};

struct SimulationTrace {
    double dt = 1.0;
    std::vector<TraceRow> rows;
};

/// Non-finite state during integration.
class SimulationAborted : public std::runtime_error {
public:
    SimulationAborted(const std::string& what, std::size_t step) : std::runtime_error(what), step_(step) {}
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

/// Integrates the scenario. The history is pre-filled with the initial state
/// and valve; the delayed arguments are looked up once per step and held over
/// the four RK4 stages. One row is recorded per step (state at the start of
/// the step, valve applied during it) plus a final row at `duration`.
inline SimulationTrace simulate(const ScenarioConfig& cfg, const SystemParams& p) {
    cfg.validate();
    p.validate();

    const auto n_steps = static_cast<std::size_t>(std::llround(cfg.duration / cfg.dt));
    const long ctrl_every = cfg.controller_every();
    const double span = std::max(p.tau1, p.tau2) + 2.0 * cfg.dt;

    HistoryBuffer history(span, cfg.initial_state.t_sep, cfg.initial_valve);
    ThermalState x = cfg.initial_state;
    const double initial_error = feedback_temperature(x, cfg.pid.feedback) - cfg.setpoint_profile.at(0.0);
    PidRuntime rt = PidRuntime::holding(cfg.initial_valve, cfg.pid, initial_error);
    double valve = cfg.initial_valve;

    SimulationTrace trace;
    trace.dt = cfg.dt;
    trace.rows.reserve(n_steps + 1);

    auto record = [&](double t, const ExogenousInputs& in, unsigned flags) {
        const AlgebraicOutputs y = algebraic(x, in, p, LmtdPolicy::CoolingOff, &flags);
        trace.rows.push_back({t, in.current, x.t_stack, x.t_sep, x.t_cool, valve, in.t_aim, y.q_ele,
                              y.q_dis_stack + y.q_dis_sep, flags});
    };

    for (std::size_t k = 0; k <= n_steps; ++k) {
        const double t = static_cast<double>(k) * cfg.dt;
        ExogenousInputs in{cfg.current_profile.at(t), cfg.ambient_profile.at(t), cfg.coolant_inlet,
                           cfg.setpoint_profile.at(t)};

        if (k < n_steps && k % static_cast<std::size_t>(ctrl_every) == 0 && k > 0) {
            const double error = feedback_temperature(x, cfg.pid.feedback) - in.t_aim;
            valve = pid_step(error, rt, cfg.pid, cfg.controller_period);
        }
        history.push(t, x.t_sep, valve);

        if (k == n_steps) {
            record(t, in, kFlagNone);
            break;
        }

        const double sep_delayed = history.at(t - p.tau1).t_sep;
        const double valve_delayed = history.at(t - p.tau2).valve;

        unsigned flags = kFlagNone;
        auto f = [&](const ThermalState& s) {
            return derivatives(s, sep_delayed, valve_delayed, in, p, LmtdPolicy::CoolingOff, &flags);
        };
        auto axpy = [](const ThermalState& s, double h, const ThermalRates& r) {
            return ThermalState{s.t_stack + h * r.d_stack, s.t_sep + h * r.d_sep, s.t_cool + h * r.d_cool};
        };
        const double h = cfg.dt;
        ThermalRates k1, k2, k3, k4;
        try {
            k1 = f(x);
            k2 = f(axpy(x, 0.5 * h, k1));
            k3 = f(axpy(x, 0.5 * h, k2));
            k4 = f(axpy(x, h, k3));
            record(t, in, flags);
        } catch (const DomainError& e) {
            // A diverging state leaves the model's domain before it overflows.
            std::ostringstream os;
            os << "simulate: state left the model domain at step " << k << " (t = " << t << " s): " << e.what();
            throw SimulationAborted(os.str(), k);
        }

        x.t_stack += h / 6.0 * (k1.d_stack + 2.0 * k2.d_stack + 2.0 * k3.d_stack + k4.d_stack);
        x.t_sep += h / 6.0 * (k1.d_sep + 2.0 * k2.d_sep + 2.0 * k3.d_sep + k4.d_sep);
        x.t_cool += h / 6.0 * (k1.d_cool + 2.0 * k2.d_cool + 2.0 * k3.d_cool + k4.d_cool);
        if (!x.finite()) {
            std::ostringstream os;
            os << "simulate: non-finite state at step " << k << " (t = " << t << " s)";
            throw SimulationAborted(os.str(), k);
        }
    }
    return trace;
}

}  // namespace etherm
