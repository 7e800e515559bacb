#pragma once

#include <algorithm>
#include <string>
#include <string_view>

#include "etherm/params.hpp"

namespace etherm {

/// Which temperature the controller regulates.
enum class Feedback {
    AfterStack,   // T_stack, stack outlet
    BeforeStack,  // T_sep, stack inlet / separator outlet
};

inline std::string_view to_string(Feedback f) {
    return f == Feedback::AfterStack ? "after" : "before";
}

inline Feedback feedback_from_string(std::string_view s) {
    if (s == "after" || s == "after_stack" || s == "AfterStack") return Feedback::AfterStack;
    if (s == "before" || s == "before_stack" || s == "BeforeStack") return Feedback::BeforeStack;
    throw ValidationError("feedback", "expected 'after' or 'before', got '" + std::string(s) + "'");
}

inline double feedback_temperature(const ThermalState& x, Feedback f) {
    return f == Feedback::AfterStack ? x.t_stack : x.t_sep;
}

/// Parallel-form gains acting on e = T_f - T_aim; output is valve opening.
struct PidParams {
    double kp = 0.0;  // 1/K
    double ki = 0.0;  // 1/(K s)
    double kd = 0.0;  // s/K
    Feedback feedback = Feedback::AfterStack;

    void validate() const {
        if (!(kp >= 0.0)) throw ValidationError("pid.kp", "must be >= 0");
        if (!(ki >= 0.0)) throw ValidationError("pid.ki", "must be >= 0");
        if (!(kd >= 0.0)) throw ValidationError("pid.kd", "must be >= 0");
    }
};

/// Reference gain sets for the two feedback choices.
inline constexpr PidParams kAfterStackReference{0.02, 1.1e-5, 6.0, Feedback::AfterStack};
inline constexpr PidParams kBeforeStackReference{0.031, 3.1e-5, 0.0, Feedback::BeforeStack};

struct PidRuntime {
    double integral_accum = 0.0;  // K s
    double prev_error = 0.0;      // K
    double prev_output = 0.0;     // opening

    /// Runtime that outputs `valve` at zero error (bumpless start).
    static PidRuntime holding(double valve, const PidParams& pid, double error = 0.0) {
        PidRuntime rt;
        rt.integral_accum = pid.ki > 0.0 ? (valve - pid.kp * error) / pid.ki : 0.0;
        rt.prev_error = error;
        rt.prev_output = valve;
        return rt;
    }
};

/// One controller update. Output is clamped to [0, 1]; the integrator is
/// frozen while the candidate output is saturated and the error pushes it
/// further out of the band (conditional integration).
inline double pid_step(double error, PidRuntime& rt, const PidParams& pid, double period) {
    const double derivative = pid.kd * (error - rt.prev_error) / period;
    const double candidate_integral = rt.integral_accum + error * period;
    const double candidate = pid.kp * error + pid.ki * candidate_integral + derivative;

    const bool inside = candidate >= 0.0 && candidate <= 1.0;
    const bool unwinding = (candidate > 1.0 && error < 0.0) || (candidate < 0.0 && error > 0.0);
    if (inside || unwinding) rt.integral_accum = candidate_integral;

    const double raw = pid.kp * error + pid.ki * rt.integral_accum + derivative;
    const double out = std::clamp(raw, 0.0, 1.0);
    rt.prev_error = error;
    rt.prev_output = out;
    return out;
}

}  // namespace etherm
