#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

#include "etherm/pid.hpp"
#include "etherm/simulator.hpp"

namespace etherm {

struct StepMetrics {
    double overshoot = 0.0;           // (peak - final) / final on the deviation signal
    double overshoot_absolute = 0.0;  // same, normalized by the absolute final value
    double settling_time = 0.0;       // s, from the first sample
    double max_deviation = 0.0;       // max |y - reference|
    double steady_state = 0.0;        // final value of y - reference
};

/// Final 5 % of the response still moves by more than 0.5 % of its mean.
struct NotSettled {
    double window_variation = 0.0;
    double steady_state = 0.0;
};

using StepOutcome = std::variant<StepMetrics, NotSettled>;

inline constexpr double kSettlingBand = 0.02;
inline constexpr double kFinalWindowFraction = 0.05;
inline constexpr double kFinalWindowTolerance = 0.005;

/// Overshoot and +-2 % settling time of `y` sampled at `t`, measured on the
/// deviation y - reference. Negative-going responses are mirrored first so
/// overshoot is always "past the final value". The peak is taken before the
/// final window, so a monotone response still creeping inside it has none.
inline StepOutcome step_metrics(std::span<const double> t, std::span<const double> y, double reference) {
    if (t.size() != y.size() || y.empty())
        throw std::invalid_argument("step_metrics: t and y must be non-empty and equally long");
    const std::size_t n = y.size();
    const std::size_t window =
        std::min(n, std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(kFinalWindowFraction * n))));

    double sum = 0.0, lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = n - window; i < n; ++i) {
        const double d = y[i] - reference;
        sum += d;
        lo = std::min(lo, d);
        hi = std::max(hi, d);
    }
    const double final_dev = sum / static_cast<double>(window);
    const double scale = std::abs(final_dev);
    const double tiny = 1e-12 * std::max(1.0, std::abs(reference));
    if (hi - lo > kFinalWindowTolerance * scale + tiny) return NotSettled{hi - lo, final_dev};

    const double sign = final_dev < 0.0 ? -1.0 : 1.0;
    StepMetrics m;
    m.steady_state = final_dev;
    double peak = -std::numeric_limits<double>::infinity();
    std::size_t last_out = n;  // sentinel: never outside the band
    for (std::size_t i = 0; i < n; ++i) {
        const double d = y[i] - reference;
        if (i < n - window) peak = std::max(peak, sign * d);
        m.max_deviation = std::max(m.max_deviation, std::abs(d));
        if (std::abs(d - final_dev) > kSettlingBand * scale + tiny) last_out = i;
    }
    if (scale > tiny && peak > scale) {
        m.overshoot = std::max(0.0, (peak - scale) / scale);
        const double final_abs = reference + final_dev;
        const double peak_abs = reference + sign * peak;
        m.overshoot_absolute = final_abs != 0.0 ? std::max(0.0, sign * (peak_abs - final_abs) / std::abs(final_abs)) : 0.0;
    }
    if (last_out != n) m.settling_time = t[std::min(last_out + 1, n - 1)] - t[0];
    return m;
}

/// Time window and current band selecting the rows used for the RMS error.
struct StatsWindow {
    double t_begin = -std::numeric_limits<double>::infinity();
    double t_end = std::numeric_limits<double>::infinity();
    double current_min = -std::numeric_limits<double>::infinity();
    double current_max = std::numeric_limits<double>::infinity();

    bool contains(const TraceRow& r) const {
        return r.t >= t_begin && r.t <= t_end && r.current >= current_min && r.current <= current_max;
    }
};

struct ScenarioStats {
    double delta_t_max = 0.0;  // max |T_f - T_aim| over the trace
    double delta_t_rms = 0.0;  // RMS of T_f - T_aim inside the window
    double t_bar = 0.0;        // mean of (T_stack + T_sep) / 2 over the trace
    std::size_t window_rows = 0;
};

inline ScenarioStats scenario_stats(const SimulationTrace& trace, Feedback feedback, const StatsWindow& window = {}) {
    if (trace.rows.empty()) throw std::invalid_argument("scenario_stats: empty trace");
    ScenarioStats s;
    double sq = 0.0, tb = 0.0;
    for (const TraceRow& r : trace.rows) {
        const double tf = feedback == Feedback::AfterStack ? r.t_stack : r.t_sep;
        const double e = tf - r.t_aim;
        s.delta_t_max = std::max(s.delta_t_max, std::abs(e));
        tb += 0.5 * (r.t_stack + r.t_sep);
        if (window.contains(r)) {
            sq += e * e;
            ++s.window_rows;
        }
    }
    if (s.window_rows == 0) throw ValidationError("stats_window", "window selects no trace rows");
    s.delta_t_rms = std::sqrt(sq / static_cast<double>(s.window_rows));
    s.t_bar = tb / static_cast<double>(trace.rows.size());
    return s;
}

/// Step metrics of the feedback temperature in a trace.
inline StepOutcome step_metrics(const SimulationTrace& trace, Feedback feedback, double reference) {
    std::vector<double> t, y;
    t.reserve(trace.rows.size());
    y.reserve(trace.rows.size());
    for (const TraceRow& r : trace.rows) {
        t.push_back(r.t);
        y.push_back(feedback == Feedback::AfterStack ? r.t_stack : r.t_sep);
    }
    return step_metrics(std::span<const double>(t), std::span<const double>(y), reference);
}

}  // namespace etherm
