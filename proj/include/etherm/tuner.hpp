#pragma once

// Stability-region scans, grid-search tuning and delay sweeps.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "etherm/equilibrium.hpp"
#include "etherm/linearizer.hpp"
#include "etherm/metrics.hpp"
#include "etherm/step_response.hpp"

namespace etherm {

enum class AxisScale { Linear, Log };

struct GridAxis {
    double min = 0.0;
    double max = 1.0;
    int count = 2;
    AxisScale scale = AxisScale::Log;
    bool include_zero = false;  // prepend an explicit 0 sample

    void validate(const std::string& field) const {
        if (!(std::isfinite(min) && std::isfinite(max))) throw ValidationError(field, "bounds must be finite");
        if (count < 1) throw ValidationError(field + ".count", "must be >= 1");
        if (count == 1 ? min != max : !(min < max)) throw ValidationError(field, "min must be < max");
        if (scale == AxisScale::Log && !(min > 0.0)) throw ValidationError(field + ".min", "log scale requires min > 0");
        if (min < 0.0) throw ValidationError(field + ".min", "gains must be >= 0");
    }

    std::vector<double> values() const {
        std::vector<double> v;
        if (include_zero) v.push_back(0.0);
        for (int i = 0; i < count; ++i) {
            if (count == 1) {
                v.push_back(min);
                break;
            }
            const double f = static_cast<double>(i) / (count - 1);
            double x = scale == AxisScale::Log ? std::exp(std::log(min) + f * (std::log(max) - std::log(min)))
                                               : min + f * (max - min);
            if (i == count - 1) x = max;
            if (i == 0) x = min;
            v.push_back(x);
        }
        return v;
    }
};

struct GridSpec {
    GridAxis kp{1e-3, 1.0, 10, AxisScale::Log, false};
    GridAxis ki{1e-6, 1e-3, 10, AxisScale::Log, false};
    GridAxis kd{1e-1, 1e2, 9, AxisScale::Log, true};

    void validate() const {
        kp.validate("grid.kp");
        ki.validate("grid.ki");
        kd.validate("grid.kd");
    }

    std::vector<PidParams> points(Feedback f) const {
        std::vector<PidParams> out;
        const auto vp = kp.values(), vi = ki.values(), vd = kd.values();
        out.reserve(vp.size() * vi.size() * vd.size());
        for (double a : vp)
            for (double b : vi)
                for (double c : vd) out.push_back({a, b, c, f});
        return out;
    }
};

/// Evaluates f(i) for i in [0, n) on `jobs` threads; results land by index
/// so the output never depends on scheduling.
template <typename T, typename F>
std::vector<T> parallel_map(std::size_t n, int jobs, F&& f) {
    std::vector<T> out(n);
    const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(n)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
        return out;
    }
    std::atomic<std::size_t> next{0};
    auto run = [&] {
        for (std::size_t i = next++; i < n; i = next++) out[i] = f(i);
    };
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(run);
    run();
    for (auto& t : pool) t.join();
    return out;
}

struct StabilityCheck {
    bool stable = false;
    double max_real_pole = std::numeric_limits<double>::quiet_NaN();  // 1/s
};

class GainEvaluationError : public std::runtime_error {
public:
    GainEvaluationError(const PidParams& pid, const std::string& what)
        : std::runtime_error(describe(pid) + ": " + what), pid_(pid) {}
    const PidParams& pid() const { return pid_; }

    static std::string describe(const PidParams& p) {
        std::ostringstream os;
        os.precision(17);
        os << "kp=" << p.kp << " ki=" << p.ki << " kd=" << p.kd;
        return os.str();
    }

private:
    PidParams pid_;
};

inline StabilityCheck is_stable(const PidParams& pid, const RationalTf& plant, double sigma_margin = 0.0) {
    try {
        const PoleSet ps = poles(closed_loop(plant, pid));
        const double mr = ps.max_real();
        return {mr < -sigma_margin, mr};
    } catch (const std::exception& e) {
        throw GainEvaluationError(pid, e.what());
    }
}

inline StabilityCheck is_stable(const PidParams& pid, const DelayedLinearModel& model, double sigma_margin = 0.0) {
    return is_stable(pid, plant_transfer(model, pid.feedback), sigma_margin);
}

struct StabilityPoint {
    double kp = 0.0, ki = 0.0, kd = 0.0;
    double max_real_pole = std::numeric_limits<double>::quiet_NaN();
    bool stable = false;
    bool failed = false;  // pole computation failed; counted as unstable
    std::string error;
};

struct StabilityMap {
    Feedback feedback = Feedback::AfterStack;
    std::vector<StabilityPoint> points;

    std::size_t stable_count() const {
        return static_cast<std::size_t>(std::count_if(points.begin(), points.end(), [](auto& p) { return p.stable; }));
    }
};

struct ScanOptions {
    double sigma_margin = 0.0;
    int jobs = 1;
};

inline StabilityMap stability_region(const DelayedLinearModel& model, Feedback feedback, const GridSpec& grid,
                                     const ScanOptions& opt = {}) {
    grid.validate();
    const RationalTf plant = plant_transfer(model, feedback);
    const std::vector<PidParams> pts = grid.points(feedback);
    StabilityMap map;
    map.feedback = feedback;
    map.points = parallel_map<StabilityPoint>(pts.size(), opt.jobs, [&](std::size_t i) {
        const PidParams& g = pts[i];
        StabilityPoint sp;
        sp.kp = g.kp;
        sp.ki = g.ki;
        sp.kd = g.kd;
        try {
            const StabilityCheck c = is_stable(g, plant, opt.sigma_margin);
            sp.stable = c.stable;
            sp.max_real_pole = c.max_real_pole;
        } catch (const std::exception& e) {
            sp.failed = true;
            sp.error = e.what();
        }
        return sp;
    });
    return map;
}

struct TuningOptions {
    double gamma0 = 0.5;
    double ts0 = 7200.0;       // s
    double horizon = 40 * 3600.0;  // s
    double dt = 30.0;          // s
    double sigma_margin = 0.0;
    int jobs = 1;
};

struct TuningResult {
    PidParams best;
    double objective = std::numeric_limits<double>::infinity();
    double overshoot = 0.0;
    double overshoot_absolute = 0.0;
    double settling_time = 0.0;  // s
    std::size_t evaluated = 0;   // grid points scanned
    std::size_t stable = 0;
    std::size_t infeasible = 0;  // stable but not settled, or evaluation failure
};

class NoStablePoint : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct PointScore {
    bool stable = false;
    bool feasible = false;
    double objective = std::numeric_limits<double>::infinity();
    StepMetrics metrics;
};

inline double tuning_objective(double overshoot, double settling_time, double gamma0, double ts0) {
    const double a = std::isinf(gamma0) ? 0.0 : overshoot / gamma0;
    const double b = std::isinf(ts0) ? 0.0 : settling_time / ts0;
    return a * a + b * b;
}

/// Step metrics of the closed loop's unit set-point response.
inline StepOutcome closed_loop_step_metrics(const RationalTf& plant, const PidParams& pid, const TuningOptions& opt) {
    const StepResponse r = step_response(closed_loop(plant, pid), opt.horizon, opt.dt);
    return step_metrics(std::span<const double>(r.t), std::span<const double>(r.y), 0.0);
}

inline std::string describe_grid(const GridSpec& g) {
    std::ostringstream os;
    os << "kp [" << g.kp.min << ", " << g.kp.max << "] ki [" << g.ki.min << ", " << g.ki.max << "] kd ["
       << (g.kd.include_zero ? 0.0 : g.kd.min) << ", " << g.kd.max << "]";
    return os.str();
}

inline TuningResult tune(const DelayedLinearModel& model, Feedback feedback, const GridSpec& grid,
                         const TuningOptions& opt = {}) {
    grid.validate();
    if (!(opt.gamma0 > 0.0) || !(opt.ts0 > 0.0)) throw ValidationError("gamma0/ts0", "must be > 0");
    const RationalTf plant = plant_transfer(model, feedback);
    const std::vector<PidParams> pts = grid.points(feedback);

    const std::vector<PointScore> scores = parallel_map<PointScore>(pts.size(), opt.jobs, [&](std::size_t i) {
        PointScore s;
        try {
            if (!is_stable(pts[i], plant, opt.sigma_margin).stable) return s;
            s.stable = true;
            const StepOutcome o = closed_loop_step_metrics(plant, pts[i], opt);
            if (const auto* m = std::get_if<StepMetrics>(&o)) {
                s.feasible = true;
                s.metrics = *m;
                s.objective = tuning_objective(m->overshoot, m->settling_time, opt.gamma0, opt.ts0);
            }
        } catch (const std::exception&) {
        }
        return s;
    });

    TuningResult res;
    res.evaluated = pts.size();
    std::optional<std::size_t> best;
    auto key = [&](std::size_t i) { return std::tuple(pts[i].kp, pts[i].ki, pts[i].kd); };
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const PointScore& s = scores[i];
        if (s.stable) ++res.stable;
        if (s.stable && !s.feasible) ++res.infeasible;
        if (!s.feasible) continue;
        if (!best || s.objective < scores[*best].objective ||
            (s.objective == scores[*best].objective && key(i) < key(*best)))
            best = i;
    }
    if (res.stable == 0) throw NoStablePoint("tune: no stable grid point in " + describe_grid(grid));
    if (!best) throw NoStablePoint("tune: no stable grid point settles within the horizon in " + describe_grid(grid));
    const PointScore& b = scores[*best];
    res.best = pts[*best];
    res.objective = b.objective;
    res.overshoot = b.metrics.overshoot;
    res.overshoot_absolute = b.metrics.overshoot_absolute;
    res.settling_time = b.metrics.settling_time;
    return res;
}

/// Least-squares fit of y = a1 + a2 tau1 + a3 tau2 + a4 tau1 tau2.
struct SurfaceFit {
    std::array<double, 4> a{};
    double residual_rms = 0.0;
    std::size_t samples = 0;

    double operator()(double tau1, double tau2) const { return a[0] + a[1] * tau1 + a[2] * tau2 + a[3] * tau1 * tau2; }
};

inline SurfaceFit fit_bilinear(const std::vector<std::array<double, 3>>& rows) {
    if (rows.size() < 4) throw std::invalid_argument("fit_bilinear: need at least 4 samples");
    Eigen::MatrixXd x(rows.size(), 4);
    Eigen::VectorXd y(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& [t1, t2, v] = rows[i];
        x.row(static_cast<Eigen::Index>(i)) << 1.0, t1, t2, t1 * t2;
        y[static_cast<Eigen::Index>(i)] = v;
    }
    const Eigen::Vector4d a = x.colPivHouseholderQr().solve(y);
    SurfaceFit fit;
    for (int k = 0; k < 4; ++k) fit.a[static_cast<std::size_t>(k)] = a[k];
    fit.residual_rms = std::sqrt((x * a - y).squaredNorm() / static_cast<double>(rows.size()));
    fit.samples = rows.size();
    return fit;
}

struct DelaySample {
    double tau1 = 0.0, tau2 = 0.0;  // s
    bool ok = false;
    std::string error;
    TuningResult result;
};

struct DelaySurface {
    Feedback feedback = Feedback::AfterStack;
    std::vector<DelaySample> samples;
    std::optional<SurfaceFit> settling_fit;  // settling time in s, delays in s
    std::optional<SurfaceFit> overshoot_fit;
    std::vector<std::string> warnings;
};

/// Re-linearizes and re-tunes at every delay pair, then fits the bilinear
/// surfaces. Failed pairs are recorded as gaps.
inline DelaySurface delay_sweep(const SystemParams& params, Feedback feedback,
                                const std::vector<std::pair<double, double>>& delays, const GridSpec& grid,
                                const TuningOptions& opt = {}, double t_amb = 25.0, double t_cool_in = 30.0) {
    DelaySurface out;
    out.feedback = feedback;
    std::vector<std::array<double, 3>> ts_rows, g_rows;
    for (const auto& [t1, t2] : delays) {
        DelaySample s;
        s.tau1 = t1;
        s.tau2 = t2;
        try {
            SystemParams p = params;
            p.tau1 = t1;
            p.tau2 = t2;
            p.validate();
            const DelayedLinearModel m = linearize(p, rated_equilibrium(p, t_amb, t_cool_in));
            s.result = tune(m, feedback, grid, opt);
            s.ok = true;
            ts_rows.push_back({t1, t2, s.result.settling_time});
            g_rows.push_back({t1, t2, s.result.overshoot});
        } catch (const std::exception& e) {
            s.error = e.what();
            out.warnings.push_back("gap at tau1=" + std::to_string(t1) + " s, tau2=" + std::to_string(t2) +
                                   " s: " + e.what());
        }
        out.samples.push_back(std::move(s));
    }
    if (ts_rows.size() >= 4) {
        out.settling_fit = fit_bilinear(ts_rows);
        out.overshoot_fit = fit_bilinear(g_rows);
    } else {
        out.warnings.push_back("fewer than 4 successful samples; surface not fitted");
    }
    if (ts_rows.size() < 6)
        out.warnings.push_back("surface fit based on only " + std::to_string(ts_rows.size()) + " samples");
    return out;
}

}  // namespace etherm
