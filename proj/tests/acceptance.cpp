#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "etherm/io.hpp"
#include "etherm/step_response.hpp"
#include "etherm/tuner.hpp"

using namespace etherm;
namespace fs = std::filesystem;

namespace {

const std::string kCli = ETHERM_CLI;
const std::string kSource = ETHERM_SOURCE_DIR;

struct Outcome {
    bool pass = false;
    std::string detail;
};

class Report {
public:
    void add(std::ostringstream& os, bool ok) {
        pass_ = pass_ && ok;
        if (!ok) os << " [x]";
    }
    Outcome done(std::ostringstream& os) const { return {pass_, os.str()}; }

private:
    bool pass_ = true;
};

int jobs() { return std::max(2u, std::thread::hardware_concurrency()); }

const DelayedLinearModel& rated_model() {
    static const DelayedLinearModel m = linearize(SystemParams{}, rated_equilibrium(SystemParams{}));
    return m;
}

double max_state_deviation(const SimulationTrace& tr, const ThermalState& ref, double t_from = 0.0) {
    double d = 0.0;
    for (const TraceRow& r : tr.rows)
        if (r.t >= t_from)
            d = std::max({d, std::abs(r.t_stack - ref.t_stack), std::abs(r.t_sep - ref.t_sep),
                          std::abs(r.t_cool - ref.t_cool)});
    return d;
}

Scenario load_scenario(const std::string& name) {
    return scenario_from_json(read_json_file(kSource + "/configs/scenarios/" + name + ".json", "scenario"),
                              SystemParams{});
}

Outcome equilibrium_holds() {
    std::ostringstream os;
    Report rep;
    const SystemParams p;
    const Equilibrium eq = rated_equilibrium(p);
    const double norm = derivatives(eq.state, eq.state.t_sep, eq.valve, eq.inputs, p).norm();
    os << "|f| = " << norm << " K/s";
    rep.add(os, norm < 1e-6);

    ScenarioConfig cfg;
    cfg.duration = 10 * 3600.0;
    cfg.initial_state = eq.state;
    cfg.initial_valve = eq.valve;
    cfg.setpoint_profile = Schedule(eq.state.t_stack);
    cfg.pid = kAfterStackReference;
    const double drift = max_state_deviation(simulate(cfg, p), eq.state);
    os << ", 10 h drift = " << drift << " K";
    rep.add(os, drift < 0.01);
    return rep.done(os);
}

Outcome linear_model_structure() {
    std::ostringstream os;
    Report rep;
    const DelayedLinearModel& m = rated_model();
    int a1_nonzero = 0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) a1_nonzero += m.a1(i, j) != 0.0;
    const bool structure = m.e.isZero(0.0) && m.e1.isZero(0.0) && m.a2.isZero(0.0) && a1_nonzero == 1 &&
                           m.a1(0, 1) != 0.0;
    os << "e = e1 = a2 = 0, a1 single entry";
    rep.add(os, structure);

    // Stack-row partials evaluated symbolically in 40-digit arithmetic.
    const double expect[4] = {-0.0048533909382965662957, -0.00014145636991982377839, 0.0,
                              0.0045925925925925925926};
    const double got[4] = {m.a(0, 0), m.a(0, 1), m.a(0, 2), m.a1(0, 1)};
    double worst = 0.0;
    for (int k = 0; k < 4; ++k) {
        const double err = expect[k] == 0.0 ? std::abs(got[k]) : std::abs(got[k] / expect[k] - 1.0);
        worst = std::max(worst, err);
    }
    os << ", worst stack-row partial error = " << worst;
    rep.add(os, worst < 1e-4);
    return rep.done(os);
}

Outcome closed_loop_poles() {
    std::ostringstream os;
    Report rep;
    const RationalTf cl = closed_loop(plant_transfer(rated_model(), Feedback::AfterStack), kAfterStackReference);
    const PoleSet ps = poles(cl);
    double worst = 0.0;
    for (const Pole& pl : ps.poles) worst = std::max(worst, pl.residual);
    os << ps.size() << " poles, " << cl.num.degree() << " zeros, max residual " << worst << ", max Re "
       << ps.max_real() << " 1/s";
    rep.add(os, ps.size() == 6 && worst < 1e-8);
    return rep.done(os);
}

Outcome reference_gains_stable() {
    std::ostringstream os;
    Report rep;
    const SystemParams p;
    for (const PidParams& pid : {kAfterStackReference, kBeforeStackReference}) {
        const StabilityCheck c = is_stable(pid, rated_model());
        const Equilibrium& eq = rated_model().equilibrium;
        ScenarioConfig cfg;
        cfg.duration = 12 * 3600.0;
        cfg.initial_state = {eq.state.t_stack + 0.5, eq.state.t_sep + 0.5, eq.state.t_cool + 0.5};
        cfg.initial_valve = eq.valve;
        cfg.setpoint_profile = Schedule(feedback_temperature(eq.state, pid.feedback));
        cfg.pid = pid;
        const SimulationTrace tr = simulate(cfg, p);
        const double tail = max_state_deviation(tr, eq.state, cfg.duration - 3600.0);
        os << to_string(pid.feedback) << ": max Re " << c.max_real_pole << " 1/s, last-hour deviation " << tail
           << " K";
        rep.add(os, c.stable && tail < 0.05);
        os << "; ";
    }
    return rep.done(os);
}

Outcome feedback_orderings() {
    std::ostringstream os;
    Report rep;
    for (const char* name : {"load_step", "wind"}) {
        const Scenario sc = load_scenario(name);
        ScenarioStats s[2];
        for (const ScenarioRun& run : sc.runs) {
            const int k = run.config.pid.feedback == Feedback::AfterStack ? 0 : 1;
            s[k] = scenario_stats(simulate(run.config, SystemParams{}), run.config.pid.feedback, sc.window);
        }
        os << name << ": dTmax before " << s[1].delta_t_max << " < after " << s[0].delta_t_max << ", rms before "
           << s[1].delta_t_rms << " < after " << s[0].delta_t_rms << ", Tbar after " << s[0].t_bar << " > before "
           << s[1].t_bar;
        rep.add(os, s[1].delta_t_max < s[0].delta_t_max && s[1].delta_t_rms < s[0].delta_t_rms &&
                        s[0].t_bar > s[1].t_bar);
        os << "; ";
    }
    return rep.done(os);
}

std::set<std::tuple<double, double, double>> stable_set(const StabilityMap& m) {
    std::set<std::tuple<double, double, double>> s;
    for (const auto& p : m.points)
        if (p.stable) s.emplace(p.kp, p.ki, p.kd);
    return s;
}

Outcome stability_regions() {
    std::ostringstream os;
    Report rep;
    const GridSpec g;
    const ScanOptions opt{0.0, jobs()};
    const auto after = stability_region(rated_model(), Feedback::AfterStack, g, opt);
    const auto before = stability_region(rated_model(), Feedback::BeforeStack, g, opt);
    os << "stable after " << after.stable_count() << " / before " << before.stable_count() << " of "
       << after.points.size();
    rep.add(os, after.stable_count() < before.stable_count());

    std::vector<std::set<std::tuple<double, double, double>>> sets;
    for (double tau2 : {120.0, 240.0, 480.0}) {
        SystemParams p;
        p.tau2 = tau2;
        sets.push_back(stable_set(stability_region(linearize(p, rated_equilibrium(p)), Feedback::AfterStack, g, opt)));
    }
    auto subset = [](const auto& small, const auto& big) {
        return std::includes(big.begin(), big.end(), small.begin(), small.end());
    };
    os << ", tau2 2/4/8 min: " << sets[0].size() << " >= " << sets[1].size() << " >= " << sets[2].size();
    rep.add(os, subset(sets[1], sets[0]) && subset(sets[2], sets[1]) && sets[2].size() < sets[0].size());
    return rep.done(os);
}

Outcome delay_trends() {
    std::ostringstream os;
    Report rep;
    std::vector<std::pair<double, double>> delays;
    for (double t1 : {0.0, 240.0, 480.0, 720.0})
        for (double t2 : {0.0, 240.0, 480.0, 720.0}) delays.emplace_back(t1, t2);
    TuningOptions opt;
    opt.jobs = jobs();

    const DelaySurface a = delay_sweep(SystemParams{}, Feedback::AfterStack, delays, GridSpec{}, opt);
    const DelaySurface b = delay_sweep(SystemParams{}, Feedback::BeforeStack, delays, GridSpec{}, opt);
    const DelaySample& a00 = a.samples.front();
    const DelaySample& a12 = a.samples.back();
    if (!a00.ok || !a12.ok) {
        os << "after-stack corner failed: " << a00.error << a12.error;
        rep.add(os, false);
        return rep.done(os);
    }
    const double ratio = a12.result.settling_time / a00.result.settling_time;
    os << "after: ts " << a00.result.settling_time / 3600 << " -> " << a12.result.settling_time / 3600
       << " h (x" << ratio << ")";
    rep.add(os, ratio > 5.0);
    os << ", gamma " << 100 * a00.result.overshoot << "% -> " << 100 * a12.result.overshoot << "%";
    rep.add(os, a00.result.overshoot < 0.02 && a12.result.overshoot > 0.10);

    double gmax = 0.0;
    bool all_ok = true;
    std::ostringstream over;
    for (const DelaySample& s : b.samples) {
        all_ok = all_ok && s.ok;
        if (!s.ok) continue;
        gmax = std::max(gmax, s.result.overshoot);
        if (s.result.overshoot >= 0.05)
            over << " (" << s.tau1 / 60 << "," << s.tau2 / 60 << ") min: " << 100 * s.result.overshoot << "%";
    }
    os << "; before: max gamma " << 100 * gmax << "%";
    if (!over.str().empty()) os << " at" << over.str();
    rep.add(os, all_ok && gmax < 0.05);
    if (!b.settling_fit) {
        os << ", no settling-time fit";
        rep.add(os, false);
    } else {
        const SurfaceFit& f = *b.settling_fit;
        os << ", ts fit tau1 coef " << f.a[1] << " vs tau2 coef " << f.a[2];
        rep.add(os, std::abs(f.a[2]) > std::abs(f.a[1]));
        if (b.overshoot_fit)
            os << " (gamma fit: " << b.overshoot_fit->a[1] << " vs " << b.overshoot_fit->a[2] << ")";
    }
    return rep.done(os);
}

// The same loop on the delayed linear model with exact delays and the same
// discrete PID (no clamp), integrated like the simulator. Separates the
// Pade error of the transfer function from genuine nonlinearity.
std::vector<double> exact_delay_response(const DelayedLinearModel& m, const PidParams& pid, double step,
                                         double horizon, double dt) {
    const Eigen::RowVector3d f = feedback_row(pid.feedback);
    const auto n = static_cast<std::size_t>(std::llround(horizon / dt));
    const auto d1 = static_cast<std::size_t>(std::llround(m.tau1 / dt));
    const auto d2 = static_cast<std::size_t>(std::llround(m.tau2 / dt));
    std::vector<Eigen::Vector3d> xs;
    std::vector<double> us, y;
    Eigen::Vector3d x = Eigen::Vector3d::Zero();
    double u = 0.0, integral = 0.0, prev = 0.0;
    for (std::size_t k = 0; k <= n; ++k) {
        if (k > 0) {
            const double e = f * x - step;
            integral += e * dt;
            u = pid.kp * e + pid.ki * integral + pid.kd * (e - prev) / dt;
            prev = e;
        }
        xs.push_back(x);
        us.push_back(u);
        y.push_back(f * x);
        const Eigen::Vector3d x1 = k >= d1 ? xs[k - d1] : Eigen::Vector3d::Zero();
        const Eigen::Vector3d x2 = k >= d2 ? xs[k - d2] : Eigen::Vector3d::Zero();
        const double u1 = k >= d1 ? us[k - d1] : 0.0, u2 = k >= d2 ? us[k - d2] : 0.0;
        auto rate = [&](const Eigen::Vector3d& s) -> Eigen::Vector3d {
            return m.a * s + m.a1 * x1 + m.a2 * x2 + m.e * u + m.e1 * u1 + m.e2 * u2;
        };
        const Eigen::Vector3d k1 = rate(x), k2 = rate(x + 0.5 * dt * k1), k3 = rate(x + 0.5 * dt * k2),
                              k4 = rate(x + dt * k3);
        x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return y;
}

Outcome linear_matches_nonlinear() {
    std::ostringstream os;
    Report rep;
    const SystemParams p;
    const Scenario sc = load_scenario("setpoint_step");
    const double step = 0.5, t_step = 600.0, horizon = 7200.0;
    for (const ScenarioRun& run : sc.runs) {
        const Feedback fb = run.config.pid.feedback;
        const SimulationTrace tr = simulate(run.config, p);
        const double base = feedback_temperature(sc.equilibrium->state, fb);
        const RationalTf cl = closed_loop(plant_transfer(rated_model(), fb), run.config.pid);
        const StepResponse lin = step_response(cl, horizon, run.config.dt);
        const std::vector<double> exact =
            exact_delay_response(rated_model(), run.config.pid, step, horizon, run.config.dt);
        double worst = 0.0, worst_exact = 0.0, vmin = 1.0, vmax = 0.0;
        for (std::size_t k = 0; k < lin.t.size(); ++k) {
            const TraceRow& r = tr.rows.at(static_cast<std::size_t>(std::llround((t_step + lin.t[k]) / tr.dt)));
            const double y_nl = (fb == Feedback::AfterStack ? r.t_stack : r.t_sep) - base;
            worst = std::max(worst, std::abs(y_nl - step * lin.y[k]));
            worst_exact = std::max(worst_exact, std::abs(y_nl - exact[k]));
            vmin = std::min(vmin, r.valve);
            vmax = std::max(vmax, r.valve);
        }
        os << to_string(fb) << ": max |nonlinear - linear| = " << 100 * worst / step << "% of step";
        rep.add(os, worst < 0.05 * step);
        os << " (exact-delay linear model " << 100 * worst_exact / step << "%, valve range [" << vmin << ", "
           << vmax << "])";
        os << "; ";
    }
    return rep.done(os);
}

Outcome step_metric_oracles() {
    std::ostringstream os;
    Report rep;
    std::vector<double> t;
    for (int k = 0; k <= 60000; ++k) t.push_back(k * 1e-3);
    for (double zeta : {0.3, 0.5, 0.7}) {
        const double wd = std::sqrt(1 - zeta * zeta), phi = std::acos(zeta);
        std::vector<double> y;
        for (double tk : t) y.push_back(1.0 - std::exp(-zeta * tk) / wd * std::sin(wd * tk + phi));
        const auto o = step_metrics(std::span<const double>(t), std::span<const double>(y), 0.0);
        const double expect = std::exp(-M_PI * zeta / wd);
        const double got = std::holds_alternative<StepMetrics>(o) ? std::get<StepMetrics>(o).overshoot : NAN;
        os << "zeta " << zeta << ": " << got << " vs " << expect;
        rep.add(os, std::abs(got - expect) < 1e-3);
        os << "; ";
    }
    std::vector<double> y;
    for (double tk : t) y.push_back(1.0 - std::exp(-tk / 3.0));
    const auto o = step_metrics(std::span<const double>(t), std::span<const double>(y), 0.0);
    const double got = std::holds_alternative<StepMetrics>(o) ? std::get<StepMetrics>(o).overshoot : NAN;
    os << "first order: " << got;
    rep.add(os, got == 0.0);
    return rep.done(os);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

int run_cli(const std::string& args) {
    const int rc = std::system((kCli + " " + args + " > /dev/null 2>&1").c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

Outcome cli_replay_identical() {
    std::ostringstream os;
    Report rep;
    const fs::path root = fs::temp_directory_path() / "etherm_acceptance";
    fs::remove_all(root);
    const std::pair<const char*, std::string> commands[] = {
        {"equilibrium", "equilibrium"},
        {"linearize", "linearize"},
        {"stability", "stability"},
        {"tune", "tune --feedback both"},
        {"delay-sweep", "delay-sweep --tau1-list 0,720 --tau2-list 0,720 --kp-count 6 --ki-count 6 --kd-count 5"},
        {"simulate", "simulate " + kSource + "/configs/scenarios/setpoint_step.json --decimation 10"},
    };
    const std::string par = std::to_string(jobs());
    for (const auto& [name, args] : commands) {
        const fs::path a = root / (std::string(name) + "_serial"), b = root / (std::string(name) + "_replay");
        const int rc_a = run_cli("--jobs 1 --out " + a.string() + " " + args);
        const int rc_b = rc_a == 0 ? run_cli("--jobs " + par + " --out " + b.string() + " replay " +
                                             (a / "manifest.json").string())
                                   : -1;
        bool same = rc_a == 0 && rc_b == 0;
        std::size_t files = 0;
        if (same) {
            for (const auto& e : fs::directory_iterator(a)) {
                const std::string f = e.path().filename().string();
                if (f == "manifest.json") continue;
                ++files;
                same = same && fs::exists(b / f) && slurp(e.path()) == slurp(b / f);
            }
            for (const auto& e : fs::directory_iterator(b)) same = same && fs::exists(a / e.path().filename());
            same = same && json::parse(slurp(a / "manifest.json"))["request"] ==
                               json::parse(slurp(b / "manifest.json"))["request"];
        }
        os << name << " (" << files << " files)";
        rep.add(os, same && files > 0);
        os << "; ";
    }
    os << "serial vs --jobs " << par;
    fs::remove_all(root);
    return rep.done(os);
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* title;
        double budget_s;  // 0 = none
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "equilibrium correctness", 5, equilibrium_holds},
        {2, "delayed linear model structure", 0, linear_model_structure},
        {3, "closed-loop pole count", 0, closed_loop_poles},
        {4, "stability of the reference controllers", 30, reference_gains_stable},
        {5, "feedback comparison orderings", 0, feedback_orderings},
        {6, "stability-region comparisons", 300, stability_regions},
        {7, "delay-sensitivity trends", 900, delay_trends},
        {8, "linear-nonlinear agreement", 0, linear_matches_nonlinear},
        {9, "step metric oracles", 0, step_metric_oracles},
        {10, "CLI replay determinism", 0, cli_replay_identical},
    };
    int failed = 0;
    for (const Criterion& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.budget_s > 0 && secs > c.budget_s) {
            o.pass = false;
            o.detail += " [over time budget]";
        }
        failed += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.title << ", " << secs
                  << " s): " << o.detail << std::endl;
    }
    std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
    return failed == 0 ? 0 : 1;
}
