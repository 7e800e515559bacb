// etherm: command-line front end.
//
// Every command is first turned into a request document (command, resolved
// parameter set, options). The request is what gets executed and what the
// run manifest stores, so `etherm replay` reproduces a run exactly.

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "etherm/equilibrium.hpp"
#include "etherm/io.hpp"
#include "etherm/linearizer.hpp"
#include "etherm/metrics.hpp"
#include "etherm/simulator.hpp"
#include "etherm/tuner.hpp"

namespace fs = std::filesystem;
using namespace etherm;

namespace {

constexpr const char* kToolVersion = "etherm 0.1.0";

class RuntimeFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Output files are written into a staging directory inside out_dir and only
// moved into place once the command has succeeded.
class Staging {
public:
    explicit Staging(fs::path out) : out_(std::move(out)) {
        if (!fs::exists(out_)) {
            fs::create_directories(out_);
            created_ = true;
        }
        stage_ = out_ / ".etherm-staging";
        fs::remove_all(stage_);
        fs::create_directory(stage_);
    }

    std::ofstream open(const std::string& name) {
        files_.push_back(name);
        std::ofstream os(stage_ / name, std::ios::binary);
        if (!os) throw RuntimeFailure("cannot write " + (stage_ / name).string());
        return os;
    }

    void write_json(const std::string& name, const json& j) {
        auto os = open(name);
        os << j.dump(2) << '\n';
    }

    const std::vector<std::string>& files() const { return files_; }

    void commit() {
        for (const auto& f : files_) fs::rename(stage_ / f, out_ / f);
        fs::remove_all(stage_);
        done_ = true;
    }

    ~Staging() {
        if (done_) return;
        std::error_code ec;
        fs::remove_all(stage_, ec);
        if (created_ && fs::is_empty(out_, ec)) fs::remove(out_, ec);
    }

private:
    fs::path out_, stage_;
    std::vector<std::string> files_;
    bool created_ = false;
    bool done_ = false;
};

json matrix_json(const Eigen::Matrix3d& m) {
    json j = json::array();
    for (int r = 0; r < 3; ++r) j.push_back({m(r, 0), m(r, 1), m(r, 2)});
    return j;
}

json vector_json(const Eigen::Vector3d& v) { return {v[0], v[1], v[2]}; }

json complex_list(const std::vector<cplx>& zs, double unit) {
    json j = json::array();
    for (const cplx& z : zs) j.push_back({z.real() / unit, z.imag() / unit});
    return j;
}

json tf_json(const RationalTf& tf) {
    json poles_j = json::array();
    for (const Pole& p : poles(tf).poles) poles_j.push_back({p.value.real(), p.value.imag()});
    return {{"time_unit_s", tf.time_unit},
            {"num", tf.num.coeffs()},
            {"den", tf.den.coeffs()},
            {"dc_gain", tf.dc_gain()},
            {"poles_per_s", poles_j},
            {"zeros_per_s", complex_list(polynomial_roots(tf.num), tf.time_unit)}};
}

// ------------------------------------------------------------ request pieces

double opt_num(const json& o, const char* key, double fallback) {
    if (!o.contains(key) || o[key].is_null()) return fallback;
    if (!o[key].is_number()) throw ValidationError(std::string("options.") + key, "expected a number");
    return o[key].get<double>();
}

std::vector<Feedback> feedbacks(const json& o, const char* fallback) {
    const std::string f = o.value("feedback", std::string(fallback));
    if (f == "both") return {Feedback::AfterStack, Feedback::BeforeStack};
    try {
        return {feedback_from_string(f)};
    } catch (const ValidationError&) {
        throw ValidationError("options.feedback", "expected after, before or both");
    }
}

SystemParams params_with_delays(const json& req) {
    SystemParams p = params_from_json(req.at("params"));
    const json& o = req.at("options");
    p.tau1 = opt_num(o, "tau1", p.tau1);
    p.tau2 = opt_num(o, "tau2", p.tau2);
    p.validate();
    return p;
}

// Operating point: stack outlet pinned at `temp`, as at the rated point.
Equilibrium operating_point(const SystemParams& p, const json& o) {
    ExogenousInputs in{opt_num(o, "current", 820.0), opt_num(o, "t_amb", 25.0), opt_num(o, "t_cool_in", 30.0),
                       opt_num(o, "temp", 80.0)};
    if (!(in.current >= 0.0)) throw ValidationError("options.current", "must be >= 0");
    return find_equilibrium(p, in, in.t_aim, Feedback::AfterStack);
}

json axis_json(const GridAxis& a) {
    return {{"min", a.min},
            {"max", a.max},
            {"count", a.count},
            {"scale", a.scale == AxisScale::Log ? "log" : "linear"},
            {"include_zero", a.include_zero}};
}

GridAxis axis_from_json(const json& j, const std::string& path) {
    detail::reject_unknown(j, path, {"min", "max", "count", "scale", "include_zero"});
    GridAxis a;
    a.min = detail::number(j.at("min"), path + ".min");
    a.max = detail::number(j.at("max"), path + ".max");
    if (!j.at("count").is_number_integer()) throw ValidationError(path + ".count", "expected an integer");
    a.count = j.at("count").get<int>();
    const std::string s = j.value("scale", std::string("log"));
    if (s != "log" && s != "linear") throw ValidationError(path + ".scale", "expected log or linear");
    a.scale = s == "log" ? AxisScale::Log : AxisScale::Linear;
    a.include_zero = j.value("include_zero", false);
    a.validate(path);
    return a;
}

json grid_json(const GridSpec& g) { return {{"kp", axis_json(g.kp)}, {"ki", axis_json(g.ki)}, {"kd", axis_json(g.kd)}}; }

GridSpec grid_from_json(const json& j) {
    GridSpec g;
    g.kp = axis_from_json(j.at("kp"), "grid.kp");
    g.ki = axis_from_json(j.at("ki"), "grid.ki");
    g.kd = axis_from_json(j.at("kd"), "grid.kd");
    return g;
}

TuningOptions tuning_options(const json& o, int jobs) {
    TuningOptions t;
    t.gamma0 = opt_num(o, "gamma0", t.gamma0);
    t.ts0 = opt_num(o, "ts0", t.ts0);
    t.horizon = opt_num(o, "horizon", t.horizon);
    t.dt = opt_num(o, "dt", t.dt);
    t.sigma_margin = opt_num(o, "sigma_margin", t.sigma_margin);
    t.jobs = jobs;
    if (!(t.gamma0 > 0.0)) throw ValidationError("options.gamma0", "must be > 0");
    if (!(t.ts0 > 0.0)) throw ValidationError("options.ts0", "must be > 0");
    if (!(t.dt > 0.0) || !(t.horizon >= t.dt)) throw ValidationError("options.dt", "need 0 < dt <= horizon");
    return t;
}

json tuning_json(const TuningResult& r, const TuningOptions& t) {
    return {{"best", pid_to_json(r.best)},
            {"objective", r.objective},
            {"overshoot", r.overshoot},
            {"overshoot_absolute", r.overshoot_absolute},
            {"settling_time_s", r.settling_time},
            {"evaluated", r.evaluated},
            {"stable", r.stable},
            {"infeasible", r.infeasible},
            {"gamma0", t.gamma0},
            {"ts0_s", t.ts0}};
}

// ------------------------------------------------------------------ commands

void run_equilibrium(const json& req, Staging& st) {
    const SystemParams p = params_with_delays(req);
    const json& o = req.at("options");
    const Feedback fb = feedbacks(o, "after").front();
    ExogenousInputs in{opt_num(o, "current", 820.0), opt_num(o, "t_amb", 25.0), opt_num(o, "t_cool_in", 30.0),
                       opt_num(o, "temp", 80.0)};
    const Equilibrium eq = find_equilibrium(p, in, in.t_aim, fb);
    const AlgebraicOutputs y = algebraic(eq.state, eq.inputs, p, LmtdPolicy::Strict);
    json j = equilibrium_to_json(eq);
    j["pinned"] = std::string(to_string(fb));
    j["residual_norm"] = steady_rates(eq.state, eq.valve, eq.inputs, p).norm();
    j["algebraic"] = {{"u_cell", y.u_cell}, {"q_ele", y.q_ele}, {"q_dis_stack", y.q_dis_stack},
                      {"q_dis_sep", y.q_dis_sep}, {"lmtd", y.lmtd}};
    st.write_json("equilibrium.json", j);
}

void run_linearize(const json& req, Staging& st) {
    const SystemParams p = params_with_delays(req);
    const json& o = req.at("options");
    const DelayedLinearModel m = linearize(p, operating_point(p, o));
    st.write_json("linear_model.json", {{"a", matrix_json(m.a)},
                                         {"a1", matrix_json(m.a1)},
                                         {"a2", matrix_json(m.a2)},
                                         {"e", vector_json(m.e)},
                                         {"e1", vector_json(m.e1)},
                                         {"e2", vector_json(m.e2)},
                                         {"tau1_s", m.tau1},
                                         {"tau2_s", m.tau2},
                                         {"units", "matrices 1/s, vectors K/s per unit opening"},
                                         {"equilibrium", equilibrium_to_json(m.equilibrium)}});
    json tfs = json::object();
    for (Feedback f : feedbacks(o, "after")) tfs[std::string(to_string(f))] = tf_json(plant_transfer(m, f));
    st.write_json("plant_tf.json", tfs);
}

void run_stability(const json& req, Staging& st, int jobs) {
    const SystemParams p = params_with_delays(req);
    const json& o = req.at("options");
    const GridSpec grid = grid_from_json(o.at("grid"));
    const DelayedLinearModel m = linearize(p, operating_point(p, o));
    ScanOptions so{opt_num(o, "sigma_margin", 0.0), jobs};
    json summary = json::object();
    for (Feedback f : feedbacks(o, "both")) {
        const StabilityMap map = stability_region(m, f, grid, so);
        const std::string name = "stability_" + std::string(to_string(f)) + ".csv";
        auto os = st.open(name);
        write_stability_csv(os, map);
        std::size_t failed = 0;
        for (const auto& pt : map.points) failed += pt.failed ? 1 : 0;
        summary[std::string(to_string(f))] = {
            {"points", map.points.size()}, {"stable", map.stable_count()}, {"failed", failed}, {"file", name}};
    }
    st.write_json("stability_summary.json", summary);
}

void run_tune(const json& req, Staging& st, int jobs) {
    const SystemParams p = params_with_delays(req);
    const json& o = req.at("options");
    const GridSpec grid = grid_from_json(o.at("grid"));
    const TuningOptions t = tuning_options(o, jobs);
    const DelayedLinearModel m = linearize(p, operating_point(p, o));
    for (Feedback f : feedbacks(o, "after")) {
        json j = tuning_json(tune(m, f, grid, t), t);
        j["feedback"] = std::string(to_string(f));
        // Best point with the derivative term switched off, for comparison.
        GridSpec no_d = grid;
        no_d.kd = GridAxis{0.0, 0.0, 1, AxisScale::Linear, false};
        try {
            j["best_without_derivative"] = tuning_json(tune(m, f, no_d, t), t);
        } catch (const NoStablePoint& e) {
            j["best_without_derivative"] = {{"error", e.what()}};
        }
        st.write_json("tuning_" + std::string(to_string(f)) + ".json", j);
    }
}

std::vector<double> list_from(const json& o, const char* key) {
    if (!o.contains(key) || !o[key].is_array() || o[key].empty())
        throw ValidationError(std::string("options.") + key, "expected a non-empty list of delays in s");
    std::vector<double> v;
    for (const auto& x : o[key]) {
        const double d = detail::number(x, std::string("options.") + key);
        if (!(d >= 0.0)) throw ValidationError(std::string("options.") + key, "delays must be >= 0");
        v.push_back(d);
    }
    return v;
}

json fit_json(const std::optional<SurfaceFit>& f) {
    if (!f) return nullptr;
    return {{"a", f->a}, {"residual_rms", f->residual_rms}, {"samples", f->samples}};
}

void run_delay_sweep(const json& req, Staging& st, int jobs) {
    const SystemParams p = params_from_json(req.at("params"));
    const json& o = req.at("options");
    const GridSpec grid = grid_from_json(o.at("grid"));
    const TuningOptions t = tuning_options(o, jobs);
    std::vector<std::pair<double, double>> delays;
    for (double a : list_from(o, "tau1_list"))
        for (double b : list_from(o, "tau2_list")) delays.emplace_back(a, b);
    for (Feedback f : feedbacks(o, "after")) {
        const DelaySurface s = delay_sweep(p, f, delays, grid, t, opt_num(o, "t_amb", 25.0), opt_num(o, "t_cool_in", 30.0));
        const std::string stem = "delay_surface_" + std::string(to_string(f));
        json samples = json::array();
        auto csv = st.open(stem + ".csv");
        csv << "tau1,tau2,ok,kp,ki,kd,objective,overshoot,settling_time\n";
        for (const DelaySample& d : s.samples) {
            json sj = {{"tau1_s", d.tau1}, {"tau2_s", d.tau2}, {"ok", d.ok}};
            csv << format_double(d.tau1) << ',' << format_double(d.tau2) << ',' << (d.ok ? 1 : 0);
            if (d.ok) {
                sj["result"] = tuning_json(d.result, t);
                for (double v : {d.result.best.kp, d.result.best.ki, d.result.best.kd, d.result.objective,
                                 d.result.overshoot, d.result.settling_time})
                    csv << ',' << format_double(v);
            } else {
                sj["error"] = d.error;
                csv << ",,,,,,";
            }
            csv << '\n';
            samples.push_back(sj);
        }
        st.write_json(stem + ".json", {{"feedback", std::string(to_string(f))},
                                       {"samples", samples},
                                       {"fit_units", "delays in s; settling time in s; overshoot as a fraction"},
                                       {"settling_time_fit", fit_json(s.settling_fit)},
                                       {"overshoot_fit", fit_json(s.overshoot_fit)},
                                       {"warnings", s.warnings}});
    }
}

void run_simulate(const json& req, Staging& st) {
    const SystemParams p = params_from_json(req.at("params"));
    const json& o = req.at("options");
    std::optional<std::uint64_t> seed;
    if (o.contains("seed") && !o["seed"].is_null()) seed = o["seed"].get<std::uint64_t>();
    const Scenario sc = scenario_from_json(o.at("scenario"), p, seed);
    const auto decimation = static_cast<std::size_t>(o.value("decimation", 1));

    json stats = json::object();
    std::optional<ScenarioStats> after, before;
    for (const ScenarioRun& run : sc.runs) {
        SimulationTrace trace;
        try {
            trace = simulate(run.config, p);
        } catch (const SimulationAborted& e) {
            throw RuntimeFailure("run '" + run.name + "' aborted at step " + std::to_string(e.step()) + ": " + e.what());
        }
        auto os = st.open("trace_" + run.name + ".csv");
        write_trace_csv(os, trace, decimation);
        const ScenarioStats s = scenario_stats(trace, run.config.pid.feedback, sc.window);
        std::size_t cooling_off = 0, reverse = 0;
        for (const TraceRow& r : trace.rows) {
            cooling_off += (r.flags & kFlagCoolingOff) ? 1 : 0;
            reverse += (r.flags & kFlagReverseConvection) ? 1 : 0;
        }
        stats[run.name] = {{"pid", pid_to_json(run.config.pid)},
                           {"delta_t_max", s.delta_t_max},
                           {"delta_t_rms", s.delta_t_rms},
                           {"t_bar", s.t_bar},
                           {"window_rows", s.window_rows},
                           {"rows", trace.rows.size()},
                           {"rows_cooling_off", cooling_off},
                           {"rows_reverse_convection", reverse}};
        (run.config.pid.feedback == Feedback::AfterStack ? after : before) = s;
    }
    json out = {{"runs", stats}};
    if (sc.equilibrium) out["equilibrium"] = equilibrium_to_json(*sc.equilibrium);
    if (after && before) {
        out["comparison"] = {{"before_delta_t_max_smaller", before->delta_t_max < after->delta_t_max},
                             {"before_delta_t_rms_smaller", before->delta_t_rms < after->delta_t_rms},
                             {"after_t_bar_higher", after->t_bar > before->t_bar}};
    }
    st.write_json("stats.json", out);
}

void execute(const json& req, Staging& st, int jobs) {
    const std::string cmd = req.at("command").get<std::string>();
    if (cmd == "equilibrium") run_equilibrium(req, st);
    else if (cmd == "linearize") run_linearize(req, st);
    else if (cmd == "stability") run_stability(req, st, jobs);
    else if (cmd == "tune") run_tune(req, st, jobs);
    else if (cmd == "delay-sweep") run_delay_sweep(req, st, jobs);
    else if (cmd == "simulate") run_simulate(req, st);
    else throw ValidationError("command", "unknown command '" + cmd + "'");
}

int run_request(const json& req, const std::string& out_dir, int jobs) {
    if (jobs < 1) throw ValidationError("jobs", "must be >= 1");
    const auto t0 = std::chrono::steady_clock::now();
    Staging st(out_dir);
    execute(req, st, jobs);
    std::vector<std::string> outputs = st.files();
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    st.write_json("manifest.json", {{"command", req.at("command")},
                                    {"tool_version", kToolVersion},
                                    {"request", req},
                                    {"outputs", outputs},
                                    {"jobs", jobs},
                                    {"wall_clock_s", wall}});
    st.commit();
    return 0;
}

void add_grid_flags(CLI::App* sub, GridSpec& g, std::string& scale) {
    sub->add_option("--kp-min", g.kp.min);
    sub->add_option("--kp-max", g.kp.max);
    sub->add_option("--kp-count", g.kp.count);
    sub->add_option("--ki-min", g.ki.min);
    sub->add_option("--ki-max", g.ki.max);
    sub->add_option("--ki-count", g.ki.count);
    sub->add_option("--kd-min", g.kd.min);
    sub->add_option("--kd-max", g.kd.max);
    sub->add_option("--kd-count", g.kd.count);
    sub->add_flag("--kd-zero,!--no-kd-zero", g.kd.include_zero, "prepend kd = 0 to the kd axis");
    sub->add_option("--scale", scale, "grid spacing")->check(CLI::IsMember({"log", "linear"}));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Thermal dynamics, linearization and PID tuning for an alkaline electrolysis system"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    std::string params_file, out_dir = "out";
    int jobs = 1;
    std::optional<std::uint64_t> seed;
    app.add_option("--params", params_file, "parameter JSON (defaults built in)")->envname("ETHERM_PARAMS");
    app.add_option("--out", out_dir, "output directory")->envname("ETHERM_OUT");
    app.add_option("--jobs", jobs, "worker threads for grid scans")->envname("ETHERM_JOBS");
    app.add_option("--seed", seed, "seed for synthetic current profiles")->envname("ETHERM_SEED");
    app.fallthrough();

    json opts = json::object();
    double current = 820.0, temp = 80.0, t_amb = 25.0, t_cool_in = 30.0;
    std::optional<double> tau1, tau2;
    std::string feedback;
    GridSpec grid;
    std::string scale = "log";
    double gamma0 = 0.5, ts0 = 7200.0, horizon = 40 * 3600.0, step_dt = 30.0, sigma = 0.0;
    std::string scenario_file;
    int decimation = 1;
    std::vector<double> tau1_list{0, 240, 480, 720}, tau2_list{0, 240, 480, 720};
    std::string manifest_file;

    auto op_flags = [&](CLI::App* s, const char* fb_default) {
        s->add_option("--current", current, "terminal current, A");
        s->add_option("--temp", temp, "pinned controlled temperature, degC");
        s->add_option("--t-amb", t_amb, "ambient temperature, degC");
        s->add_option("--t-cool-in", t_cool_in, "coolant inlet temperature, degC");
        s->add_option("--feedback", feedback, "after | before" + std::string(fb_default[0] == 'b' ? " | both" : ""))
            ->check(CLI::IsMember({"after", "before", "both"}));
    };
    auto delay_flags = [&](CLI::App* s) {
        s->add_option("--tau1", tau1, "override stack delay, s");
        s->add_option("--tau2", tau2, "override cooling delay, s");
    };
    auto tune_flags = [&](CLI::App* s) {
        s->add_option("--gamma0", gamma0, "reference overshoot (fraction)");
        s->add_option("--ts0", ts0, "reference settling time, s");
        s->add_option("--horizon", horizon, "step-response horizon, s");
        s->add_option("--step-dt", step_dt, "step-response sample time, s");
        s->add_option("--sigma-margin", sigma, "require max real pole < -margin, 1/s");
    };

    auto* c_eq = app.add_subcommand("equilibrium", "steady operating point");
    op_flags(c_eq, "after");
    delay_flags(c_eq);
    auto* c_lin = app.add_subcommand("linearize", "delayed linear model and plant transfer function");
    op_flags(c_lin, "both");
    delay_flags(c_lin);
    auto* c_stab = app.add_subcommand("stability", "stability map over a PID grid");
    op_flags(c_stab, "both");
    delay_flags(c_stab);
    add_grid_flags(c_stab, grid, scale);
    c_stab->add_option("--sigma-margin", sigma, "require max real pole < -margin, 1/s");
    auto* c_tune = app.add_subcommand("tune", "grid-search PID tuning");
    op_flags(c_tune, "after");
    delay_flags(c_tune);
    add_grid_flags(c_tune, grid, scale);
    tune_flags(c_tune);
    auto* c_sweep = app.add_subcommand("delay-sweep", "re-tune over a grid of delays and fit the surface");
    c_sweep->add_option("--feedback", feedback, "after | before | both")->check(CLI::IsMember({"after", "before", "both"}));
    c_sweep->add_option("--t-amb", t_amb);
    c_sweep->add_option("--t-cool-in", t_cool_in);
    c_sweep->add_option("--tau1-list", tau1_list, "stack delays, s")->delimiter(',');
    c_sweep->add_option("--tau2-list", tau2_list, "cooling delays, s")->delimiter(',');
    add_grid_flags(c_sweep, grid, scale);
    tune_flags(c_sweep);
    auto* c_sim = app.add_subcommand("simulate", "run a scenario file");
    c_sim->add_option("scenario", scenario_file, "scenario JSON")->required();
    c_sim->add_option("--decimation", decimation, "write every n-th trace row");
    auto* c_replay = app.add_subcommand("replay", "re-run a command from its manifest");
    c_replay->add_option("manifest", manifest_file, "manifest.json of an earlier run")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return e.get_exit_code() == 0 ? app.exit(e) : (app.exit(e), 2);
    }

    try {
        CLI::App* sub = app.get_subcommands().front();
        if (sub == c_replay) {
            const json m = read_json_file(manifest_file, "manifest");
            if (!m.contains("request")) throw ValidationError("manifest.request", "missing");
            return run_request(m["request"], out_dir, jobs);
        }

        json params = params_to_json(params_file.empty() ? SystemParams{}
                                                         : params_from_json(read_json_file(params_file, "params")));
        if (feedback.empty()) feedback = (sub == c_lin || sub == c_stab) ? "both" : "after";
        for (auto& f : {&grid.kp, &grid.ki, &grid.kd}) f->scale = scale == "log" ? AxisScale::Log : AxisScale::Linear;
        json o = {{"current", current}, {"temp", temp}, {"t_amb", t_amb}, {"t_cool_in", t_cool_in},
                  {"feedback", feedback}};
        if (tau1) o["tau1"] = *tau1;
        if (tau2) o["tau2"] = *tau2;
        if (sub == c_stab || sub == c_tune || sub == c_sweep) {
            grid.validate();
            o["grid"] = grid_json(grid);
            o["sigma_margin"] = sigma;
        }
        if (sub == c_tune || sub == c_sweep) {
            o["gamma0"] = gamma0;
            o["ts0"] = ts0;
            o["horizon"] = horizon;
            o["dt"] = step_dt;
        }
        if (sub == c_sweep) {
            o["tau1_list"] = tau1_list;
            o["tau2_list"] = tau2_list;
        }
        if (sub == c_sim) {
            if (decimation < 1) throw ValidationError("decimation", "must be >= 1");
            o = {{"scenario", read_json_file(scenario_file, "scenario")}, {"decimation", decimation}};
            o["seed"] = seed ? json(*seed) : json(nullptr);
        }
        const json req = {{"command", sub->get_name()}, {"params", params}, {"options", o}};
        return run_request(req, out_dir, jobs);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "error: invalid document: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
