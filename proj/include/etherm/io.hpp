#pragma once

// JSON parameter/scenario files and CSV emitters.

#include <cctype>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "etherm/equilibrium.hpp"
#include "etherm/metrics.hpp"
#include "etherm/simulator.hpp"
#include "etherm/tuner.hpp"

namespace etherm {

using json = nlohmann::json;

/// Shortest text that is not locale dependent: 17 significant digits.
inline std::string format_double(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, r.ptr);
}

namespace detail {

struct DoubleField {
    const char* name;
    double SystemParams::*member;
};

inline const std::vector<DoubleField>& param_fields() {
    static const std::vector<DoubleField> f{
        {"cell_area", &SystemParams::cell_area},
        {"u_rev", &SystemParams::u_rev},
        {"u_th", &SystemParams::u_th},
        {"r1", &SystemParams::r1},
        {"r2", &SystemParams::r2},
        {"s_tafel", &SystemParams::s_tafel},
        {"t1", &SystemParams::t1},
        {"t2", &SystemParams::t2},
        {"t3", &SystemParams::t3},
        {"c_stack", &SystemParams::c_stack},
        {"c_sep", &SystemParams::c_sep},
        {"c_cool", &SystemParams::c_cool},
        {"lye_specific_heat", &SystemParams::lye_specific_heat},
        {"lye_density", &SystemParams::lye_density},
        {"lye_flow", &SystemParams::lye_flow},
        {"cool_specific_heat", &SystemParams::cool_specific_heat},
        {"cool_density", &SystemParams::cool_density},
        {"k_valve", &SystemParams::k_valve},
        {"ka_coil", &SystemParams::ka_coil},
        {"r_sep", &SystemParams::r_sep},
        {"stack_surface_area", &SystemParams::stack_surface_area},
        {"stack_diameter", &SystemParams::stack_diameter},
        {"emissivity", &SystemParams::emissivity},
        {"stefan_boltzmann", &SystemParams::stefan_boltzmann},
        {"tau1", &SystemParams::tau1},
        {"tau2", &SystemParams::tau2},
        {"void_fraction", &SystemParams::void_fraction},
        {"electrode_volume", &SystemParams::electrode_volume},
        {"free_volume", &SystemParams::free_volume},
        {"separator_liquid_level", &SystemParams::separator_liquid_level},
        {"koh_mass_fraction", &SystemParams::koh_mass_fraction},
    };
    return f;
}

inline double number(const json& j, const std::string& path) {
    if (!j.is_number()) throw ValidationError(path, "expected a number");
    return j.get<double>();
}

inline void reject_unknown(const json& obj, const std::string& path, std::initializer_list<const char*> known) {
    if (!obj.is_object()) throw ValidationError(path, "expected an object");
    for (const auto& [key, _] : obj.items()) {
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) throw ValidationError(path.empty() ? key : path + "." + key, "unknown key");
    }
}

}  // namespace detail

inline json params_to_json(const SystemParams& p) {
    json j = json::object();
    j["n_cells"] = p.n_cells;
    j["n_parallel"] = p.n_parallel;
    for (const auto& f : detail::param_fields()) j[f.name] = p.*f.member;
    return j;
}

/// Missing keys keep their defaults; unknown keys are rejected.
inline SystemParams params_from_json(const json& j, SystemParams p = {}) {
    if (!j.is_object()) throw ValidationError("params", "expected an object");
    for (const auto& [key, value] : j.items()) {
        const std::string path = "params." + key;
        if (key == "n_cells" || key == "n_parallel") {
            if (!value.is_number_integer()) throw ValidationError(path, "expected an integer");
            (key == "n_cells" ? p.n_cells : p.n_parallel) = value.get<int>();
            continue;
        }
        bool found = false;
        for (const auto& f : detail::param_fields()) {
            if (key == f.name) {
                p.*f.member = detail::number(value, path);
                found = true;
                break;
            }
        }
        if (!found) throw ValidationError(path, "unknown key");
    }
    p.validate();
    return p;
}

inline json read_json_file(const std::string& path, const std::string& what) {
    std::ifstream in(path);
    if (!in) throw ValidationError(what, "cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError(what, std::string("malformed JSON in '") + path + "': " + e.what());
    }
}

inline json state_to_json(const ThermalState& s) {
    return {{"t_stack", s.t_stack}, {"t_sep", s.t_sep}, {"t_cool", s.t_cool}};
}

inline json equilibrium_to_json(const Equilibrium& eq) {
    return {{"state", state_to_json(eq.state)},
            {"valve", eq.valve},
            {"inputs",
             {{"current", eq.inputs.current},
              {"t_amb", eq.inputs.t_amb},
              {"t_cool_in", eq.inputs.t_cool_in},
              {"t_aim", eq.inputs.t_aim}}}};
}

inline json pid_to_json(const PidParams& p) {
    return {{"kp", p.kp}, {"ki", p.ki}, {"kd", p.kd}, {"feedback", std::string(to_string(p.feedback))}};
}

// ---------------------------------------------------------------- scenarios

struct ScenarioRun {
    std::string name;
    ScenarioConfig config;
};

struct Scenario {
    std::vector<ScenarioRun> runs;
    StatsWindow window;
    std::optional<Equilibrium> equilibrium;  // when the initial state was solved for
};

namespace detail {

/// number | [[t, v], ...] ; values optionally shifted by `offset`.
inline Schedule schedule_from_json(const json& j, const std::string& path, double offset = 0.0) {
    if (j.is_number()) return Schedule(j.get<double>() + offset);
    if (!j.is_array()) throw ValidationError(path, "expected a number or a list of [t, value] pairs");
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string ip = path + "[" + std::to_string(i) + "]";
        if (!j[i].is_array() || j[i].size() != 2) throw ValidationError(ip, "expected [t, value]");
        pts.emplace_back(number(j[i][0], ip + "[0]"), number(j[i][1], ip + "[1]") + offset);
    }
    Schedule s(std::move(pts));
    s.validate(path);
    return s;
}

inline Schedule current_from_json(const json& j, const std::string& path, std::optional<std::uint64_t> seed) {
    if (j.is_object() && j.contains("synthetic")) {
        reject_unknown(j, path, {"synthetic"});
        const json& s = j["synthetic"];
        const std::string sp = path + ".synthetic";
        reject_unknown(s, sp, {"rated", "min_fraction", "max_fraction", "hours", "seed"});
        const double rated = s.contains("rated") ? number(s["rated"], sp + ".rated") : 820.0;
        const double lo = s.contains("min_fraction") ? number(s["min_fraction"], sp + ".min_fraction") : 0.4;
        const double hi = s.contains("max_fraction") ? number(s["max_fraction"], sp + ".max_fraction") : 1.0;
        if (!s.contains("hours") || !s["hours"].is_number_integer() || s["hours"].get<int>() < 1)
            throw ValidationError(sp + ".hours", "expected a positive integer");
        if (!(rated > 0.0) || !(lo >= 0.0) || !(hi >= lo))
            throw ValidationError(sp, "need rated > 0 and 0 <= min_fraction <= max_fraction");
        std::uint64_t sd = 0;
        if (seed) sd = *seed;
        else if (s.contains("seed")) {
            if (!s["seed"].is_number_unsigned()) throw ValidationError(sp + ".seed", "expected a non-negative integer");
            sd = s["seed"].get<std::uint64_t>();
        }
        return synthetic_hourly_profile(rated, lo, hi, s["hours"].get<int>(), sd);
    }
    return schedule_from_json(j, path);
}

}  // namespace detail

/// Scenario document:
///   duration, dt, controller_period, coolant_inlet,
///   current_profile   number | [[t, A], ...] | {"synthetic": {...}}
///   ambient_profile   number | [[t, degC], ...]
///   setpoint_profile  number | [[t, degC], ...] | "equilibrium" |
///                     {"equilibrium_offset": [[t, K], ...]}
///   initial_state     {"t_stack", "t_sep", "t_cool"} | {"equilibrium": {"current", "t_stack"}}
///   initial_valve     opening (ignored for an equilibrium start)
///   controllers       [{"name", "kp", "ki", "kd", "feedback", "setpoint_profile"?}, ...]
///   stats_window      {"t_begin", "t_end", "current_min", "current_max"}
/// Set points relative to the equilibrium use the controlled temperature of
/// each controller's feedback.
inline Scenario scenario_from_json(const json& j, const SystemParams& p, std::optional<std::uint64_t> seed = {}) {
    using namespace detail;
    reject_unknown(j, "scenario",
                   {"description", "duration", "dt", "controller_period", "coolant_inlet", "current_profile",
                    "ambient_profile", "setpoint_profile", "initial_state", "initial_valve", "controllers",
                    "stats_window"});
    ScenarioConfig base;
    auto opt_number = [&](const char* key, double& dst) {
        if (j.contains(key)) dst = number(j[key], std::string("scenario.") + key);
    };
    opt_number("duration", base.duration);
    opt_number("dt", base.dt);
    opt_number("controller_period", base.controller_period);
    opt_number("coolant_inlet", base.coolant_inlet);
    opt_number("initial_valve", base.initial_valve);
    if (j.contains("description") && !j["description"].is_string())
        throw ValidationError("scenario.description", "expected a string");
    if (j.contains("current_profile"))
        base.current_profile = current_from_json(j["current_profile"], "scenario.current_profile", seed);
    if (j.contains("ambient_profile"))
        base.ambient_profile = schedule_from_json(j["ambient_profile"], "scenario.ambient_profile");

    Scenario sc;
    if (j.contains("initial_state")) {
        const json& is = j["initial_state"];
        if (is.is_object() && is.contains("equilibrium")) {
            reject_unknown(is, "scenario.initial_state", {"equilibrium"});
            const json& e = is["equilibrium"];
            reject_unknown(e, "scenario.initial_state.equilibrium", {"current", "t_stack"});
            const double cur = e.contains("current") ? number(e["current"], "scenario.initial_state.equilibrium.current") : 820.0;
            const double ts = e.contains("t_stack") ? number(e["t_stack"], "scenario.initial_state.equilibrium.t_stack") : 80.0;
            ExogenousInputs in{cur, base.ambient_profile.at(0.0), base.coolant_inlet, ts};
            sc.equilibrium = find_equilibrium(p, in, ts, Feedback::AfterStack);
            base.initial_state = sc.equilibrium->state;
            base.initial_valve = sc.equilibrium->valve;
        } else {
            reject_unknown(is, "scenario.initial_state", {"t_stack", "t_sep", "t_cool"});
            for (const char* k : {"t_stack", "t_sep", "t_cool"})
                if (!is.contains(k)) throw ValidationError(std::string("scenario.initial_state.") + k, "missing");
            base.initial_state = {number(is["t_stack"], "scenario.initial_state.t_stack"),
                                  number(is["t_sep"], "scenario.initial_state.t_sep"),
                                  number(is["t_cool"], "scenario.initial_state.t_cool")};
        }
    }

    auto setpoint = [&](const json& s, const std::string& path, Feedback fb) -> Schedule {
        const bool relative = (s.is_string() && s.get<std::string>() == "equilibrium") ||
                              (s.is_object() && s.contains("equilibrium_offset"));
        if (!relative) {
            if (s.is_string()) throw ValidationError(path, "expected a number, a schedule or \"equilibrium\"");
            return schedule_from_json(s, path);
        }
        if (!sc.equilibrium) throw ValidationError(path, "relative set point requires an equilibrium initial_state");
        const double ref = feedback_temperature(sc.equilibrium->state, fb);
        if (s.is_string()) return Schedule(ref);
        reject_unknown(s, path, {"equilibrium_offset"});
        return schedule_from_json(s["equilibrium_offset"], path + ".equilibrium_offset", ref);
    };

    if (!j.contains("controllers") || !j["controllers"].is_array() || j["controllers"].empty())
        throw ValidationError("scenario.controllers", "expected a non-empty list");
    const json& cs = j["controllers"];
    for (std::size_t i = 0; i < cs.size(); ++i) {
        const std::string path = "scenario.controllers[" + std::to_string(i) + "]";
        const json& c = cs[i];
        reject_unknown(c, path, {"name", "kp", "ki", "kd", "feedback", "setpoint_profile"});
        ScenarioRun run{"run" + std::to_string(i), base};
        if (c.contains("name")) {
            if (!c["name"].is_string() || c["name"].get<std::string>().empty())
                throw ValidationError(path + ".name", "expected a non-empty string");
            run.name = c["name"].get<std::string>();
            for (char ch : run.name)
                if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-'))
                    throw ValidationError(path + ".name", "only [A-Za-z0-9_-] allowed");
        }
        if (!c.contains("feedback") || !c["feedback"].is_string())
            throw ValidationError(path + ".feedback", "expected \"after\" or \"before\"");
        try {
            run.config.pid.feedback = feedback_from_string(c["feedback"].get<std::string>());
        } catch (const ValidationError& e) {
            throw ValidationError(path + ".feedback", e.what());
        }
        run.config.pid.kp = c.contains("kp") ? number(c["kp"], path + ".kp") : 0.0;
        run.config.pid.ki = c.contains("ki") ? number(c["ki"], path + ".ki") : 0.0;
        run.config.pid.kd = c.contains("kd") ? number(c["kd"], path + ".kd") : 0.0;
        if (c.contains("setpoint_profile"))
            run.config.setpoint_profile = setpoint(c["setpoint_profile"], path + ".setpoint_profile", run.config.pid.feedback);
        else if (j.contains("setpoint_profile"))
            run.config.setpoint_profile = setpoint(j["setpoint_profile"], "scenario.setpoint_profile", run.config.pid.feedback);
        for (const ScenarioRun& other : sc.runs)
            if (other.name == run.name) throw ValidationError(path + ".name", "duplicate controller name");
        run.config.validate();
        sc.runs.push_back(std::move(run));
    }

    if (j.contains("stats_window")) {
        const json& w = j["stats_window"];
        reject_unknown(w, "scenario.stats_window", {"t_begin", "t_end", "current_min", "current_max"});
        if (w.contains("t_begin")) sc.window.t_begin = number(w["t_begin"], "scenario.stats_window.t_begin");
        if (w.contains("t_end")) sc.window.t_end = number(w["t_end"], "scenario.stats_window.t_end");
        if (w.contains("current_min")) sc.window.current_min = number(w["current_min"], "scenario.stats_window.current_min");
        if (w.contains("current_max")) sc.window.current_max = number(w["current_max"], "scenario.stats_window.current_max");
    }
    return sc;
}

// ---------------------------------------------------------------------- CSV

inline void write_trace_csv(std::ostream& os, const SimulationTrace& trace, std::size_t decimation = 1) {
    if (decimation == 0) throw ValidationError("decimation", "must be >= 1");
    os << "t,current,t_stack,t_sep,t_cool,valve,t_aim,q_ele,q_dis_total,flags\n";
    for (std::size_t i = 0; i < trace.rows.size(); ++i) {
        if (i % decimation != 0 && i + 1 != trace.rows.size()) continue;
        const TraceRow& r = trace.rows[i];
        for (double v : {r.t, r.current, r.t_stack, r.t_sep, r.t_cool, r.valve, r.t_aim, r.q_ele, r.q_dis_total})
            os << format_double(v) << ',';
        os << r.flags << '\n';
    }
}

inline void write_stability_csv(std::ostream& os, const StabilityMap& map) {
    os << "kp,ki,kd,max_real_pole,stable\n";
    for (const StabilityPoint& p : map.points)
        os << format_double(p.kp) << ',' << format_double(p.ki) << ',' << format_double(p.kd) << ','
           << (p.failed ? std::string("nan") : format_double(p.max_real_pole)) << ',' << (p.stable ? 1 : 0) << '\n';
}

}  // namespace etherm
