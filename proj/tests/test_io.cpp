#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "etherm/io.hpp"

using namespace etherm;
namespace fs = std::filesystem;

namespace {

const std::string kCli = ETHERM_CLI;
const std::string kSource = ETHERM_SOURCE_DIR;

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("etherm_io_" + name);
    fs::remove_all(p);
    return p;
}

int run_cli(const std::string& args) {
    const int rc = std::system((kCli + " " + args + " > /dev/null 2>&1").c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

json load(const fs::path& p) {
    std::ifstream in(p);
    return json::parse(in);
}

}  // namespace

TEST(Params, RoundTripAndDefaultsFile) {
    const SystemParams p = params_from_json(params_to_json(SystemParams{}));
    EXPECT_EQ(params_to_json(p), params_to_json(SystemParams{}));
    const SystemParams file = params_from_json(read_json_file(kSource + "/configs/params_default.json", "params"));
    EXPECT_EQ(params_to_json(file), params_to_json(SystemParams{}));
}

TEST(Params, UnknownAndBadKeysRejected) {
    try {
        params_from_json(json{{"c_stak", 1.0}});
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_EQ(e.field(), "params.c_stak");
    }
    EXPECT_THROW(params_from_json(json{{"c_stack", "big"}}), ValidationError);
    EXPECT_THROW(params_from_json(json{{"n_cells", 2.5}}), ValidationError);
    EXPECT_THROW(params_from_json(json{{"tau1", -1.0}}), ValidationError);
    EXPECT_EQ(params_from_json(json{{"tau1", 0.0}}).tau1, 0.0);
}

TEST(Scenario, BundledFilesParse) {
    const SystemParams p;
    for (const char* name : {"equilibrium", "load_step", "wind", "setpoint_step"}) {
        const json j = read_json_file(kSource + "/configs/scenarios/" + name + ".json", "scenario");
        const Scenario sc = scenario_from_json(j, p);
        EXPECT_FALSE(sc.runs.empty()) << name;
        EXPECT_TRUE(sc.equilibrium.has_value()) << name;
    }
}

TEST(Scenario, RelativeSetpointsUseEachFeedback) {
    const SystemParams p;
    const json j = read_json_file(kSource + "/configs/scenarios/setpoint_step.json", "scenario");
    const Scenario sc = scenario_from_json(j, p);
    ASSERT_EQ(sc.runs.size(), 2u);
    const Equilibrium& eq = *sc.equilibrium;
    EXPECT_DOUBLE_EQ(sc.runs[0].config.setpoint_profile.at(0.0), eq.state.t_stack);
    EXPECT_DOUBLE_EQ(sc.runs[0].config.setpoint_profile.at(600.0), eq.state.t_stack + 0.5);
    EXPECT_DOUBLE_EQ(sc.runs[1].config.setpoint_profile.at(700.0), eq.state.t_sep + 0.5);
}

TEST(Scenario, SeedOverrideChangesSyntheticProfile) {
    const SystemParams p;
    const json j = read_json_file(kSource + "/configs/scenarios/wind.json", "scenario");
    const auto a = scenario_from_json(j, p).runs[0].config.current_profile.points();
    const auto b = scenario_from_json(j, p, 99).runs[0].config.current_profile.points();
    const auto c = scenario_from_json(j, p, 1).runs[0].config.current_profile.points();
    EXPECT_NE(a, b);
    EXPECT_EQ(a, c);
}

TEST(Scenario, ErrorsCarryFieldPath) {
    const SystemParams p;
    json j = {{"controllers", json::array({{{"feedback", "sideways"}}})}};
    try {
        scenario_from_json(j, p);
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_EQ(e.field(), "scenario.controllers[0].feedback");
    }
    j = {{"dt", 0.0}, {"controllers", json::array({{{"feedback", "after"}}})}};
    EXPECT_THROW(scenario_from_json(j, p), ValidationError);
    j = {{"bogus", 1}, {"controllers", json::array({{{"feedback", "after"}}})}};
    EXPECT_THROW(scenario_from_json(j, p), ValidationError);
}

TEST(Csv, TraceHeaderAndDigits) {
    SimulationTrace tr;
    tr.rows.push_back({0.0, 820.0, 0.1, 72.184980161221694, 79.5, 0.25, 80.0, 1.0 / 3.0, 1e-20, 3});
    std::ostringstream os;
    write_trace_csv(os, tr);
    std::istringstream is(os.str());
    std::string header, row;
    std::getline(is, header);
    std::getline(is, row);
    EXPECT_EQ(header, "t,current,t_stack,t_sep,t_cool,valve,t_aim,q_ele,q_dis_total,flags");
    EXPECT_EQ(row, "0,820,0.10000000000000001,72.184980161221688,79.5,0.25,80,0.33333333333333331,9.9999999999999995e-21,3");
}

TEST(Cli, MalformedJsonExitsTwoWithoutOutputs) {
    const fs::path out = scratch("malformed");
    const fs::path bad = fs::temp_directory_path() / "etherm_io_bad.json";
    std::ofstream(bad) << "{ \"duration\": ";
    EXPECT_EQ(run_cli("--out " + out.string() + " simulate " + bad.string()), 2);
    EXPECT_FALSE(fs::exists(out));
}

TEST(Cli, EmptyGridExitsTwo) {
    const fs::path out = scratch("emptygrid");
    EXPECT_EQ(run_cli("--out " + out.string() + " stability --kp-count 0"), 2);
    EXPECT_FALSE(fs::exists(out));
}

TEST(Cli, RuntimeFailureExitsThree) {
    const fs::path out = scratch("infeasible");
    const fs::path params = fs::temp_directory_path() / "etherm_io_params.json";
    std::ofstream(params) << R"({"k_valve": 1e-7})";
    EXPECT_EQ(run_cli("--params " + params.string() + " --out " + out.string() + " equilibrium"), 3);
    EXPECT_FALSE(fs::exists(out));
}

TEST(Cli, EquilibriumScenarioStaysPut) {
    const fs::path out = scratch("eqscen");
    ASSERT_EQ(run_cli("--out " + out.string() + " simulate " + kSource + "/configs/scenarios/equilibrium.json"), 0);
    const json stats = load(out / "stats.json");
    EXPECT_LT(stats["runs"]["after"]["delta_t_max"].get<double>(), 0.01);
    EXPECT_TRUE(fs::exists(out / "trace_after.csv"));
    EXPECT_TRUE(fs::exists(out / "manifest.json"));
    EXPECT_FALSE(fs::exists(out / ".etherm-staging"));
}

TEST(Cli, LinearizeFeedbackChangesOnlyTheTransferFunction) {
    const fs::path a = scratch("lin_after"), b = scratch("lin_before");
    ASSERT_EQ(run_cli("--out " + a.string() + " linearize --feedback after"), 0);
    ASSERT_EQ(run_cli("--out " + b.string() + " linearize --feedback before"), 0);
    EXPECT_EQ(load(a / "linear_model.json"), load(b / "linear_model.json"));
    const json ta = load(a / "plant_tf.json")["after"], tb = load(b / "plant_tf.json")["before"];
    EXPECT_NE(ta["num"], tb["num"]);
    EXPECT_LT(ta["dc_gain"].get<double>(), 0.0);
    EXPECT_LT(tb["dc_gain"].get<double>(), 0.0);
    const json m = load(a / "linear_model.json");
    int nonzero = 0;
    for (const auto& row : m["a1"])
        for (const auto& v : row) nonzero += v.get<double>() != 0.0;
    EXPECT_EQ(nonzero, 1);
}

TEST(Cli, TuneRecordsReferencesInManifest) {
    const fs::path out = scratch("tune");
    ASSERT_EQ(run_cli("--out " + out.string() + " tune --gamma0 0.5 --ts0 7200 --kp-count 4 --ki-count 3 --kd-count 2"), 0);
    const json m = load(out / "manifest.json");
    EXPECT_EQ(m["request"]["options"]["gamma0"].get<double>(), 0.5);
    EXPECT_EQ(m["request"]["options"]["ts0"].get<double>(), 7200.0);
    EXPECT_EQ(m["outputs"], json::array({"tuning_after.json"}));
}

TEST(Cli, DelayFreeOverrideEnlargesRegion) {
    const fs::path a = scratch("stab_rated"), b = scratch("stab_nodelay");
    ASSERT_EQ(run_cli("--out " + a.string() + " stability --feedback after"), 0);
    ASSERT_EQ(run_cli("--out " + b.string() + " stability --feedback after --tau1 0 --tau2 0"), 0);
    const int rated = load(a / "stability_summary.json")["after"]["stable"].get<int>();
    const int free = load(b / "stability_summary.json")["after"]["stable"].get<int>();
    EXPECT_GT(free, rated);
}

TEST(Cli, BeforeStackTuningDropsDerivative) {
    const fs::path out = scratch("tune_before");
    ASSERT_EQ(run_cli("--out " + out.string() + " tune --feedback before"), 0);
    const json j = load(out / "tuning_before.json");
    const double best = j["objective"].get<double>();
    const double no_d = j["best_without_derivative"]["objective"].get<double>();
    EXPECT_TRUE(j["best"]["kd"].get<double>() == 0.0 || no_d <= 1.01 * best);
}
