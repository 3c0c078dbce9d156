#include "sch/config.hpp"
#include "sch/errors.hpp"
#include "sch/runner.hpp"

#include <gtest/gtest.h>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

namespace {

using namespace sch;
namespace fs = std::filesystem;

int parse_error_line(const std::string& text)
{
    try {
        (void)parse_config(text);
    } catch (const ParseError& e) {
        return e.line();
    }
    return -1;
}

std::string validation_message(const std::string& text)
{
    try {
        (void)parse_config(text);
    } catch (const ValidationError& e) {
        return e.what();
    }
    return {};
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch_dir(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / ("sch_lab_test_" + name);
    fs::remove_all(dir);
    return dir;
}

RunOptions quiet()
{
    RunOptions o;
    o.quiet = true;
    return o;
}

// Small stochastic run shared by the output tests.
RunConfig quick_config()
{
    RunConfig c;
    c.domain.modes_x = 16;
    c.solver.dt = 1e-3;
    c.solver.horizon = 0.02;
    c.noise.kind = "additive";
    c.noise.modes = 4;
    c.run.seed = 99;
    return c;
}

TEST(ParseConfig, EmptyTextGivesDefaults)
{
    EXPECT_EQ(parse_config(""), RunConfig{});
    EXPECT_EQ(parse_config("[solver]\n\n[noise]\n# nothing set\n"), RunConfig{});
    const RunConfig d{};
    EXPECT_EQ(d.potential.name, "quartic");
    EXPECT_EQ(d.noise.kind, "none");
    EXPECT_EQ(d.run.mode, "simulate");
}

TEST(ParseConfig, ReadsValuesListsAndComments)
{
    const RunConfig c = parse_config(
        "; leading comment\n"
        "[run]\nmode = vanishing_viscosity\nseed = 42\n"
        "[solver]\nlambda = 0.02   # trailing comment\nsplitting = fully_implicit\n"
        "[sweep]\nepsilon = 0.1, 0.01, 0\n");
    EXPECT_EQ(c.run.mode, "vanishing_viscosity");
    EXPECT_EQ(c.run.seed, 42u);
    EXPECT_EQ(c.solver.lambda, 0.02);
    EXPECT_EQ(c.solver.splitting, "fully_implicit");
    EXPECT_EQ(c.sweep.epsilon, (std::vector<double>{0.1, 0.01, 0.0}));
}

TEST(ParseConfig, LogarithmicPotentialViolatesH1)
{
    EXPECT_NE(validation_message("[potential]\nname = log_double_well\n").find("(H1)"), std::string::npos);
    EXPECT_NE(validation_message("[potential]\nname = obstacle\n").find("(H1)"), std::string::npos);
}

TEST(ParseConfig, ValidationNamesHypothesisProxies)
{
    EXPECT_FALSE(validation_message("[solver]\nlambda = 0\n").empty());
    EXPECT_FALSE(validation_message("[solver]\nepsilon = -1\n").empty());
    EXPECT_FALSE(validation_message("[potential]\npi_coefficient = inf\n").empty());
    EXPECT_FALSE(validation_message("[noise]\nkind = multiplicative\nmean_zero = false\n").empty());
    EXPECT_FALSE(validation_message("[run]\nmode = plotting\n").empty());
}

TEST(ParseConfig, ErrorsCarryLineNumbers)
{
    EXPECT_EQ(parse_error_line("[solver]\nlambda = 0.1\nbogus = 1\n"), 3);
    EXPECT_EQ(parse_error_line("\n[nowhere]\n"), 2);
    EXPECT_EQ(parse_error_line("[solver]\nlambda 0.1\n"), 2);
    EXPECT_EQ(parse_error_line("[solver]\n\n\ndt = fast\n"), 4);
    EXPECT_EQ(parse_error_line("[solver]\ndt = 0.1\ndt = 0.2\n"), 3);
    EXPECT_EQ(parse_error_line("[solver\n"), 1);
}

TEST(ParseConfig, RoundTripsThroughCanonicalText)
{
    RunConfig c = quick_config();
    c.run.mode = "ensemble";
    c.solver.lambda = 0.1 + 0.2;  // not exactly representable in short decimal
    c.sweep.epsilon = {1.0 / 3.0, 0.0};
    c.sweep.smoothing = {2, 8};
    c.potential.name = "sextic";
    c.output.dir = "results";
    const std::string text = emit_config(c);
    EXPECT_EQ(parse_config(text), c);
    EXPECT_EQ(emit_config(parse_config(text)), text);
    EXPECT_EQ(parse_config(emit_config(RunConfig{})), RunConfig{});
}

TEST(ParseConfig, FormatDoubleIsShortestRoundTrip)
{
    EXPECT_EQ(format_double(0.1), "0.1");
    EXPECT_EQ(format_double(1e-3), "0.001");
    for (double x : {1.0 / 3.0, 0.1 + 0.2, 6.02e23, -2.5e-300}) {
        EXPECT_EQ(std::stod(format_double(x)), x);
    }
}

TEST(EnvOverrides, AppliedFromCustomLookup)
{
    const std::map<std::string, std::string> env{{"SCH_SOLVER_LAMBDA", "0.05"}, {"SCH_RUN_SEED", "17"},
                                                 {"SCH_NOISE_KIND", "additive"}};
    RunConfig c;
    apply_env_overrides(c, [&](const char* name) -> const char* {
        const auto it = env.find(name);
        return it == env.end() ? nullptr : it->second.c_str();
    });
    EXPECT_EQ(c.solver.lambda, 0.05);
    EXPECT_EQ(c.run.seed, 17u);
    EXPECT_EQ(c.noise.kind, "additive");
    EXPECT_EQ(c.solver.dt, RunConfig{}.solver.dt);

    RunConfig d;
    EXPECT_THROW(apply_env_overrides(d, [](const char* name) -> const char* {
                     return std::string(name) == "SCH_SOLVER_DT" ? "quick" : nullptr;
                 }),
                 ParseError);
}

TEST(ConfigHash, StableAndSensitive)
{
    const RunConfig a = quick_config();
    RunConfig b = a;
    EXPECT_EQ(config_hash(a), config_hash(b));
    EXPECT_EQ(config_hash(a).size(), 16u);
    b.run.seed += 1;
    EXPECT_NE(config_hash(a), config_hash(b));
    b = a;
    b.solver.lambda *= 1.0 + 1e-15;
    EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(Execute, DefaultRunPassesWithMonotoneEnergy)
{
    const RunOutcome out = execute(RunConfig{}, quiet());
    EXPECT_EQ(out.exit_code, exit_pass) << out.error;
    ASSERT_FALSE(out.checks.empty());
    for (const Check& c : out.checks) {
        EXPECT_TRUE(c.passed) << c.name << ": " << c.detail;
    }

    std::istringstream csv(out.csv);
    std::string line;
    std::getline(csv, line);
    EXPECT_EQ(line.rfind("# sch_lab 0.1.0 config_hash=", 0), 0u);
    std::getline(csv, line);
    std::vector<std::string> header;
    {
        std::istringstream row(line);
        std::string cell;
        while (std::getline(row, cell, ',')) {
            header.push_back(cell);
        }
    }
    const auto energy_col = std::find(header.begin(), header.end(), "energy") - header.begin();
    ASSERT_LT(static_cast<std::size_t>(energy_col), header.size());
    double previous = INFINITY;
    int rows = 0;
    while (std::getline(csv, line)) {
        std::istringstream row(line);
        std::string cell;
        for (long i = 0; i <= energy_col; ++i) {
            std::getline(row, cell, ',');
        }
        const double e = std::stod(cell);
        EXPECT_LE(e, previous + 1e-12);
        previous = e;
        ++rows;
    }
    EXPECT_EQ(rows, 1001);  // T / dt steps plus the initial state
}

TEST(Execute, VanishingViscosityPresetHasMonotoneDistances)
{
    RunConfig c = quick_config();
    c.run.mode = "vanishing_viscosity";
    c.solver.horizon = 0.05;
    const RunOutcome out = execute(c, quiet());
    EXPECT_EQ(out.exit_code, exit_pass) << out.error;
    const auto summary = nlohmann::json::parse(out.summary_json);
    EXPECT_TRUE(summary.at("passed").get<bool>());
    EXPECT_NE(out.csv.find("distance_l2_v1"), std::string::npos);
}

TEST(Execute, EveryModeRuns)
{
    for (const char* mode :
         {"simulate", "continuous_dependence", "vanishing_viscosity", "yosida_sweep", "ensemble", "regularity"}) {
        RunConfig c = quick_config();
        c.run.mode = mode;
        c.sweep.members = 8;
        c.run.threads = 2;
        const RunOutcome out = execute(c, quiet());
        EXPECT_NE(out.exit_code, exit_usage_error) << mode;
        EXPECT_NE(out.exit_code, exit_divergence) << mode << ": " << out.error;
        EXPECT_FALSE(out.csv.empty()) << mode;
        const auto summary = nlohmann::json::parse(out.summary_json);
        EXPECT_EQ(summary.at("version"), artifact_version);
        EXPECT_EQ(summary.at("config_hash"), config_hash(c));
    }
}

TEST(Execute, DivergenceMapsToExitThree)
{
    RunConfig c;
    c.potential.scale = 100.0;
    c.solver.dt = 2.0;
    c.solver.horizon = 8.0;
    c.solver.newton_max_iter = 2;
    c.solver.max_rejections = 0;
    c.initial.amplitude = 2.0;
    const RunOutcome out = execute(c, quiet());
    EXPECT_EQ(out.exit_code, exit_divergence);
    EXPECT_FALSE(out.error.empty());
}

TEST(Run, WritesVersionedArtifactsByteIdentically)
{
    RunConfig c = quick_config();
    const fs::path d1 = scratch_dir("a"), d2 = scratch_dir("b");
    EXPECT_EQ(run(c, {.out_dir = d1.string(), .quiet = true}), exit_pass);
    EXPECT_EQ(run(c, {.out_dir = d2.string(), .quiet = true}), exit_pass);
    const std::string header = "# sch_lab 0.1.0 config_hash=" + config_hash(c);
    for (const char* name : {"simulate.csv", "summary.json", "config.ini"}) {
        ASSERT_TRUE(fs::exists(d1 / name)) << name;
        const std::string a = slurp(d1 / name), b = slurp(d2 / name);
        EXPECT_EQ(a, b) << name;
        if (std::string(name) != "summary.json") {
            EXPECT_EQ(a.rfind(header, 0), 0u) << name;
        }
    }
    const auto summary = nlohmann::json::parse(slurp(d1 / "summary.json"));
    EXPECT_EQ(summary.at("config_hash"), config_hash(c));

    // The echoed configuration parses back to the run.
    EXPECT_EQ(parse_config(slurp(d1 / "config.ini")), c);
    fs::remove_all(d1);
    fs::remove_all(d2);
}

}  // namespace
