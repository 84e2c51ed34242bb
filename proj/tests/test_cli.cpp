#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>

#include <lcpt/lcpt.hpp>

#include "lcpt/commands.hpp"
#include "lcpt/config.hpp"

using namespace lcpt;
using namespace lcpt::cli;
namespace fs = std::filesystem;

namespace {

RunConfig from_text(const std::string& text, const std::string& command)
{
    const auto j = parse_json_text(text, "test.json");
    return parse_run_config(j, command, "test.json", KeyLines(text));
}

std::string csv(const Dataset& ds)
{
    std::ostringstream out;
    ds.table.write(out);
    return out.str();
}

std::size_t column(const Dataset& ds, const std::string& name)
{
    const auto& c = ds.table.columns;
    const auto it = std::find(c.begin(), c.end(), name);
    if (it == c.end()) {
        throw std::out_of_range("no column " + name);
    }
    return static_cast<std::size_t>(it - c.begin());
}

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / "lcpt_cli_tests";
    fs::create_directories(dir);
    return dir / name;
}

int run_tool(const std::string& args)
{
    const std::string cmd = std::string(LCPT_TOOL) + " " + args + " > " +
                            scratch("stdout.txt").string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

} // namespace

TEST(Config, EmptyPhaseListIsRejected)
{
    try {
        from_text("{\n  \"phi\": []\n}", "chd");
        FAIL() << "expected config_error";
    } catch (const config_error& e) {
        EXPECT_EQ(e.field(), "phi");
        EXPECT_EQ(e.line(), 2u);
    }
}

TEST(Config, AtMostTwoSweptAxes)
{
    const std::string text = R"({
  "omega_a": [1, 2],
  "delta_a": {"from": 0, "to": 1, "points": 3},
  // a third axis
  "gamma_b": [0.2, 0.3]
})";
    try {
        from_text(text, "steady-scan");
        FAIL() << "expected config_error";
    } catch (const config_error& e) {
        EXPECT_EQ(e.field(), "gamma_b");
        EXPECT_EQ(e.line(), 5u);
    }
    EXPECT_NO_THROW(from_text(R"({"omega_a": [1, 2], "delta_a": [0, 1]})",
                              "steady-scan"));
}

TEST(Config, DiagnosticsCarryLines)
{
    try {
        from_text("{\n\"phi\": 0,\n\"omega\": {\"from\": 1, \"to\": -1, \"points\": 3}\n}",
                  "spectrum");
        FAIL();
    } catch (const config_error& e) {
        EXPECT_EQ(e.field(), "omega");
        EXPECT_EQ(e.line(), 3u);
    }
    try {
        from_text("{\n\"phi\": 0,\n\n\"omega_a\": 1,,\n}", "chd");
        FAIL();
    } catch (const config_error& e) {
        EXPECT_EQ(e.line(), 4u);
    }
    EXPECT_THROW(from_text(R"({"phi_list": [0]})", "chd"), config_error);
    EXPECT_THROW(from_text(R"({"eta": 1.5})", "squeezing"), config_error);
    EXPECT_THROW(from_text(R"({"omega_a": -1})", "chd"), config_error);
    EXPECT_THROW(from_text(R"({"omega_a": []})", "chd"), config_error);
    EXPECT_THROW(from_text(R"({"kinds": ["mollow"]})", "spectrum"), config_error);
    EXPECT_THROW(from_text(R"({"command": "chd"})", "spectrum"), config_error);
}

TEST(Config, KeyLinesInNestedRuns)
{
    const std::string text = R"({
  "runs": [
    {"phi": 0},
    {
      /* second run */
      "phi": []
    }
  ]
})";
    const KeyLines lines(text);
    EXPECT_EQ(lines.find("/runs/0/phi"), 3u);
    EXPECT_EQ(lines.find("/runs/1/phi"), 6u);
    EXPECT_EQ(lines.find("/runs/1/phi/0"), 6u);
}

TEST(Config, PhaseStrings)
{
    using std::numbers::pi;
    EXPECT_DOUBLE_EQ(*parse_phase("pi/2"), pi / 2);
    EXPECT_DOUBLE_EQ(*parse_phase("3pi/4"), 3 * pi / 4);
    EXPECT_DOUBLE_EQ(*parse_phase("-pi"), -pi);
    EXPECT_DOUBLE_EQ(*parse_phase("0.25"), 0.25);
    EXPECT_DOUBLE_EQ(*parse_phase("2*pi"), 2 * pi);
    EXPECT_FALSE(parse_phase("pi/0"));
    EXPECT_FALSE(parse_phase("half"));
}

TEST(Config, SweepExpansionOrder)
{
    const auto rc = from_text(R"({"omega_a": [1, 2], "delta_a": [0, 5, 6]})",
                              "steady-scan");
    const auto pts = rc.points();
    ASSERT_EQ(pts.size(), 6u);
    EXPECT_EQ(pts[0].omega_a, 1.0);
    EXPECT_EQ(pts[2].delta_a, 6.0);
    EXPECT_EQ(pts[3].omega_a, 2.0);
    EXPECT_EQ(pts[3].omega_b, working_point().omega_b);
}

TEST(Config, MhzUnitsMatchScaledRun)
{
    const auto scaled = from_text(R"({"omega_a": [0.5, 1.5]})", "steady-scan");
    const auto mhz = from_text(
        R"({"units": "mhz", "gamma_a": 14.7, "omega_a": [7.35, 22.05],
            "omega_b": 31.605, "delta_a": 49.98, "delta_b": 34.986,
            "gamma_b": 5.4})",
        "steady-scan");
    const auto a = run_steady_scan(scaled, 1);
    const auto b = run_steady_scan(mhz, 1);
    ASSERT_EQ(a.table.rows.size(), b.table.rows.size());
    for (std::size_t i = 0; i < a.table.rows.size(); ++i) {
        EXPECT_NEAR(b.table.rows[i][0], 14.7 * a.table.rows[i][0], 1e-12);
        EXPECT_NEAR(b.table.rows[i][1], a.table.rows[i][1], 1e-12);
    }
}

TEST(Commands, SinglePointSteadyScan)
{
    const auto ds = run_steady_scan(default_run_config("steady-scan"), 1);
    ASSERT_EQ(ds.table.rows.size(), 1u);
    const auto ss = solve_steady_state(working_point());
    EXPECT_EQ(ds.table.rows[0][column(ds, "alpha_ee")], ss.excited_population());
    EXPECT_EQ(ds.table.rows[0][column(ds, "alpha_bb")],
              ss(OperatorIndex::bb).real());
}

TEST(Commands, OutputIsDeterministicAcrossThreadCounts)
{
    const auto rc = from_text(R"({"phi": [0, "pi/2"],
        "kinds": ["incoherent", "chd-positive", "squeezing"],
        "omega_a": {"from": 0.5, "to": 2, "points": 7},
        "omega": {"from": -4, "to": 4, "points": 41}})",
                              "spectrum");
    const std::string one = csv(run_spectrum(rc, 1));
    EXPECT_EQ(one, csv(run_spectrum(rc, 3)));
    EXPECT_EQ(one, csv(run_spectrum(rc, 8)));
    EXPECT_NE(one.find("chd-positive[phi=pi/2]"), std::string::npos);
}

TEST(Commands, SeventeenSignificantDigits)
{
    EXPECT_EQ(format_number(0.1), "0.10000000000000001");
    EXPECT_EQ(format_number(-0.0), "0");
    EXPECT_EQ(format_number(std::nan("")), "nan");
}

TEST(Commands, TrappingPointInSweepBecomesNan)
{
    const auto rc = from_text(R"({"delta_a": [2.38, 3.4],
        "omega": {"from": -1, "to": 1, "points": 3}})",
                              "spectrum");
    const auto ds = run_spectrum(rc, 2);
    ASSERT_EQ(ds.table.rows.size(), 6u);
    EXPECT_TRUE(std::isnan(ds.table.rows[0][column(ds, "incoherent")]));
    EXPECT_FALSE(std::isnan(ds.table.rows[3][column(ds, "incoherent")]));
    ASSERT_EQ(ds.warnings.size(), 1u);
    EXPECT_NE(ds.warnings[0].find("delta_a=2.38"), std::string::npos);
}

TEST(Commands, TrappingPointAloneIsDegenerate)
{
    const auto rc = from_text(R"({"delta_a": 2.38})", "spectrum");
    EXPECT_THROW(run_spectrum(rc, 1), degeneracy_error);
}

TEST(Commands, ChdGuardWritesNumerators)
{
    const auto rc = from_text(R"({"delta_a": 2.38, "tau": 1})", "chd");
    const auto ds = run_chd(rc, 1);
    EXPECT_NO_THROW(column(ds, "numerator[phi=0]"));
    ASSERT_EQ(ds.warnings.size(), 1u);
    EXPECT_NE(ds.warnings[0].find("trapping"), std::string::npos);
}

TEST(Commands, ChdColumnsAndGrid)
{
    const auto rc = from_text(
        R"({"phi": [0, "pi/2"], "split": true, "tau": {"step": 0.1, "max": 2}})",
        "chd");
    const auto ds = run_chd(rc, 1);
    EXPECT_EQ(ds.table.rows.size(), 41u);
    const auto& zero = ds.table.rows[20];
    EXPECT_EQ(zero[column(ds, "tau")], 0.0);
    EXPECT_NEAR(zero[column(ds, "h[phi=pi/2]")], 0.0, 1e-12);
    EXPECT_TRUE(std::isnan(ds.table.rows[0][column(ds, "h2[phi=0]")]));
    const auto& last = ds.table.rows.back();
    EXPECT_NEAR(last[column(ds, "h[phi=0]")],
                1.0 + last[column(ds, "h2[phi=0]")] + last[column(ds, "h3[phi=0]")],
                1e-10);
}

TEST(Presets, AllParse)
{
    const auto files = list_presets(LCPT_PRESET_DIR);
    ASSERT_EQ(files.size(), 9u);
    EXPECT_EQ(files.front().stem(), "fig2");
    EXPECT_EQ(files.back().stem(), "fig10");
    for (const auto& f : files) {
        const auto p = load_preset(f);
        EXPECT_FALSE(p.runs.empty()) << f;
        for (const auto& rc : p.runs) {
            EXPECT_LE(rc.swept_axes().size(), 2u);
        }
    }
}

TEST(Presets, Fig2LowerDipAtTwoPhotonResonance)
{
    const auto p = load_preset(fs::path(LCPT_PRESET_DIR) / "fig2.json");
    const auto& lower = p.runs.at(1);
    ASSERT_EQ(lower.name, "fig2-lower");
    const auto ds = run_command(lower, 2);
    ASSERT_EQ(ds.table.rows.size(), 1001u);
    const auto ee = column(ds, "alpha_ee");
    const auto best = std::min_element(
        ds.table.rows.begin(), ds.table.rows.end(),
        [&](const auto& a, const auto& b) { return a[ee] < b[ee]; });
    EXPECT_NEAR((*best)[column(ds, "delta_a")], 2.38, 0.01);
}

// The dark valley widens with the probe: distance from the dip to the point
// where alpha_ee regains half of the adjacent maximum on the blue side.
TEST(Presets, Fig2UpperValleyWidens)
{
    const auto p = load_preset(fs::path(LCPT_PRESET_DIR) / "fig2.json");
    const auto ds = run_command(p.runs.at(0), 2);
    const auto om = column(ds, "omega_a");
    const auto da = column(ds, "delta_a");
    const auto ee = column(ds, "alpha_ee");
    std::vector<double> widths;
    for (double row_omega : {0.5, 2.0, 3.0}) {
        std::vector<std::pair<double, double>> row;
        for (const auto& r : ds.table.rows) {
            if (std::abs(r[om] - row_omega) < 1e-9) {
                row.emplace_back(r[da], r[ee]);
            }
        }
        ASSERT_EQ(row.size(), 201u);
        const auto dip = std::min_element(row.begin(), row.end(),
                                          [](auto a, auto b) { return a.second < b.second; });
        EXPECT_NEAR(dip->first, 2.38, 0.05);
        auto peak = dip;
        while (peak + 1 != row.end() && (peak + 1)->second > peak->second) {
            ++peak;
        }
        auto rise = dip;
        while (rise->second < 0.5 * peak->second) {
            ++rise;
        }
        widths.push_back(rise->first - dip->first);
    }
    EXPECT_LT(widths[0], widths[1]);
    EXPECT_LT(widths[1], widths[2]);
}

TEST(Tool, ExitCodes)
{
    const fs::path bad = scratch("bad.json");
    std::ofstream(bad) << "{\"phi\": []}";
    EXPECT_EQ(run_tool("chd --config " + bad.string()), 2);

    const fs::path cpt = scratch("cpt.json");
    std::ofstream(cpt) << "{\"delta_a\": 2.38}";
    EXPECT_EQ(run_tool("spectrum --out " + scratch("out").string() +
                       " --config " + cpt.string()),
              3);

    EXPECT_EQ(run_tool("steady-scan --out " + scratch("out").string()), 0);
    EXPECT_TRUE(fs::exists(scratch("out") / "steady-scan.csv"));
    EXPECT_EQ(run_tool("reproduce fig99"), 2);
    EXPECT_EQ(run_tool("steady-scan --units furlongs"), 2);
}
