#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "surfstokes/harness.hpp"

using namespace surfstokes;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / ("surfstokes_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string parse_error(const std::string& text)
{
    try {
        parse_config_text(text);
    } catch (const std::invalid_argument& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST(Config, DefaultsAndOverrides)
{
    const auto cfg = parse_config_text("surface = torus_of_revolution\nR = 2\nr = 1\nn_theta = 64");
    EXPECT_EQ(cfg.sim.surface, SurfaceKind::TorusOfRevolution);
    EXPECT_EQ(cfg.sim.n_theta, 64);
    EXPECT_EQ(cfg.sim.n_phi, 32);
    EXPECT_EQ(cfg.sim.integrator, Integrator::Imex2);
    EXPECT_EQ(cfg.scenario, "all");

    const auto c2 = parse_config_text(
        "# comment\n\n surface=flat_torus # trailing\nL1 = 3.5\nL2=7\nintegrator = imex1\ndealias = off\n"
        "seed = 42\nscenario = spectrum\nout_dir = results\nmu_s = 0.25\nrho = 4\ndt = 1e-3\nt_end = 2\n");
    EXPECT_EQ(c2.sim.surface, SurfaceKind::FlatTorus);
    EXPECT_DOUBLE_EQ(c2.sim.L1, 3.5);
    EXPECT_DOUBLE_EQ(c2.sim.L2, 7.0);
    EXPECT_EQ(c2.sim.integrator, Integrator::Imex1);
    EXPECT_FALSE(c2.sim.dealias);
    EXPECT_EQ(c2.sim.seed, 42u);
    EXPECT_EQ(c2.scenario, "spectrum");
    EXPECT_EQ(c2.out_dir, "results");
    EXPECT_DOUBLE_EQ(c2.sim.mu_s, 0.25);
    EXPECT_DOUBLE_EQ(c2.sim.dt, 1e-3);
}

TEST(Config, ErrorsNameTheLine)
{
    EXPECT_NE(parse_error("R = -1").find("R must be positive"), std::string::npos);
    EXPECT_EQ(parse_error("R = -1").rfind("line 1:", 0), 0u);
    EXPECT_EQ(parse_error("n_theta = 32\nno equals here").rfind("line 2:", 0), 0u);
    EXPECT_NE(parse_error("dt = 1e-2x").find("cannot parse"), std::string::npos);
    EXPECT_NE(parse_error("\n\nsurface = sphere").find("line 3"), std::string::npos);
    EXPECT_NE(parse_error("integrator = rk4").find("unknown integrator"), std::string::npos);
    EXPECT_NE(parse_error("colour = red").find("unknown key"), std::string::npos);
    EXPECT_NE(parse_error("scenario = everything").find("unknown scenario"), std::string::npos);
    EXPECT_NE(parse_error("n_phi = 15").find("n_phi"), std::string::npos);
    EXPECT_NE(parse_error("R = 1\nr = 2").find("R must exceed r"), std::string::npos);
    EXPECT_THROW(parse_config("/nonexistent/surfstokes.cfg"), std::invalid_argument);
}

TEST(Csv, FormatAndRoundTrip)
{
    const auto dir = scratch("csv");
    const double x = 0.1 + 0.2;
    emit_csv(dir / "a.csv", {"t", "energy", "dissipation"}, {{0, x, -1e-300}, {1, 2, 3}, {1.0 / 3, 4, 5}});
    const std::string text = slurp(dir / "a.csv");
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 4);
    EXPECT_EQ(text.find(",\n"), std::string::npos);
    EXPECT_EQ(text.find('\r'), std::string::npos);
    EXPECT_EQ(text.substr(0, text.find('\n')), "t,energy,dissipation");
    std::istringstream lines(text);
    std::string line;
    std::getline(lines, line);
    std::getline(lines, line);
    EXPECT_EQ(std::stod(line.substr(line.find(',') + 1)), x);

    emit_csv(dir / "b.csv", {"t", "energy"}, {});
    EXPECT_EQ(slurp(dir / "b.csv"), "t,energy\n");
    EXPECT_THROW(emit_csv(dir / "c.csv", {"t", "energy"}, {{1.0}}), std::invalid_argument);
    EXPECT_THROW(emit_csv(dir / "missing" / "d.csv", {"t"}, {}), std::runtime_error);
}

TEST(Scenario, SpectrumOnFlatTorus)
{
    RunConfig cfg = parse_config_text("surface = flat_torus\nn_theta = 16\nn_phi = 16\nmu_s = 0.5");
    cfg.out_dir = scratch("spectrum").string();
    const auto report = run_scenario("spectrum", cfg);
    EXPECT_TRUE(report.passed()) << format_report(report);
    std::ifstream csv(fs::path(cfg.out_dir) / "spectrum" / "eigenvalues.csv");
    std::string line;
    std::getline(csv, line);
    const std::vector<double> expected{0, 0, 0.5, 0.5, 0.5, 0.5};
    for (double e : expected) {
        std::getline(csv, line);
        const auto first = line.find(',');
        EXPECT_NEAR(std::stod(line.substr(first + 1)), e, 1e-8);
    }
    EXPECT_TRUE(fs::exists(fs::path(cfg.out_dir) / "spectrum" / "summary.csv"));
    EXPECT_TRUE(fs::exists(fs::path(cfg.out_dir) / "spectrum" / "report.txt"));
}

TEST(Scenario, EquilibriaOnTorus)
{
    RunConfig cfg = parse_config_text("n_theta = 16\nn_phi = 16");
    cfg.out_dir.clear();
    const auto report = run_scenario("equilibria", cfg);
    EXPECT_TRUE(report.passed()) << format_report(report);
}

TEST(Scenario, DeterministicCsv)
{
    RunConfig cfg = parse_config_text("n_theta = 16\nn_phi = 16\nseed = 9");
    const auto a = scratch("det_a"), b = scratch("det_b");
    cfg.out_dir = a.string();
    run_scenario("helmholtz", cfg);
    cfg.out_dir = b.string();
    run_scenario("helmholtz", cfg);
    const auto file = fs::path("helmholtz") / "projection.csv";
    EXPECT_EQ(slurp(a / file), slurp(b / file));
    EXPECT_FALSE(slurp(a / file).empty());
}

TEST(Scenario, FailureIsReported)
{
    RunConfig cfg;
    cfg.out_dir.clear();
    const auto report = run_scenario("no_such_scenario", cfg);
    EXPECT_FALSE(report.passed());
    EXPECT_NE(report.error.find("unknown scenario"), std::string::npos);

    const auto row = make_row("x", 2.0, "<=", 1.0);
    EXPECT_FALSE(row.passed);
    EXPECT_TRUE(make_row("y", 2.0, ">=", 1.0).passed);
    EXPECT_THROW(make_row("z", 1.0, "<", 1.0), std::invalid_argument);
}
