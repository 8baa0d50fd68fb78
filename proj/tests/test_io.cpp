// Serialization and reporting: scenario/suite/path files, CSV and manifest
// writers, the canonical SSM sweep grid, and summary statistics.  CSV bytes
// are golden-tested because rerun comparisons rely on byte-identical output.

#include <doctest.h>

#include <marsha/executor.hpp>
#include <marsha/io.hpp>
#include <marsha/rng.hpp>
#include <marsha/suite.hpp>

#include <json.hpp>

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace marsha;

namespace
{

Eigen::VectorXd vec(std::initializer_list<double> v)
{
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v)
    out[i++] = x;
  return out;
}

std::string slurp(const fs::path& file)
{
  std::ifstream in(file, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Fresh scratch directory per test case; removed on destruction.
struct TempDir
{
  fs::path path;

  explicit TempDir(const std::string& tag)
  {
    path = fs::temp_directory_path() / ("marsha-io-" + tag);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

const fs::path kDataDir = MARSHA_DATA_DIR;

}  // namespace

TEST_SUITE("io")
{
  TEST_CASE("formatDouble emits shortest round-trip decimals")
  {
    CHECK(formatDouble(0.0) == "0");
    CHECK(formatDouble(1.0) == "1");
    CHECK(formatDouble(0.3) == "0.3");
    CHECK(formatDouble(0.15) == "0.15");
    CHECK(formatDouble(2.5) == "2.5");
    CHECK(formatDouble(-0.5) == "-0.5");
    CHECK(formatDouble(87.5) == "87.5");

    CHECK(formatDouble(std::numeric_limits<double>::quiet_NaN()) == "nan");
    CHECK(formatDouble(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(formatDouble(-std::numeric_limits<double>::infinity()) == "-inf");

    // Shortest-form output must parse back to the exact same bits.
    RngStream rng(20240814);
    for (int i = 0; i < 1000; ++i)
    {
      const double mantissa = rng.uniform(-1.0, 1.0);
      const int exponent = static_cast<int>(rng.uniformInt(601)) - 300;
      const double v = std::ldexp(mantissa, exponent);
      const std::string s = formatDouble(v);
      const double back = std::strtod(s.c_str(), nullptr);
      CHECK(std::memcmp(&back, &v, sizeof v) == 0);
    }
  }

  TEST_CASE("ssmSweepSets enumerates the canonical 16-set grid")
  {
    const std::array<SSMParams, 16> sets = ssmSweepSets();

    // C cycles slowest, then T_r, then v_h, a_s fastest.
    for (int i = 0; i < 16; ++i)
    {
      CHECK(sets[i].C == ((i >> 3) & 1 ? 0.30 : 0.10));
      CHECK(sets[i].T_r == ((i >> 2) & 1 ? 0.30 : 0.15));
      CHECK(sets[i].v_h == ((i >> 1) & 1 ? 1.6 : 0.0));
      CHECK(sets[i].a_s == ((i >> 0) & 1 ? 2.50 : 0.10));
    }

    // Anchors (1-based set numbering as reported in CSVs): set 2 is the most
    // permissive corner, set 15 the most conservative.
    CHECK(sets[1].C == 0.10);
    CHECK(sets[1].T_r == 0.15);
    CHECK(sets[1].v_h == 0.0);
    CHECK(sets[1].a_s == 2.50);
    CHECK(sets[14].C == 0.30);
    CHECK(sets[14].T_r == 0.30);
    CHECK(sets[14].v_h == 1.6);
    CHECK(sets[14].a_s == 0.10);
  }

  TEST_CASE("builtinModel resolves bundled robots by name")
  {
    const std::vector<std::string> names = builtinModelNames();
    REQUIRE(names.size() == 2);
    CHECK(names[0] == "planar2");
    CHECK(names[1] == "arm6");

    CHECK(builtinModel("planar2").dof() == 2);
    CHECK(builtinModel("arm6").dof() == 6);
    CHECK_THROWS_AS(builtinModel("hexapod"), std::invalid_argument);
    CHECK_THROWS_AS(builtinModel(""), std::invalid_argument);
  }

  TEST_CASE("scenario files round-trip through save and load")
  {
    TempDir dir("scenario");

    Scenario sc;
    sc.name = "round-trip";
    sc.model_name = "arm6";
    sc.model = builtinModel("arm6");
    sc.q_start = vec({ 0.1, -0.2, 0.3, -0.4, 0.5, -0.6 });
    sc.q_goal = vec({ -0.15, 0.25, -0.35, 0.45, -0.55, 0.65 });
    sc.timeout_s = 37.5;
    sc.safety = SSMParams{ 0.3, 0.2, 0.75, 1.25 };
    sc.scene.human_clearance = 0.17;
    sc.scene.static_obstacles = {
      Sphere{ Eigen::Vector3d(0.1, -0.2, 0.3), 0.25 },
      Box{ Eigen::Vector3d(-1.0, -2.0, -3.0), Eigen::Vector3d(1.0, 2.0, 3.0) },
      Capsule{ Eigen::Vector3d(0.5, 0.5, 0.0), Eigen::Vector3d(0.5, 0.5, 1.5), 0.12 },
    };
    sc.script = HumanScript(
        { HumanScript::Track{ "head",
                              { 0.0, 1.5, 4.0 },
                              { Eigen::Vector3d(2.0, 0.0, 1.7), Eigen::Vector3d(1.0, 0.5, 1.7),
                                Eigen::Vector3d(1.0, 0.5, 1.6) } },
          HumanScript::Track{ "hand",
                              { 0.0, 2.0 },
                              { Eigen::Vector3d(2.0, 0.2, 1.0), Eigen::Vector3d(0.8, 0.3, 1.1) } } },
        0.004, 99);

    const fs::path file = dir.path / "round-trip.json";
    saveScenario(file, sc);
    const Scenario back = loadScenario(file);

    CHECK(back.name == sc.name);
    CHECK(back.model_name == "arm6");
    CHECK(back.model.dof() == 6);
    CHECK(back.q_start == sc.q_start);
    CHECK(back.q_goal == sc.q_goal);
    CHECK(back.timeout_s == sc.timeout_s);

    REQUIRE(std::holds_alternative<SSMParams>(back.safety));
    const auto& ssm = std::get<SSMParams>(back.safety);
    CHECK(ssm.C == 0.3);
    CHECK(ssm.T_r == 0.2);
    CHECK(ssm.v_h == 0.75);
    CHECK(ssm.a_s == 1.25);

    CHECK(back.scene.human_clearance == 0.17);
    REQUIRE(back.scene.static_obstacles.size() == 3);
    const auto* sphere = std::get_if<Sphere>(&back.scene.static_obstacles[0]);
    REQUIRE(sphere != nullptr);
    CHECK(sphere->center == Eigen::Vector3d(0.1, -0.2, 0.3));
    CHECK(sphere->radius == 0.25);
    const auto* box = std::get_if<Box>(&back.scene.static_obstacles[1]);
    REQUIRE(box != nullptr);
    CHECK(box->min == Eigen::Vector3d(-1.0, -2.0, -3.0));
    CHECK(box->max == Eigen::Vector3d(1.0, 2.0, 3.0));
    const auto* capsule = std::get_if<Capsule>(&back.scene.static_obstacles[2]);
    REQUIRE(capsule != nullptr);
    CHECK(capsule->a == Eigen::Vector3d(0.5, 0.5, 0.0));
    CHECK(capsule->b == Eigen::Vector3d(0.5, 0.5, 1.5));
    CHECK(capsule->radius == 0.12);

    REQUIRE(back.script.tracks().size() == 2);
    CHECK(back.script.tracks()[0].name == "head");
    CHECK(back.script.tracks()[0].times == std::vector<double>{ 0.0, 1.5, 4.0 });
    CHECK(back.script.tracks()[0].positions[1] == Eigen::Vector3d(1.0, 0.5, 1.7));
    CHECK(back.script.tracks()[1].name == "hand");
    CHECK(back.script.noiseAmplitude() == 0.004);
    CHECK(back.script.seed() == 99);

    // Sampling the reloaded script reproduces the original byte-for-byte.
    for (double t : { 0.0, 0.7, 1.5, 3.2, 9.0 })
    {
      const HumanState a = sc.script.sample(t);
      const HumanState b = back.script.sample(t);
      REQUIRE(a.keypoints.size() == b.keypoints.size());
      for (std::size_t k = 0; k < a.keypoints.size(); ++k)
      {
        CHECK(a.keypoints[k].position == b.keypoints[k].position);
        CHECK(a.keypoints[k].velocity == b.keypoints[k].velocity);
      }
    }
  }

  TEST_CASE("pfl safety mode survives a scenario round trip")
  {
    TempDir dir("scenario-pfl");

    Scenario sc;
    sc.name = "pfl";
    sc.q_start = vec({ 0.0, 0.0 });
    sc.q_goal = vec({ 1.0, 0.5 });
    sc.safety = PFLParams{ 120.0, 60000.0, 8.0, 3.5 };

    const fs::path file = dir.path / "pfl.json";
    saveScenario(file, sc);
    const Scenario back = loadScenario(file);

    REQUIRE(std::holds_alternative<PFLParams>(back.safety));
    const auto& pfl = std::get<PFLParams>(back.safety);
    CHECK(pfl.F_max == 120.0);
    CHECK(pfl.k == 60000.0);
    CHECK(pfl.m_r == 8.0);
    CHECK(pfl.m_h == 3.5);
  }

  TEST_CASE("loadScenario rejects malformed files with a useful error")
  {
    TempDir dir("scenario-bad");

    const fs::path missing = dir.path / "missing.json";
    CHECK_THROWS_AS(loadScenario(missing), std::runtime_error);

    const fs::path bad = dir.path / "bad.json";
    std::ofstream(bad) << "{ \"name\": \"x\" ";  // truncated JSON
    CHECK_THROWS_AS(loadScenario(bad), std::runtime_error);

    const fs::path mismatched = dir.path / "dims.json";
    std::ofstream(mismatched) << R"({"name":"d","model":"planar2",)"
                              << R"("q_start":[0,0,0],"q_goal":[1,1,1]})";
    CHECK_THROWS_AS(loadScenario(mismatched), std::runtime_error);
  }

  TEST_CASE("bundled scenarios load and are internally consistent")
  {
    for (const char* name : { "long", "short", "medium", "proactive", "sweep" })
    {
      CAPTURE(name);
      const Scenario sc = loadScenario(kDataDir / "scenarios" / (std::string(name) + ".json"));
      CHECK(sc.name == name);
      CHECK(sc.model.dof() == sc.q_start.size());
      CHECK(sc.model.dof() == sc.q_goal.size());
      CHECK(sc.timeout_s > 0.0);
      CHECK(!sc.script.tracks().empty());
    }
  }

  TEST_CASE("suite files resolve scenarios relative to their own location")
  {
    const BenchmarkPlan plan = loadSuite(kDataDir / "suites" / "long.json");
    REQUIRE(plan.scenarios.size() == 1);
    CHECK(plan.scenarios[0].name == "long");
    REQUIRE(plan.strategies.size() == 3);
    CHECK(plan.strategies[0] == Strategy::Marsha);
    CHECK(plan.strategies[1] == Strategy::Mars);
    CHECK(plan.strategies[2] == Strategy::Dssm);
    CHECK(plan.reps == 20);
    CHECK(plan.seed == 1);
    CHECK(plan.speed_fractions == std::vector<double>{ 1.0 });
    CHECK(plan.rates.execution_hz == 500.0);
    CHECK(plan.rates.collision_hz == 25.0);
    CHECK(plan.rates.replan_hz == 5.0);
    CHECK(plan.replanner.budget_s == 0.2);
    CHECK(plan.planner.budget_s == 2.0);
    CHECK(plan.extra_paths == 2);
  }

  TEST_CASE("paths round-trip through save and load")
  {
    TempDir dir("path");

    RngStream rng(7);
    std::vector<Eigen::VectorXd> wps;
    for (int i = 0; i < 4; ++i)
    {
      Eigen::VectorXd q(3);
      for (int j = 0; j < 3; ++j)
        q[j] = rng.uniform(-3.0, 3.0);
      wps.push_back(q);
    }
    const Path path(wps);

    const fs::path file = dir.path / "path.json";
    savePath(file, path);
    const Path back = loadPath(file);

    REQUIRE(back.waypoints().size() == path.waypoints().size());
    for (std::size_t i = 0; i < wps.size(); ++i)
      CHECK(back.waypoints()[i] == path.waypoints()[i]);
  }

  TEST_CASE("episode CSV bytes are stable")
  {
    TempDir dir("episode-csv");

    EpisodeRow a;
    a.scenario = "alpha";
    a.strategy = "marsha";
    a.speed_fraction = 1.0;
    a.rep = 0;
    a.seed = 42;
    a.sweep_set = 2;
    a.metrics.completed = true;
    a.metrics.exec_time_norm = 1.25;
    a.metrics.avg_scaling = 87.5;
    a.metrics.replan_adoptions = 3;
    a.metrics.min_separation_observed = 0.5;
    a.metrics.nominal_s = 2.0;
    a.metrics.executed_s = 2.5;
    a.metrics.replan_calls = 10;

    EpisodeRow b;
    b.scenario = "has,comma";
    b.strategy = "dssm";
    b.speed_fraction = 0.3;
    b.rep = 1;
    b.seed = 7;
    b.sweep_set = 0;
    b.failed = true;
    b.error = "boom \"x\"";
    b.metrics.completed = false;
    b.metrics.exec_time_norm = 0.0;
    b.metrics.avg_scaling = 0.0;
    b.metrics.min_separation_observed = std::numeric_limits<double>::infinity();
    b.metrics.nominal_s = 0.0;
    b.metrics.executed_s = 0.0;

    const fs::path file = dir.path / "episodes.csv";
    writeEpisodeCsv(file, { a, b });

    const std::string expected =
        "scenario,strategy,speed_fraction,rep,seed,sweep_set,C,T_r,v_h,a_s,"
        "failed,completed,exec_time_norm,avg_scaling,replan_adoptions,min_separation,"
        "nominal_s,executed_s,replan_calls,lazy_violations,acceptance_violations,error\n"
        "alpha,marsha,1,0,42,2,0.1,0.15,0,2.5,0,1,1.25,87.5,3,0.5,2,2.5,10,0,0,\n"
        "\"has,comma\",dssm,0.3,1,7,0,,,,,1,0,0,0,0,inf,0,0,0,0,0,\"boom \"\"x\"\"\"\n";
    CHECK(slurp(file) == expected);

    // Writing the same rows again yields identical bytes (rerun comparability).
    const fs::path file2 = dir.path / "episodes2.csv";
    writeEpisodeCsv(file2, { a, b });
    CHECK(slurp(file2) == expected);
  }

  TEST_CASE("summary CSV bytes are stable")
  {
    TempDir dir("summary-csv");

    StrategySummary s;
    s.scenario = "alpha";
    s.strategy = "marsha";
    s.speed_fraction = 0.6;
    s.sweep_set = 0;
    s.n = 4;
    s.failures = 1;
    s.exec_mean = 2.5;
    s.exec_min = 1.0;
    s.exec_q1 = 1.75;
    s.exec_median = 2.5;
    s.exec_q3 = 3.25;
    s.exec_max = 4.0;
    s.scaling_mean = 90.0;
    s.adoptions_mean = 1.5;
    s.min_separation = 0.25;

    const fs::path file = dir.path / "summary.csv";
    writeSummaryCsv(file, { s });

    const std::string expected =
        "scenario,strategy,speed_fraction,sweep_set,n,failures,exec_mean,exec_min,exec_q1,"
        "exec_median,exec_q3,exec_max,scaling_mean,adoptions_mean,min_separation\n"
        "alpha,marsha,0.6,0,4,1,2.5,1,1.75,2.5,3.25,4,90,1.5,0.25\n";
    CHECK(slurp(file) == expected);
  }

  TEST_CASE("trace CSV writer enforces row width and emits stable bytes")
  {
    TempDir dir("trace-csv");

    const fs::path file = dir.path / "trace.csv";
    writeTraceCsv(file, { "t", "q0", "scale" }, { { 0.0, 1.5, 1.0 }, { 0.002, 1.49, 0.75 } });
    CHECK(slurp(file) == "t,q0,scale\n0,1.5,1\n0.002,1.49,0.75\n");

    CHECK_THROWS_AS(writeTraceCsv(dir.path / "bad.csv", { "t", "q0" }, { { 0.0, 1.0, 2.0 } }),
                    std::invalid_argument);
  }

  TEST_CASE("manifest records the run provenance")
  {
    TempDir dir("manifest");

    RunManifest m;
    m.command = "bench";
    m.scenario_paths = { "data/scenarios/long.json" };
    m.strategies = { "marsha", "dssm" };
    m.repetitions = 20;
    m.seed = 1;
    m.episode_seeds = { 11, 12, 13 };
    m.output_dir = "out";
    writeManifest(dir.path, m);

    const nlohmann::json j = nlohmann::json::parse(slurp(dir.path / "manifest.json"));
    CHECK(j.at("command") == "bench");
    CHECK(j.at("scenario_paths") == nlohmann::json({ "data/scenarios/long.json" }));
    CHECK(j.at("strategies") == nlohmann::json({ "marsha", "dssm" }));
    CHECK(j.at("repetitions") == 20);
    CHECK(j.at("seed") == 1);
    CHECK(j.at("episode_seeds") == nlohmann::json({ 11, 12, 13 }));
    CHECK(j.at("output_dir") == "out");
    CHECK(j.at("engine_version") == kEngineVersion);
  }

  TEST_CASE("quantile interpolates linearly between order statistics")
  {
    const std::vector<double> v = { 4.0, 1.0, 3.0, 2.0 };
    CHECK(quantile(v, 0.0) == 1.0);
    CHECK(quantile(v, 0.25) == 1.75);
    CHECK(quantile(v, 0.5) == 2.5);
    CHECK(quantile(v, 0.75) == 3.25);
    CHECK(quantile(v, 1.0) == 4.0);
    CHECK(quantile({ 5.0 }, 0.5) == 5.0);
    CHECK_THROWS_AS(quantile({}, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(quantile({ 1.0 }, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(quantile({ 1.0 }, -0.1), std::invalid_argument);
  }

  TEST_CASE("summarize groups rows and skips failed or incomplete episodes")
  {
    auto makeRow = [](const std::string& strategy, double exec, double scaling, int adoptions,
                      double min_sep) {
      EpisodeRow r;
      r.scenario = "s";
      r.strategy = strategy;
      r.speed_fraction = 1.0;
      r.metrics.completed = true;
      r.metrics.exec_time_norm = exec;
      r.metrics.avg_scaling = scaling;
      r.metrics.replan_adoptions = adoptions;
      r.metrics.min_separation_observed = min_sep;
      return r;
    };

    std::vector<EpisodeRow> rows;
    rows.push_back(makeRow("a", 1.0, 80.0, 1, 0.50));
    rows.push_back(makeRow("a", 2.0, 90.0, 2, 0.40));
    rows.push_back(makeRow("a", 3.0, 70.0, 3, 0.60));
    rows.push_back(makeRow("a", 4.0, 60.0, 2, 0.45));
    rows.push_back(makeRow("b", 3.0, 95.0, 0, 0.70));
    EpisodeRow failed = makeRow("b", 9.0, 0.0, 0, 0.01);
    failed.failed = true;
    rows.push_back(failed);
    EpisodeRow timed_out = makeRow("b", 9.0, 0.0, 0, 0.02);
    timed_out.metrics.completed = false;
    rows.push_back(timed_out);

    const std::vector<StrategySummary> sums = summarize(rows);
    REQUIRE(sums.size() == 2);

    const StrategySummary& a = sums[0];
    CHECK(a.strategy == "a");
    CHECK(a.n == 4);
    CHECK(a.failures == 0);
    CHECK(a.exec_mean == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(a.exec_min == 1.0);
    CHECK(a.exec_q1 == 1.75);
    CHECK(a.exec_median == 2.5);
    CHECK(a.exec_q3 == 3.25);
    CHECK(a.exec_max == 4.0);
    CHECK(a.scaling_mean == doctest::Approx(75.0).epsilon(1e-15));
    CHECK(a.adoptions_mean == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(a.min_separation == 0.40);

    const StrategySummary& b = sums[1];
    CHECK(b.strategy == "b");
    CHECK(b.n == 1);
    CHECK(b.failures == 2);  // one hard failure, one timeout
    CHECK(b.exec_mean == 3.0);
    CHECK(b.min_separation == 0.70);  // excluded episodes do not contribute

    // Distinct speed fractions and sweep sets land in separate groups.
    EpisodeRow slow = makeRow("a", 5.0, 50.0, 0, 0.30);
    slow.speed_fraction = 0.3;
    EpisodeRow swept = makeRow("a", 6.0, 40.0, 0, 0.20);
    swept.sweep_set = 15;
    rows.push_back(slow);
    rows.push_back(swept);
    CHECK(summarize(rows).size() == 4);
  }

  TEST_CASE("defaultOutDir honors the environment override")
  {
    const char* saved = std::getenv(kOutDirEnvVar);
    const std::string saved_value = saved ? saved : "";

    ::unsetenv(kOutDirEnvVar);
    CHECK(defaultOutDir() == fs::path("marsha-out"));

    ::setenv(kOutDirEnvVar, "/tmp/marsha-io-outdir", 1);
    CHECK(defaultOutDir() == fs::path("/tmp/marsha-io-outdir"));

    ::setenv(kOutDirEnvVar, "", 1);  // empty value falls back to the default
    CHECK(defaultOutDir() == fs::path("marsha-out"));

    if (saved)
      ::setenv(kOutDirEnvVar, saved_value.c_str(), 1);
    else
      ::unsetenv(kOutDirEnvVar);
  }

  TEST_CASE("box plot writer emits one panel per group")
  {
    TempDir dir("boxplot");

    std::vector<EpisodeRow> rows;
    for (int rep = 0; rep < 4; ++rep)
      for (const char* strategy : { "marsha", "dssm" })
      {
        EpisodeRow r;
        r.scenario = "s";
        r.strategy = strategy;
        r.speed_fraction = 1.0;
        r.rep = rep;
        r.metrics.completed = true;
        r.metrics.exec_time_norm = 1.0 + 0.1 * rep + (std::strcmp(strategy, "dssm") == 0 ? 0.5 : 0.0);
        r.metrics.avg_scaling = 90.0;
        r.metrics.min_separation_observed = 0.5;
        rows.push_back(r);
      }

    const fs::path file = dir.path / "plot.svg";
    writeBoxPlotSvg(file, rows);
    const std::string svg = slurp(file);
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("marsha") != std::string::npos);
    CHECK(svg.find("dssm") != std::string::npos);
    CHECK(svg.rfind("</svg>") != std::string::npos);
  }
}
