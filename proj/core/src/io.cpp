#include <marsha/io.hpp>

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace marsha
{

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace
{

json readJsonFile(const fs::path& file, const char* what)
{
  std::ifstream in(file);
  if (!in)
    throw std::runtime_error(std::string(what) + ": cannot open '" + file.string() + "'");
  try
  {
    json j;
    in >> j;
    return j;
  }
  catch (const json::exception& e)
  {
    throw std::runtime_error(std::string(what) + ": '" + file.string() + "': " + e.what());
  }
}

void writeTextFile(const fs::path& file, const std::string& text)
{
  if (!file.parent_path().empty())
    fs::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot write '" + file.string() + "'");
  out << text;
  if (!out)
    throw std::runtime_error("write failed for '" + file.string() + "'");
}

Eigen::Vector3d toVector3(const json& j, const std::string& what)
{
  if (!j.is_array() || j.size() != 3)
    throw std::runtime_error(what + ": expected an [x, y, z] array");
  return { j[0].get<double>(), j[1].get<double>(), j[2].get<double>() };
}

Eigen::VectorXd toVectorX(const json& j, const std::string& what)
{
  if (!j.is_array() || j.empty())
    throw std::runtime_error(what + ": expected a non-empty number array");
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

ojson fromVector3(const Eigen::Vector3d& v)
{
  return ojson::array({ v.x(), v.y(), v.z() });
}

ojson fromVectorX(const Eigen::VectorXd& v)
{
  ojson a = ojson::array();
  for (Eigen::Index i = 0; i < v.size(); ++i)
    a.push_back(v[i]);
  return a;
}

SafetyMode parseSafety(const json& j)
{
  const std::string mode = j.value("mode", "ssm");
  if (mode == "ssm")
  {
    SSMParams p;
    p.C = j.value("C", p.C);
    p.T_r = j.value("T_r", p.T_r);
    p.v_h = j.value("v_h", p.v_h);
    p.a_s = j.value("a_s", p.a_s);
    validate(p);
    return p;
  }
  if (mode == "pfl")
  {
    PFLParams p;
    p.F_max = j.value("F_max", p.F_max);
    p.k = j.value("k", p.k);
    p.m_r = j.value("m_r", p.m_r);
    p.m_h = j.value("m_h", p.m_h);
    validate(p);
    return p;
  }
  throw std::runtime_error("safety.mode must be 'ssm' or 'pfl', got '" + mode + "'");
}

ojson safetyJson(const SafetyMode& mode)
{
  ojson j;
  if (const auto* ssm = std::get_if<SSMParams>(&mode))
  {
    j["mode"] = "ssm";
    j["C"] = ssm->C;
    j["T_r"] = ssm->T_r;
    j["v_h"] = ssm->v_h;
    j["a_s"] = ssm->a_s;
  }
  else
  {
    const auto& pfl = std::get<PFLParams>(mode);
    j["mode"] = "pfl";
    j["F_max"] = pfl.F_max;
    j["k"] = pfl.k;
    j["m_r"] = pfl.m_r;
    j["m_h"] = pfl.m_h;
  }
  return j;
}

Obstacle parseObstacle(const json& j)
{
  const std::string type = j.at("type").get<std::string>();
  if (type == "sphere")
    return Sphere{ toVector3(j.at("center"), "sphere.center"), j.at("radius").get<double>() };
  if (type == "box")
    return Box{ toVector3(j.at("min"), "box.min"), toVector3(j.at("max"), "box.max") };
  if (type == "capsule")
    return Capsule{ toVector3(j.at("a"), "capsule.a"), toVector3(j.at("b"), "capsule.b"),
                    j.at("radius").get<double>() };
  throw std::runtime_error("obstacle.type must be sphere, box or capsule, got '" + type + "'");
}

ojson obstacleJson(const Obstacle& obstacle)
{
  ojson j;
  if (const auto* s = std::get_if<Sphere>(&obstacle))
  {
    j["type"] = "sphere";
    j["center"] = fromVector3(s->center);
    j["radius"] = s->radius;
  }
  else if (const auto* b = std::get_if<Box>(&obstacle))
  {
    j["type"] = "box";
    j["min"] = fromVector3(b->min);
    j["max"] = fromVector3(b->max);
  }
  else
  {
    const auto& c = std::get<Capsule>(obstacle);
    j["type"] = "capsule";
    j["a"] = fromVector3(c.a);
    j["b"] = fromVector3(c.b);
    j["radius"] = c.radius;
  }
  return j;
}

HumanScript parseHuman(const json& j)
{
  std::vector<HumanScript::Track> tracks;
  for (const json& tj : j.value("tracks", json::array()))
  {
    HumanScript::Track track;
    track.name = tj.at("name").get<std::string>();
    for (const json& t : tj.at("times"))
      track.times.push_back(t.get<double>());
    for (const json& p : tj.at("positions"))
      track.positions.push_back(toVector3(p, "track '" + track.name + "' position"));
    tracks.push_back(std::move(track));
  }
  return HumanScript(std::move(tracks), j.value("noise_amplitude", 0.0),
                     j.value("seed", std::uint64_t{ 0 }));
}

ojson humanJson(const HumanScript& script)
{
  ojson j;
  j["noise_amplitude"] = script.noiseAmplitude();
  j["seed"] = script.seed();
  ojson tracks = ojson::array();
  for (const HumanScript::Track& track : script.tracks())
  {
    ojson tj;
    tj["name"] = track.name;
    tj["times"] = track.times;
    ojson positions = ojson::array();
    for (const Eigen::Vector3d& p : track.positions)
      positions.push_back(fromVector3(p));
    tj["positions"] = std::move(positions);
    tracks.push_back(std::move(tj));
  }
  j["tracks"] = std::move(tracks);
  return j;
}

std::string csvField(const std::string& s)
{
  if (s.find_first_of(",\"\n") == std::string::npos)
    return s;
  std::string quoted = "\"";
  for (char c : s)
  {
    if (c == '"')
      quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

}  // namespace

fs::path defaultOutDir()
{
  const char* env = std::getenv(kOutDirEnvVar);
  if (env != nullptr && *env != '\0')
    return fs::path(env);
  return fs::path("marsha-out");
}

RobotModel builtinModel(const std::string& name)
{
  if (name == "planar2")
    return models::planar2();
  if (name == "arm6")
    return models::arm6();
  throw std::invalid_argument("unknown model '" + name + "' (builtin models: planar2, arm6)");
}

std::vector<std::string> builtinModelNames()
{
  return { "planar2", "arm6" };
}

Scenario loadScenario(const fs::path& file)
{
  const json j = readJsonFile(file, "loadScenario");
  try
  {
    Scenario sc;
    sc.name = j.at("name").get<std::string>();
    sc.model_name = j.at("model").get<std::string>();
    sc.model = builtinModel(sc.model_name);
    sc.q_start = toVectorX(j.at("q_start"), "q_start");
    sc.q_goal = toVectorX(j.at("q_goal"), "q_goal");
    if (sc.q_start.size() != sc.model.dof() || sc.q_goal.size() != sc.model.dof())
      throw std::runtime_error("q_start/q_goal dimension does not match model '" + sc.model_name + "'");
    sc.timeout_s = j.value("timeout_s", sc.timeout_s);
    if (j.contains("safety"))
      sc.safety = parseSafety(j.at("safety"));
    if (j.contains("scene"))
    {
      const json& sj = j.at("scene");
      sc.scene.human_clearance = sj.value("human_clearance", sc.scene.human_clearance);
      for (const json& oj : sj.value("static_obstacles", json::array()))
        sc.scene.static_obstacles.push_back(parseObstacle(oj));
    }
    if (j.contains("human"))
      sc.script = parseHuman(j.at("human"));
    return sc;
  }
  catch (const json::exception& e)
  {
    throw std::runtime_error("loadScenario: '" + file.string() + "': " + e.what());
  }
}

void saveScenario(const fs::path& file, const Scenario& scenario)
{
  ojson j;
  j["name"] = scenario.name;
  j["model"] = scenario.model_name;
  j["q_start"] = fromVectorX(scenario.q_start);
  j["q_goal"] = fromVectorX(scenario.q_goal);
  j["timeout_s"] = scenario.timeout_s;
  j["safety"] = safetyJson(scenario.safety);
  ojson scene;
  scene["human_clearance"] = scenario.scene.human_clearance;
  ojson obstacles = ojson::array();
  for (const Obstacle& o : scenario.scene.static_obstacles)
    obstacles.push_back(obstacleJson(o));
  scene["static_obstacles"] = std::move(obstacles);
  j["scene"] = std::move(scene);
  j["human"] = humanJson(scenario.script);
  writeTextFile(file, j.dump(2) + "\n");
}

BenchmarkPlan loadSuite(const fs::path& file)
{
  const json j = readJsonFile(file, "loadSuite");
  try
  {
    BenchmarkPlan plan;
    const fs::path base = file.parent_path();
    for (const json& sj : j.at("scenarios"))
      plan.scenarios.push_back(loadScenario(base / sj.get<std::string>()));
    for (const json& tj : j.at("strategies"))
      plan.strategies.push_back(parseStrategy(tj.get<std::string>()));
    plan.reps = j.value("reps", plan.reps);
    plan.seed = j.value("seed", plan.seed);
    if (j.contains("speed_fractions"))
    {
      plan.speed_fractions.clear();
      for (const json& f : j.at("speed_fractions"))
        plan.speed_fractions.push_back(f.get<double>());
    }
    if (j.contains("rates"))
    {
      const json& rj = j.at("rates");
      plan.rates.execution_hz = rj.value("execution_hz", plan.rates.execution_hz);
      plan.rates.collision_hz = rj.value("collision_hz", plan.rates.collision_hz);
      plan.rates.replan_hz = rj.value("replan_hz", plan.rates.replan_hz);
    }
    plan.replanner.budget_s = j.value("replan_budget_s", plan.replanner.budget_s);
    plan.planner.budget_s = j.value("planner_budget_s", plan.planner.budget_s);
    plan.extra_paths = j.value("extra_paths", plan.extra_paths);
    plan.parallel = j.value("parallel", plan.parallel);
    return plan;
  }
  catch (const json::exception& e)
  {
    throw std::runtime_error("loadSuite: '" + file.string() + "': " + e.what());
  }
}

void savePath(const fs::path& file, const Path& path)
{
  ojson j;
  ojson wps = ojson::array();
  for (std::size_t i = 0; i < path.waypointCount(); ++i)
    wps.push_back(fromVectorX(path.waypoint(i)));
  j["waypoints"] = std::move(wps);
  writeTextFile(file, j.dump(2) + "\n");
}

Path loadPath(const fs::path& file)
{
  const json j = readJsonFile(file, "loadPath");
  try
  {
    std::vector<Eigen::VectorXd> wps;
    for (const json& wj : j.at("waypoints"))
      wps.push_back(toVectorX(wj, "waypoint"));
    return Path(std::move(wps));
  }
  catch (const json::exception& e)
  {
    throw std::runtime_error("loadPath: '" + file.string() + "': " + e.what());
  }
}

std::array<SSMParams, 16> ssmSweepSets()
{
  const double C[2] = { 0.10, 0.30 };
  const double T_r[2] = { 0.15, 0.30 };
  const double v_h[2] = { 0.0, 1.6 };
  const double a_s[2] = { 0.10, 2.50 };
  std::array<SSMParams, 16> sets{};
  for (int i = 0; i < 16; ++i)
  {
    sets[i].C = C[(i >> 3) & 1];
    sets[i].T_r = T_r[(i >> 2) & 1];
    sets[i].v_h = v_h[(i >> 1) & 1];
    sets[i].a_s = a_s[i & 1];
  }
  return sets;
}

void writeManifest(const fs::path& dir, const RunManifest& manifest)
{
  ojson j;
  j["command"] = manifest.command;
  j["scenario_paths"] = manifest.scenario_paths;
  j["strategies"] = manifest.strategies;
  j["repetitions"] = manifest.repetitions;
  j["seed"] = manifest.seed;
  j["episode_seeds"] = manifest.episode_seeds;
  j["output_dir"] = manifest.output_dir;
  j["engine_version"] = manifest.engine_version;
  writeTextFile(dir / "manifest.json", j.dump(2) + "\n");
}

std::string formatDouble(double v)
{
  if (std::isnan(v))
    return "nan";
  if (std::isinf(v))
    return v > 0.0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void writeEpisodeCsv(const fs::path& file, const std::vector<EpisodeRow>& rows)
{
  const std::array<SSMParams, 16> sets = ssmSweepSets();
  std::ostringstream out;
  out << "scenario,strategy,speed_fraction,rep,seed,sweep_set,C,T_r,v_h,a_s,"
         "failed,completed,exec_time_norm,avg_scaling,replan_adoptions,min_separation,"
         "nominal_s,executed_s,replan_calls,lazy_violations,acceptance_violations,error\n";
  for (const EpisodeRow& row : rows)
  {
    out << csvField(row.scenario) << ',' << csvField(row.strategy) << ','
        << formatDouble(row.speed_fraction) << ',' << row.rep << ',' << row.seed << ','
        << row.sweep_set << ',';
    if (row.sweep_set >= 1 && row.sweep_set <= 16)
    {
      const SSMParams& p = sets[static_cast<std::size_t>(row.sweep_set - 1)];
      out << formatDouble(p.C) << ',' << formatDouble(p.T_r) << ',' << formatDouble(p.v_h) << ','
          << formatDouble(p.a_s) << ',';
    }
    else
    {
      out << ",,,,";
    }
    const EpisodeMetrics& m = row.metrics;
    out << (row.failed ? 1 : 0) << ',' << (m.completed ? 1 : 0) << ','
        << formatDouble(m.exec_time_norm) << ',' << formatDouble(m.avg_scaling) << ','
        << m.replan_adoptions << ',' << formatDouble(m.min_separation_observed) << ','
        << formatDouble(m.nominal_s) << ',' << formatDouble(m.executed_s) << ',' << m.replan_calls
        << ',' << m.lazy_violations << ',' << m.acceptance_violations << ',' << csvField(row.error)
        << '\n';
  }
  writeTextFile(file, out.str());
}

void writeSummaryCsv(const fs::path& file, const std::vector<StrategySummary>& summaries)
{
  std::ostringstream out;
  out << "scenario,strategy,speed_fraction,sweep_set,n,failures,exec_mean,exec_min,exec_q1,"
         "exec_median,exec_q3,exec_max,scaling_mean,adoptions_mean,min_separation\n";
  for (const StrategySummary& s : summaries)
  {
    out << csvField(s.scenario) << ',' << csvField(s.strategy) << ','
        << formatDouble(s.speed_fraction) << ',' << s.sweep_set << ',' << s.n << ',' << s.failures
        << ',' << formatDouble(s.exec_mean) << ',' << formatDouble(s.exec_min) << ','
        << formatDouble(s.exec_q1) << ',' << formatDouble(s.exec_median) << ','
        << formatDouble(s.exec_q3) << ',' << formatDouble(s.exec_max) << ','
        << formatDouble(s.scaling_mean) << ',' << formatDouble(s.adoptions_mean) << ','
        << formatDouble(s.min_separation) << '\n';
  }
  writeTextFile(file, out.str());
}

void writeTraceCsv(const fs::path& file, const std::vector<std::string>& header,
                   const std::vector<std::vector<double>>& rows)
{
  std::ostringstream out;
  for (std::size_t i = 0; i < header.size(); ++i)
    out << (i ? "," : "") << csvField(header[i]);
  out << '\n';
  for (const std::vector<double>& row : rows)
  {
    if (row.size() != header.size())
      throw std::invalid_argument("writeTraceCsv: row width does not match header");
    for (std::size_t i = 0; i < row.size(); ++i)
      out << (i ? "," : "") << formatDouble(row[i]);
    out << '\n';
  }
  writeTextFile(file, out.str());
}

namespace
{

std::string svgNum(double v)
{
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

void writeBoxPlotSvg(const fs::path& file, const std::vector<EpisodeRow>& rows)
{
  const std::vector<StrategySummary> all = summarize(rows);

  // Panel key: (sweep set, scenario, speed fraction), in appearance order.
  struct Panel
  {
    int sweep_set;
    std::string scenario;
    double speed_fraction;
    std::vector<const StrategySummary*> boxes;
  };
  std::vector<Panel> panels;
  for (const StrategySummary& s : all)
  {
    if (s.n == 0)
      continue;
    Panel* panel = nullptr;
    for (Panel& p : panels)
      if (p.sweep_set == s.sweep_set && p.scenario == s.scenario &&
          p.speed_fraction == s.speed_fraction)
        panel = &p;
    if (panel == nullptr)
    {
      panels.push_back(Panel{ s.sweep_set, s.scenario, s.speed_fraction, {} });
      panel = &panels.back();
    }
    panel->boxes.push_back(&s);
  }

  const double panel_w = 640.0, panel_h = 240.0;
  const double margin_l = 70.0, margin_r = 20.0, margin_t = 36.0, margin_b = 40.0;
  const double height = std::max<std::size_t>(panels.size(), 1) * panel_h;

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << svgNum(panel_w) << "\" height=\""
      << svgNum(height) << "\" font-family=\"monospace\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  for (std::size_t pi = 0; pi < panels.size(); ++pi)
  {
    const Panel& panel = panels[pi];
    const double top = pi * panel_h;
    const double plot_x = margin_l, plot_y = top + margin_t;
    const double plot_w = panel_w - margin_l - margin_r;
    const double plot_h = panel_h - margin_t - margin_b;

    double lo = kInfinity, hi = -kInfinity;
    for (const StrategySummary* s : panel.boxes)
    {
      lo = std::min(lo, s->exec_min);
      hi = std::max(hi, s->exec_max);
    }
    if (!(hi > lo))
    {
      lo -= 0.5;
      hi += 0.5;
    }
    const double pad = 0.08 * (hi - lo);
    lo -= pad;
    hi += pad;
    const auto yOf = [&](double v) { return plot_y + plot_h * (hi - v) / (hi - lo); };

    std::string title = panel.scenario;
    if (panel.sweep_set > 0)
      title += " set " + std::to_string(panel.sweep_set);
    if (panel.speed_fraction != 1.0)
      title += " @" + formatDouble(panel.speed_fraction);
    out << "<text x=\"" << svgNum(plot_x) << "\" y=\"" << svgNum(top + 20.0)
        << "\">exec_time_norm - " << title << "</text>\n";

    // Frame and four horizontal reference ticks.
    out << "<rect x=\"" << svgNum(plot_x) << "\" y=\"" << svgNum(plot_y) << "\" width=\""
        << svgNum(plot_w) << "\" height=\"" << svgNum(plot_h)
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int tick = 0; tick <= 3; ++tick)
    {
      const double v = lo + (hi - lo) * tick / 3.0;
      out << "<line x1=\"" << svgNum(plot_x - 4.0) << "\" y1=\"" << svgNum(yOf(v)) << "\" x2=\""
          << svgNum(plot_x) << "\" y2=\"" << svgNum(yOf(v)) << "\" stroke=\"black\"/>\n";
      out << "<text x=\"" << svgNum(8.0) << "\" y=\"" << svgNum(yOf(v) + 4.0) << "\">"
          << svgNum(v) << "</text>\n";
    }

    const double slot = plot_w / panel.boxes.size();
    for (std::size_t bi = 0; bi < panel.boxes.size(); ++bi)
    {
      const StrategySummary& s = *panel.boxes[bi];
      const double cx = plot_x + slot * (bi + 0.5);
      const double bw = std::min(60.0, slot * 0.5);

      out << "<line x1=\"" << svgNum(cx) << "\" y1=\"" << svgNum(yOf(s.exec_min)) << "\" x2=\""
          << svgNum(cx) << "\" y2=\"" << svgNum(yOf(s.exec_max)) << "\" stroke=\"black\"/>\n";
      out << "<rect x=\"" << svgNum(cx - bw / 2) << "\" y=\"" << svgNum(yOf(s.exec_q3))
          << "\" width=\"" << svgNum(bw) << "\" height=\""
          << svgNum(yOf(s.exec_q1) - yOf(s.exec_q3)) << "\" fill=\"#cfe2f3\" stroke=\"black\"/>\n";
      out << "<line x1=\"" << svgNum(cx - bw / 2) << "\" y1=\"" << svgNum(yOf(s.exec_median))
          << "\" x2=\"" << svgNum(cx + bw / 2) << "\" y2=\"" << svgNum(yOf(s.exec_median))
          << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
      out << "<text x=\"" << svgNum(cx - bw / 2) << "\" y=\"" << svgNum(top + panel_h - 14.0)
          << "\">" << s.strategy << "</text>\n";
    }
  }
  out << "</svg>\n";
  writeTextFile(file, out.str());
}

}  // namespace marsha
