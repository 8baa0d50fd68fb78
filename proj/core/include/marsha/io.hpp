#pragma once

#include <marsha/executor.hpp>
#include <marsha/path.hpp>
#include <marsha/suite.hpp>

#include <array>
#include <filesystem>
#include <string>
#include <vector>

namespace marsha
{

inline constexpr const char* kEngineVersion = "0.1.0";
inline constexpr const char* kOutDirEnvVar = "MARSHA_OUT";

// $MARSHA_OUT when set and non-empty, else ./marsha-out.
std::filesystem::path defaultOutDir();

// Bundled robot models addressable by name from scenario files.
RobotModel builtinModel(const std::string& name);
std::vector<std::string> builtinModelNames();

Scenario loadScenario(const std::filesystem::path& file);
void saveScenario(const std::filesystem::path& file, const Scenario& scenario);

/* Suite file: scenario references (resolved relative to the suite file),
 * strategies, repetition count and solver knobs, loaded into a runnable plan. */
BenchmarkPlan loadSuite(const std::filesystem::path& file);

void savePath(const std::filesystem::path& file, const Path& path);
Path loadPath(const std::filesystem::path& file);

/* The 16 bundled SSM parameter sets of the sweep, in canonical order:
 * C cycles slowest ({0.10, 0.30} m), then T_r ({0.15, 0.30} s), then v_h
 * ({0, 1.6} m/s), then a_s fastest ({0.10, 2.50} m/s²). */
std::array<SSMParams, 16> ssmSweepSets();

/* Reproducibility header recorded in every output directory. The engine
 * version doubles as the cache-busting hash: outputs are comparable only
 * between identical versions. */
struct RunManifest
{
  std::string command;
  std::vector<std::string> scenario_paths;
  std::vector<std::string> strategies;
  int repetitions = 0;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> episode_seeds;
  std::string output_dir;
  std::string engine_version = kEngineVersion;
};

void writeManifest(const std::filesystem::path& dir, const RunManifest& manifest);

/* Shortest round-trip decimal rendering; every CSV number goes through this
 * so reruns with equal values are byte-identical. */
std::string formatDouble(double v);

void writeEpisodeCsv(const std::filesystem::path& file, const std::vector<EpisodeRow>& rows);
void writeSummaryCsv(const std::filesystem::path& file, const std::vector<StrategySummary>& summaries);

/* Box-and-whisker chart of exec_time_norm per strategy, one panel per
 * (sweep set, scenario, speed fraction) group, as a standalone SVG file. */
void writeBoxPlotSvg(const std::filesystem::path& file, const std::vector<EpisodeRow>& rows);

/* Per-tick trace rows (time, q, scale, separation) for replay plotting. */
void writeTraceCsv(const std::filesystem::path& file, const std::vector<std::string>& header,
                   const std::vector<std::vector<double>>& rows);

}  // namespace marsha
