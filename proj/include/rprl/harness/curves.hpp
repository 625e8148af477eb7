#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace rprl::harness {

// One evaluation point of a single run.
struct MetricsRow {
  std::uint64_t step = 0;
  int episodes = 0;  // training episodes finished so far
  double mean_reward = 0.0;
  int min_length = 0;
  double mean_length = 0.0;
  double success_rate = 0.0;
  double train_reward = 0.0;  // mean reward of the last 10 training episodes
};

inline constexpr std::string_view kMetricsHeader =
    "step,episodes,mean_reward,min_length,mean_length,success_rate,train_reward";

void write_metrics_header(std::ostream& os);
void write_metrics_row(std::ostream& os, const MetricsRow& row);
// Strict: exact header, seven fields per line. Throws FormatError with the
// file and line.
std::vector<MetricsRow> read_metrics(const std::filesystem::path& path);

struct EvalPoint {
  std::uint64_t step = 0;
  std::vector<double> run_rewards;
  double mean_reward = 0.0;
  double reward_band = 0.0;  // two sample standard deviations across runs
  std::vector<int> run_min_lengths;
  double mean_min_length = 0.0;
  double min_length_band = 0.0;
};

struct Curve {
  std::vector<EvalPoint> points;
  std::vector<std::string> warnings;
};

struct NamedRun {
  std::string name;
  std::vector<MetricsRow> rows;
};

// Throws FormatError naming every run whose step grid differs from the
// first one.
Curve aggregate_curves(const std::vector<NamedRun>& runs);
// Accepts metrics.csv files or run directories containing one.
Curve aggregate_curve_files(const std::vector<std::filesystem::path>& paths);

inline constexpr std::string_view kCurveHeader = "step,runs,mean_reward,reward_band,mean_min_length,min_length_band";
void write_curve_csv(std::ostream& os, const Curve& curve);

}  // namespace rprl::harness
