#include "rprl/harness/curves.hpp"

#include <cmath>
#include <fstream>

#include "rprl/errors.hpp"
#include "rprl/format.hpp"
#include "rprl/harness/config.hpp"

namespace rprl::harness {

void write_metrics_header(std::ostream& os) { os << kMetricsHeader << '\n'; }

void write_metrics_row(std::ostream& os, const MetricsRow& r) {
  os << r.step << ',' << r.episodes << ',' << fmt_num(r.mean_reward) << ',' << r.min_length << ','
     << fmt_num(r.mean_length) << ',' << fmt_num(r.success_rate) << ',' << fmt_num(r.train_reward) << '\n';
}

namespace {

double parse_double(const std::string& s, const std::string& where) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw FormatError(where + ": bad number '" + s + "'");
  return v;
}

std::uint64_t parse_count(const std::string& s, const std::string& where) {
  try {
    return parse_u64(s, where);
  } catch (const ConfigError& e) {
    throw FormatError(e.what());
  }
}

// Mean and two sample standard deviations; the band is 0 for one value.
std::pair<double, double> mean_band(const std::vector<double>& v) {
  // offsets from the first value keep identical runs at exactly zero spread
  const double base = v.front();
  double d = 0.0;
  for (double x : v) d += x - base;
  d /= static_cast<double>(v.size());
  if (v.size() < 2) return {base + d, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - base - d) * (x - base - d);
  return {base + d, 2.0 * std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

}  // namespace

std::vector<MetricsRow> read_metrics(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot read metrics file " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader)
    throw FormatError(path.string() + ":1: expected header '" + std::string(kMetricsHeader) + "'");
  std::vector<MetricsRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    std::vector<std::string> f;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      f.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (f.size() != 7) throw FormatError(where + ": expected 7 fields, got " + std::to_string(f.size()));
    MetricsRow r;
    r.step = parse_count(f[0], where);
    r.episodes = static_cast<int>(parse_count(f[1], where));
    r.mean_reward = parse_double(f[2], where);
    r.min_length = static_cast<int>(parse_count(f[3], where));
    r.mean_length = parse_double(f[4], where);
    r.success_rate = parse_double(f[5], where);
    r.train_reward = parse_double(f[6], where);
    rows.push_back(r);
  }
  return rows;
}

Curve aggregate_curves(const std::vector<NamedRun>& runs) {
  if (runs.empty()) throw ConfigError("aggregate_curves needs at least one run");
  const auto& grid = runs.front().rows;
  std::string bad;
  for (const auto& run : runs) {
    bool same = run.rows.size() == grid.size();
    for (std::size_t i = 0; same && i < grid.size(); ++i) same = run.rows[i].step == grid[i].step;
    if (!same) bad += (bad.empty() ? "" : ", ") + run.name;
  }
  if (!bad.empty())
    throw FormatError("evaluation steps differ from " + runs.front().name + " in: " + bad);

  Curve c;
  if (runs.size() == 1) c.warnings.push_back("single run " + runs.front().name + ": bands are zero");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    EvalPoint p;
    p.step = grid[i].step;
    std::vector<double> lengths;
    for (const auto& run : runs) {
      p.run_rewards.push_back(run.rows[i].mean_reward);
      p.run_min_lengths.push_back(run.rows[i].min_length);
      lengths.push_back(run.rows[i].min_length);
    }
    std::tie(p.mean_reward, p.reward_band) = mean_band(p.run_rewards);
    std::tie(p.mean_min_length, p.min_length_band) = mean_band(lengths);
    c.points.push_back(std::move(p));
  }
  return c;
}

Curve aggregate_curve_files(const std::vector<std::filesystem::path>& paths) {
  std::vector<NamedRun> runs;
  for (const auto& p : paths) {
    const auto file = std::filesystem::is_directory(p) ? p / "metrics.csv" : p;
    runs.push_back({file.string(), read_metrics(file)});
  }
  return aggregate_curves(runs);
}

void write_curve_csv(std::ostream& os, const Curve& curve) {
  os << kCurveHeader << '\n';
  for (const auto& p : curve.points)
    os << p.step << ',' << p.run_rewards.size() << ',' << fmt_num(p.mean_reward) << ',' << fmt_num(p.reward_band) << ','
       << fmt_num(p.mean_min_length) << ',' << fmt_num(p.min_length_band) << '\n';
}

}  // namespace rprl::harness
