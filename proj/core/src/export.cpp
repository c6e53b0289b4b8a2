#include "wsnloc/harness.hpp"

#include "json.hpp"
#include "wsnloc/format.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace wsnloc::harness {

namespace {

using nlohmann::json;

constexpr const char* kSummarySchema = "wsnloc.summary.v1";
constexpr const char* kResultsHeader =
    "seed,algorithm,node_or_step,true_x,true_y,true_z,est_x,est_y,est_z,error_m";

std::string hash_hex(std::uint64_t h) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[h & 0xF];
    h >>= 4;
  }
  return out;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write: " + path);
  out << text;
  if (!out) throw IoError("failed while writing: " + path);
}

}  // namespace

std::string results_csv(std::span<const RunResult> results) {
  if (results.empty()) throw ContractError("no results to export");
  std::ostringstream out;
  out << kResultsHeader << '\n';
  for (const RunResult& r : results) {
    for (const Record& rec : r.records) {
      out << r.seed << ',' << rec.algorithm << ',' << rec.node_or_step << ','
          << format_double(rec.truth.x) << ',' << format_double(rec.truth.y) << ','
          << format_double(rec.truth.z) << ',' << format_double(rec.est.x) << ','
          << format_double(rec.est.y) << ',' << format_double(rec.est.z) << ','
          << format_double(rec.error_m) << '\n';
    }
  }
  return out.str();
}

std::string summary_json(std::span<const RunResult> results) {
  if (results.empty()) throw ContractError("no results to export");

  struct Agg {
    long n_records = 0;
    long n_failed = 0;
    double err_sum = 0.0;
    double err_sq_sum = 0.0;
    double runtime_ms = 0.0;
    double overhead_sum = 0.0;
    int overhead_n = 0;
  };
  std::map<std::string, Agg> aggs;
  for (const RunResult& r : results) {
    for (const Record& rec : r.records) {
      Agg& a = aggs[rec.algorithm];
      ++a.n_records;
      a.err_sum += rec.error_m;
      a.err_sq_sum += rec.error_m * rec.error_m;
    }
    for (const Failure& f : r.failures) ++aggs[f.algorithm].n_failed;
    for (const auto& [name, s] : r.summary) {
      Agg& a = aggs[name];
      a.runtime_ms += r.runtime_ms;
      if (s.beacon_overhead) {
        a.overhead_sum += *s.beacon_overhead;
        ++a.overhead_n;
      }
    }
  }

  json algorithms = json::object();
  for (const auto& [name, a] : aggs) {
    json entry{{"n_records", a.n_records},
               {"n_failed", a.n_failed},
               {"mean_error", a.n_records ? a.err_sum / a.n_records : 0.0},
               {"rms_error", a.n_records ? std::sqrt(a.err_sq_sum / a.n_records) : 0.0},
               {"runtime_ms_total", a.runtime_ms}};
    if (a.overhead_n > 0) entry["beacon_overhead"] = a.overhead_sum / a.overhead_n;
    algorithms[name] = std::move(entry);
  }

  json per_seed = json::array();
  for (const RunResult& r : results) {
    json algs = json::object();
    for (const auto& [name, s] : r.summary) {
      json entry{{"n_records", s.n_records},
                 {"n_failed", s.n_failed},
                 {"mean_error", s.mean_error},
                 {"rms_error", s.rms_error}};
      if (s.beacon_overhead) entry["beacon_overhead"] = *s.beacon_overhead;
      algs[name] = std::move(entry);
    }
    per_seed.push_back(json{{"seed", r.seed}, {"algorithms", std::move(algs)}});
  }

  std::vector<std::uint64_t> seeds;
  for (const RunResult& r : results) seeds.push_back(r.seed);

  const json j{{"schema", kSummarySchema},
               {"scenario", results[0].scenario_name},
               {"scenario_hash", hash_hex(results[0].scenario_hash)},
               {"seeds", seeds},
               {"algorithms", std::move(algorithms)},
               {"per_seed", std::move(per_seed)}};
  return j.dump(2) + "\n";
}

std::string plotdata_csv(std::span<const RunResult> results) {
  if (results.empty()) throw ContractError("no results to export");
  // Mean error per (algorithm, node/step) across seeds.
  std::map<std::pair<std::string, int>, std::pair<double, int>> acc;
  for (const RunResult& r : results) {
    for (const Record& rec : r.records) {
      auto& [sum, n] = acc[{rec.algorithm, rec.node_or_step}];
      sum += rec.error_m;
      ++n;
    }
  }
  std::ostringstream out;
  out << "series,x,y\n";
  for (const auto& [key, sum_n] : acc) {
    out << key.first << ',' << key.second << ','
        << format_double(sum_n.first / sum_n.second) << '\n';
  }
  return out.str();
}

std::vector<std::string> export_results(std::span<const RunResult> results,
                                        const std::string& dir, ExportFormat format) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());

  std::vector<std::string> written;
  const auto base = std::filesystem::path(dir);
  if (format == ExportFormat::Csv) {
    const std::string csv_path = (base / "results.csv").string();
    write_file(csv_path, results_csv(results));
    written.push_back(csv_path);
    const std::string summary_path = (base / "summary.json").string();
    write_file(summary_path, summary_json(results));
    written.push_back(summary_path);
  } else {
    const std::string plot_path = (base / "plotdata.csv").string();
    write_file(plot_path, plotdata_csv(results));
    written.push_back(plot_path);
  }
  return written;
}

ComparisonTable compare_summaries(std::span<const std::string> paths) {
  if (paths.empty()) throw ContractError("no summary files to compare");
  ComparisonTable table;
  for (const std::string& path : paths) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open summary file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    json j;
    try {
      j = json::parse(ss.str());
    } catch (const json::exception& e) {
      throw ParseError(path + ": " + e.what());
    }
    if (!j.is_object() || j.value("schema", "") != kSummarySchema) {
      throw ParseError(path + ": not a summary file (expected schema `" +
                       kSummarySchema + "`)");
    }
    try {
      const std::string scenario = j.at("scenario").get<std::string>();
      const int n_seeds = static_cast<int>(j.at("seeds").size());
      for (const auto& [name, entry] : j.at("algorithms").items()) {
        ComparisonRow row;
        row.scenario = scenario;
        row.algorithm = name;
        row.n_seeds = n_seeds;
        row.mean_error = entry.at("mean_error").get<double>();
        row.rms_error = entry.at("rms_error").get<double>();
        row.runtime_ms = entry.at("runtime_ms_total").get<double>();
        table.rows.push_back(std::move(row));
      }
    } catch (const json::exception& e) {
      throw ParseError(path + ": " + e.what());
    }
  }
  std::sort(table.rows.begin(), table.rows.end(), [](const auto& a, const auto& b) {
    return std::tie(a.scenario, a.algorithm) < std::tie(b.scenario, b.algorithm);
  });
  return table;
}

std::string comparison_csv(const ComparisonTable& table) {
  std::ostringstream out;
  out << "scenario,algorithm,n_seeds,mean_error_m,rms_error_m,runtime_ms\n";
  for (const ComparisonRow& row : table.rows) {
    out << row.scenario << ',' << row.algorithm << ',' << row.n_seeds << ','
        << format_double(row.mean_error) << ',' << format_double(row.rms_error) << ','
        << format_double(row.runtime_ms) << '\n';
  }
  return out.str();
}

}  // namespace wsnloc::harness
