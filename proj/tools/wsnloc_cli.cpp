// Command-line front end: scenario generation, experiment runs, result
// comparison, and fingerprint database handling.

#include "CLI11.hpp"

#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "wsnloc/error.hpp"
#include "wsnloc/fingerprint.hpp"
#include "wsnloc/format.hpp"
#include "wsnloc/harness.hpp"
#include "wsnloc/version.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw wsnloc::IoError("cannot write: " + path);
  out << text;
  if (!out) throw wsnloc::IoError("failed while writing: " + path);
}

std::map<int, double> parse_reading(const std::string& text) {
  std::map<int, double> reading;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    if (comma == std::string::npos) comma = text.size();
    const std::string item = text.substr(start, comma - start);
    if (!item.empty()) {
      const std::size_t eq = item.find('=');
      if (eq == std::string::npos) {
        throw wsnloc::ParseError("reading entry `" + item + "` is not tower=dbm");
      }
      reading[static_cast<int>(wsnloc::parse_long(item.substr(0, eq)))] =
          wsnloc::parse_double(item.substr(eq + 1));
    }
    start = comma + 1;
  }
  if (reading.empty()) throw wsnloc::ParseError("reading has no tower=dbm entries");
  return reading;
}

struct GenArgs {
  std::string algorithm;
  std::string out;
};

struct RunArgs {
  std::string scenario;
  std::string out;
  std::vector<std::uint64_t> seeds;
};

struct CompareArgs {
  std::vector<std::string> summaries;
  std::string out;
};

struct FpBuildArgs {
  std::string survey;
  std::string out;
  double floor_dbm = wsnloc::fingerprint::kDefaultFloorDbm;
};

struct FpLocateArgs {
  std::string db;
  std::string reading;
  int k = 1;
  double floor_dbm = wsnloc::fingerprint::kDefaultFloorDbm;
};

int do_gen(const GenArgs& args) {
  const std::string text = wsnloc::harness::scenario_skeleton(args.algorithm);
  if (args.out.empty()) {
    std::cout << text;
  } else {
    write_text(args.out, text);
    std::cerr << "wrote " << args.out << "\n";
  }
  return kExitOk;
}

int do_run(const RunArgs& args) {
  wsnloc::harness::Scenario scenario = wsnloc::harness::load_scenario(args.scenario);
  for (const std::string& w : scenario.warnings) std::cerr << "warning: " << w << "\n";
  if (!args.seeds.empty()) {
    scenario.seeds = args.seeds;
    scenario.validate();
  }

  const auto results = wsnloc::harness::run_scenario(scenario);

  for (const auto& r : results) {
    for (const auto& [name, s] : r.summary) {
      std::cerr << "seed " << r.seed << " " << name << ": n=" << s.n_records
                << " mean=" << wsnloc::format_double(s.mean_error)
                << " rms=" << wsnloc::format_double(s.rms_error);
      if (s.n_failed > 0) std::cerr << " failed=" << s.n_failed;
      if (s.beacon_overhead) {
        std::cerr << " beacon_overhead=" << wsnloc::format_double(*s.beacon_overhead);
      }
      std::cerr << "\n";
    }
  }

  if (args.out.empty()) {
    std::cout << wsnloc::harness::results_csv(results);
    return kExitOk;
  }
  auto written = wsnloc::harness::export_results(results, args.out,
                                                 wsnloc::harness::ExportFormat::Csv);
  const auto plots = wsnloc::harness::export_results(
      results, args.out, wsnloc::harness::ExportFormat::Plotdata);
  written.insert(written.end(), plots.begin(), plots.end());
  for (const std::string& path : written) std::cerr << "wrote " << path << "\n";
  return kExitOk;
}

int do_compare(const CompareArgs& args) {
  const auto table = wsnloc::harness::compare_summaries(args.summaries);
  const std::string text = wsnloc::harness::comparison_csv(table);
  if (args.out.empty()) {
    std::cout << text;
  } else {
    write_text(args.out, text);
    std::cerr << "wrote " << args.out << "\n";
  }
  return kExitOk;
}

int do_fp_build(const FpBuildArgs& args) {
  const auto survey = wsnloc::fingerprint::read_survey_csv(args.survey);
  const auto db = wsnloc::fingerprint::build_fingerprint_db(survey, args.floor_dbm);
  wsnloc::fingerprint::save_fingerprint_db(db, args.out);
  std::cerr << "wrote " << args.out << " (" << db.points.size() << " reference points, "
            << db.towers.size() << " towers)\n";
  return kExitOk;
}

int do_fp_locate(const FpLocateArgs& args) {
  const auto db = wsnloc::fingerprint::load_fingerprint_db(args.db);
  const auto reading = parse_reading(args.reading);
  const wsnloc::Position p =
      wsnloc::fingerprint::knn_locate(db, reading, args.k, args.floor_dbm);
  std::cout << wsnloc::format_double(p.x) << ',' << wsnloc::format_double(p.y) << ','
            << wsnloc::format_double(p.z) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wireless sensor localization workbench"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(wsnloc::kVersion));

  GenArgs gen_args;
  auto* gen = app.add_subcommand("gen", "emit a scenario skeleton");
  gen->add_option("algorithm", gen_args.algorithm, "algorithm the scenario should run")
      ->required();
  gen->add_option("--out", gen_args.out, "write to this file instead of stdout");

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "run a scenario and export results");
  run->add_option("scenario", run_args.scenario, "scenario file (JSON)")->required();
  run->add_option("--out", run_args.out,
                  "directory for results.csv, summary.json and plotdata.csv; "
                  "without it the CSV goes to stdout");
  run->add_option("--seeds", run_args.seeds, "replace the scenario's seed list");

  CompareArgs compare_args;
  auto* compare = app.add_subcommand("compare", "tabulate exported summary.json files");
  compare->add_option("summaries", compare_args.summaries, "summary.json files")
      ->required()
      ->expected(-1);
  compare->add_option("--out", compare_args.out, "write the table to this file");

  auto* fp = app.add_subcommand("fingerprint", "fingerprint database commands");
  fp->require_subcommand(1);

  FpBuildArgs fp_build_args;
  auto* fp_build = fp->add_subcommand("build", "build a database from a survey CSV");
  fp_build->add_option("--survey", fp_build_args.survey, "survey CSV file")->required();
  fp_build->add_option("--out", fp_build_args.out, "database file to write")->required();
  fp_build->add_option("--floor", fp_build_args.floor_dbm,
                       "imputed RSSI for unheard towers (dBm)");

  FpLocateArgs fp_locate_args;
  auto* fp_locate = fp->add_subcommand("locate", "locate a reading against a database");
  fp_locate->add_option("--db", fp_locate_args.db, "database file")->required();
  fp_locate->add_option("--reading", fp_locate_args.reading,
                        "comma-separated tower=dbm pairs, e.g. 0=-62.5,1=-70")
      ->required();
  fp_locate->add_option("--k", fp_locate_args.k, "neighbors to average");
  fp_locate->add_option("--floor", fp_locate_args.floor_dbm,
                        "imputed RSSI for towers missing from the reading (dBm)");

  auto* version = app.add_subcommand("version", "print the version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*gen) return do_gen(gen_args);
    if (*run) return do_run(run_args);
    if (*compare) return do_compare(compare_args);
    if (*fp_build) return do_fp_build(fp_build_args);
    if (*fp_locate) return do_fp_locate(fp_locate_args);
    if (*version) {
      std::cout << wsnloc::kVersion << "\n";
      return kExitOk;
    }
  } catch (const wsnloc::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const wsnloc::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const wsnloc::ContractError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
