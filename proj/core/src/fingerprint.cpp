#include "wsnloc/fingerprint.hpp"

#include "json.hpp"
#include "wsnloc/format.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <utility>

namespace wsnloc::fingerprint {

namespace {

using nlohmann::json;

constexpr const char* kSurveyHeader = "t,x,y,tower_id,rssi_dbm";

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

}  // namespace

std::vector<SurveySample> parse_survey_csv(std::istream& in, const std::string& source_name) {
  std::string line;
  if (!std::getline(in, line)) {
    throw ParseError(source_name + ": empty survey file");
  }
  strip_cr(line);
  if (line != kSurveyHeader) {
    throw ParseError(source_name + ":1: expected header `" + kSurveyHeader + "`, got `" +
                     line + "`");
  }
  std::vector<SurveySample> samples;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    const std::string where = source_name + ":" + std::to_string(line_no);
    if (fields.size() != 5) {
      throw ParseError(where + ": expected 5 fields, got " + std::to_string(fields.size()));
    }
    try {
      SurveySample s;
      s.t = parse_double(fields[0]);
      s.x = parse_double(fields[1]);
      s.y = parse_double(fields[2]);
      s.tower_id = static_cast<TowerId>(parse_long(fields[3]));
      s.rssi_dbm = parse_double(fields[4]);
      samples.push_back(s);
    } catch (const ParseError& e) {
      throw ParseError(where + ": " + e.what());
    }
  }
  return samples;
}

std::vector<SurveySample> read_survey_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open survey file: " + path);
  return parse_survey_csv(in, path);
}

void write_survey_csv(const std::string& path, std::span<const SurveySample> samples) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write survey file: " + path);
  out << kSurveyHeader << '\n';
  for (const SurveySample& s : samples) {
    out << format_double(s.t) << ',' << format_double(s.x) << ',' << format_double(s.y)
        << ',' << s.tower_id << ',' << format_double(s.rssi_dbm) << '\n';
  }
  if (!out) throw IoError("failed while writing survey file: " + path);
}

FingerprintDb build_fingerprint_db(std::span<const SurveySample> survey, double floor_dbm) {
  if (survey.empty()) throw ContractError("cannot build a fingerprint database from no samples");

  struct Acc {
    Position loc;
    std::map<TowerId, std::pair<double, int>> per_tower;  // sum, count
  };
  std::vector<Acc> accs;
  std::map<std::pair<double, double>, std::size_t> index;
  std::set<TowerId> tower_set;

  for (const SurveySample& s : survey) {
    const auto key = std::make_pair(s.x, s.y);
    auto [it, inserted] = index.emplace(key, accs.size());
    if (inserted) accs.push_back({{s.x, s.y, 0.0}, {}});
    auto& [sum, count] = accs[it->second].per_tower[s.tower_id];
    sum += s.rssi_dbm;
    ++count;
    tower_set.insert(s.tower_id);
  }

  FingerprintDb db;
  db.towers.assign(tower_set.begin(), tower_set.end());
  db.points.reserve(accs.size());
  for (const Acc& acc : accs) {
    ReferencePoint rp;
    rp.loc = acc.loc;
    rp.rssi.reserve(db.towers.size());
    for (TowerId tower : db.towers) {
      auto it = acc.per_tower.find(tower);
      rp.rssi.push_back(it == acc.per_tower.end()
                            ? floor_dbm
                            : it->second.first / static_cast<double>(it->second.second));
    }
    db.points.push_back(std::move(rp));
  }
  return db;
}

double fingerprint_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ContractError("fingerprint_distance: vectors of unequal length");
  }
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum_sq += d * d;
  }
  return std::sqrt(sum_sq);
}

Position knn_locate(const FingerprintDb& db, const std::vector<double>& reading, int k) {
  if (db.points.empty()) throw EstimateError("fingerprint database has no reference points");
  if (reading.size() != db.towers.size()) {
    throw ContractError("reading has " + std::to_string(reading.size()) +
                        " entries for " + std::to_string(db.towers.size()) + " towers");
  }
  if (k < 1 || static_cast<std::size_t>(k) > db.points.size()) {
    throw ContractError("k must lie in [1, " + std::to_string(db.points.size()) + "]");
  }
  std::vector<std::pair<double, std::size_t>> order;
  order.reserve(db.points.size());
  for (std::size_t i = 0; i < db.points.size(); ++i) {
    order.emplace_back(fingerprint_distance(reading, db.points[i].rssi), i);
  }
  std::sort(order.begin(), order.end());
  Position mean;
  for (int i = 0; i < k; ++i) {
    const Position& p = db.points[order[static_cast<std::size_t>(i)].second].loc;
    mean.x += p.x;
    mean.y += p.y;
    mean.z += p.z;
  }
  mean.x /= k;
  mean.y /= k;
  mean.z /= k;
  return mean;
}

Position knn_locate(const FingerprintDb& db, const std::map<TowerId, double>& reading,
                    int k, double floor_dbm) {
  std::vector<double> aligned;
  aligned.reserve(db.towers.size());
  for (TowerId tower : db.towers) {
    auto it = reading.find(tower);
    aligned.push_back(it == reading.end() ? floor_dbm : it->second);
  }
  return knn_locate(db, aligned, k);
}

int RssiBinning::bin_of(double dbm) const {
  const int raw = static_cast<int>(std::floor((dbm - origin) / width));
  return std::clamp(raw, 0, n_bins - 1);
}

RssiBinning RssiBinning::fit(double lo, double hi, double width) {
  if (!(width > 0.0)) throw ConfigError("bin width must be positive");
  if (hi < lo) throw ConfigError("bin range is inverted");
  RssiBinning b;
  b.origin = lo;
  b.width = width;
  b.n_bins = std::max(1, static_cast<int>(std::ceil((hi - lo) / width - 1e-9)));
  return b;
}

GridHistogramDb::GridHistogramDb(GridSpec grid, RssiBinning binning,
                                 std::vector<TowerId> towers,
                                 std::vector<std::vector<std::vector<double>>> histograms)
    : grid_(grid), binning_(binning), towers_(std::move(towers)),
      histograms_(std::move(histograms)) {
  if (towers_.empty()) throw ConfigError("histogram database needs at least one tower");
  if (std::set<TowerId>(towers_.begin(), towers_.end()).size() != towers_.size()) {
    throw ConfigError("duplicate tower ids");
  }
  if (binning_.n_bins < 1 || !(binning_.width > 0.0)) {
    throw ConfigError("invalid RSSI binning");
  }
  if (histograms_.size() != towers_.size()) {
    throw ConfigError("need one histogram set per tower");
  }
  for (const auto& per_cell : histograms_) {
    if (static_cast<int>(per_cell.size()) != grid_.n_cells()) {
      throw ConfigError("need one histogram per grid cell");
    }
    for (const auto& hist : per_cell) {
      if (static_cast<int>(hist.size()) != binning_.n_bins) {
        throw ConfigError("histogram length does not match the bin count");
      }
      double sum = 0.0;
      for (double p : hist) {
        if (!(p > 0.0)) throw ConfigError("histogram entries must be strictly positive");
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-6) throw ConfigError("histogram does not sum to 1");
    }
  }
}

int GridHistogramDb::tower_index(TowerId tower) const {
  for (std::size_t i = 0; i < towers_.size(); ++i) {
    if (towers_[i] == tower) return static_cast<int>(i);
  }
  throw NotFoundError("tower " + std::to_string(tower) + " not in histogram database");
}

const std::vector<double>& GridHistogramDb::histogram(TowerId tower, int cell) const {
  if (cell < 0 || cell >= grid_.n_cells()) {
    throw ContractError("cell index " + std::to_string(cell) + " out of range");
  }
  return histograms_[static_cast<std::size_t>(tower_index(tower))]
                    [static_cast<std::size_t>(cell)];
}

GridHistogramDb build_cellsense(std::span<const SurveySample> survey, Rect bounds,
                                double cell_size, double bin_width, double alpha) {
  if (survey.empty()) throw ContractError("cannot build histograms from no samples");
  if (!(alpha > 0.0)) throw ConfigError("smoothing weight must be positive");

  GridSpec grid(bounds, cell_size);

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  std::set<TowerId> tower_set;
  for (const SurveySample& s : survey) {
    lo = std::min(lo, s.rssi_dbm);
    hi = std::max(hi, s.rssi_dbm);
    tower_set.insert(s.tower_id);
  }
  const RssiBinning binning = RssiBinning::fit(lo, hi, bin_width);
  const std::vector<TowerId> towers(tower_set.begin(), tower_set.end());

  std::vector<std::vector<std::vector<int>>> counts(
      towers.size(), std::vector<std::vector<int>>(
                         static_cast<std::size_t>(grid.n_cells()),
                         std::vector<int>(static_cast<std::size_t>(binning.n_bins), 0)));
  std::map<TowerId, std::size_t> tower_at;
  for (std::size_t i = 0; i < towers.size(); ++i) tower_at[towers[i]] = i;

  for (const SurveySample& s : survey) {
    const int cell = grid.cell_index({s.x, s.y, 0.0});
    const int bin = binning.bin_of(s.rssi_dbm);
    ++counts[tower_at.at(s.tower_id)][static_cast<std::size_t>(cell)]
            [static_cast<std::size_t>(bin)];
  }

  std::vector<std::vector<std::vector<double>>> histograms(
      towers.size(), std::vector<std::vector<double>>(
                         static_cast<std::size_t>(grid.n_cells()),
                         std::vector<double>(static_cast<std::size_t>(binning.n_bins), 0.0)));
  for (std::size_t ti = 0; ti < towers.size(); ++ti) {
    for (int cell = 0; cell < grid.n_cells(); ++cell) {
      const auto& c = counts[ti][static_cast<std::size_t>(cell)];
      int total = 0;
      for (int v : c) total += v;
      const double denom = total + alpha * binning.n_bins;
      auto& h = histograms[ti][static_cast<std::size_t>(cell)];
      for (int b = 0; b < binning.n_bins; ++b) {
        h[static_cast<std::size_t>(b)] = (c[static_cast<std::size_t>(b)] + alpha) / denom;
      }
    }
  }
  return GridHistogramDb(grid, binning, towers, std::move(histograms));
}

double cellsense_log_likelihood(const GridHistogramDb& db, int cell,
                                const std::map<TowerId, std::vector<double>>& streams) {
  if (cell < 0 || cell >= db.grid().n_cells()) {
    throw ContractError("cell index " + std::to_string(cell) + " out of range");
  }
  double log_p = 0.0;
  for (const auto& [tower, samples] : streams) {
    const std::vector<double>& hist = db.histogram(tower, cell);
    for (double s : samples) {
      log_p += std::log(hist[static_cast<std::size_t>(db.binning().bin_of(s))]);
    }
  }
  return log_p;
}

Position cellsense_locate(const GridHistogramDb& db,
                          const std::map<TowerId, std::vector<double>>& streams) {
  int best_cell = 0;
  double best = cellsense_log_likelihood(db, 0, streams);
  for (int cell = 1; cell < db.grid().n_cells(); ++cell) {
    const double lp = cellsense_log_likelihood(db, cell, streams);
    if (lp > best) {
      best = lp;
      best_cell = cell;
    }
  }
  return db.grid().cell_center(best_cell);
}

void HmmModel::validate() const {
  const int n = n_states();
  if (n < 1) throw ConfigError("model needs at least one state");
  if (A.cols() != n) throw ConfigError("A must be square");
  if (B.rows() != n) throw ConfigError("B must have one row per state");
  if (n_symbols() < 1) throw ConfigError("model needs at least one symbol");
  if (pi.size() != n) throw ConfigError("pi must have one entry per state");
  if (grid.n_cells() != n) throw ConfigError("grid cell count must equal the state count");
  if (binning.n_bins != n_symbols()) {
    throw ConfigError("binning must match the symbol count");
  }
  auto check_rows = [](const Eigen::MatrixXd& m, const char* name) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      if (m.row(i).minCoeff() < 0.0) {
        throw ConfigError(std::string(name) + " has a negative entry");
      }
      if (std::abs(m.row(i).sum() - 1.0) > 1e-9) {
        throw ConfigError(std::string(name) + " row " + std::to_string(i) +
                          " does not sum to 1");
      }
    }
  };
  check_rows(A, "A");
  check_rows(B, "B");
  if (pi.minCoeff() < 0.0 || std::abs(pi.sum() - 1.0) > 1e-9) {
    throw ConfigError("pi is not a distribution");
  }
}

HmmModel hmm_build(std::span<const Trace> traces, const GridSpec& grid,
                   const RssiBinning& binning, double alpha) {
  if (traces.empty()) throw ContractError("cannot build a model from no traces");
  if (!(alpha > 0.0)) throw ConfigError("smoothing weight must be positive");
  const int n = grid.n_cells();
  const int v = binning.n_bins;

  Eigen::MatrixXd trans = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd emit = Eigen::MatrixXd::Zero(n, v);
  for (const Trace& trace : traces) {
    if (trace.cells.empty() || trace.cells.size() != trace.obs.size()) {
      throw ContractError("trace must pair one observation with each visited cell");
    }
    for (std::size_t t = 0; t < trace.cells.size(); ++t) {
      const int cell = trace.cells[t];
      const int obs = trace.obs[t];
      if (cell < 0 || cell >= n) throw ContractError("trace cell index out of range");
      if (obs < 0 || obs >= v) throw ContractError("trace observation symbol out of range");
      emit(cell, obs) += 1.0;
      if (t + 1 < trace.cells.size()) {
        const int next = trace.cells[t + 1];
        if (next < 0 || next >= n) throw ContractError("trace cell index out of range");
        trans(cell, next) += 1.0;
      }
    }
  }

  HmmModel model;
  model.grid = grid;
  model.binning = binning;
  model.A = Eigen::MatrixXd::Zero(n, n);
  // Transitions are confined to each cell and its edge neighbors; observed
  // jumps outside that set are dropped.
  for (int i = 0; i < n; ++i) {
    std::vector<int> allowed = grid.adjacent4(i);
    allowed.push_back(i);
    std::sort(allowed.begin(), allowed.end());
    double denom = 0.0;
    for (int j : allowed) denom += trans(i, j) + alpha;
    for (int j : allowed) model.A(i, j) = (trans(i, j) + alpha) / denom;
  }
  model.B = Eigen::MatrixXd(n, v);
  for (int i = 0; i < n; ++i) {
    const double denom = emit.row(i).sum() + alpha * v;
    for (int s = 0; s < v; ++s) model.B(i, s) = (emit(i, s) + alpha) / denom;
  }
  model.pi = hmm_steady_state(model.A);
  return model;
}

Eigen::VectorXd hmm_steady_state(const Eigen::MatrixXd& A) {
  const Eigen::Index n = A.rows();
  if (n == 0 || A.cols() != n) throw ContractError("transition matrix must be square");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (A.row(i).minCoeff() < -1e-12 || std::abs(A.row(i).sum() - 1.0) > 1e-6) {
      throw ContractError("transition matrix is not row-stochastic");
    }
  }
  Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  // Damped iteration: the half-step keeps periodic chains from oscillating
  // while preserving the fixed point.
  constexpr int kMaxIters = 5'000'000;
  for (int it = 0; it < kMaxIters; ++it) {
    const Eigen::VectorXd xa = A.transpose() * x;
    if ((xa - x).lpNorm<Eigen::Infinity>() < 1e-12) {
      return x / x.sum();
    }
    x = 0.5 * (x + xa);
    x /= x.sum();
  }
  throw NumericalError("stationary distribution iteration did not converge");
}

Eigen::VectorXd hmm_predict(const Eigen::VectorXd& belief, const Eigen::MatrixXd& A) {
  if (belief.size() != A.rows()) {
    throw ContractError("belief dimension does not match the transition matrix");
  }
  if (belief.minCoeff() < -1e-12 || std::abs(belief.sum() - 1.0) > 1e-6) {
    throw ContractError("belief is not a distribution");
  }
  Eigen::VectorXd out = A.transpose() * belief;
  return out / out.sum();
}

Eigen::VectorXd hmm_correct(const Eigen::VectorXd& belief, int obs,
                            const Eigen::MatrixXd& B) {
  if (belief.size() != B.rows()) {
    throw ContractError("belief dimension does not match the emission matrix");
  }
  if (obs < 0 || obs >= B.cols()) {
    throw ContractError("observation symbol " + std::to_string(obs) + " out of range");
  }
  Eigen::VectorXd posterior = belief.cwiseProduct(B.col(obs));
  const double total = posterior.sum();
  if (!(total > 0.0)) {
    throw EstimateError("observation has zero probability under every state");
  }
  return posterior / total;
}

ViterbiTracker::ViterbiTracker(const HmmModel& model) : model_(&model) {
  model.validate();
  log_a_ = model.A.array().log().matrix();
  log_b_ = model.B.array().log().matrix();
}

void ViterbiTracker::advance(int obs) {
  const int n = model_->n_states();
  if (obs < 0 || obs >= model_->n_symbols()) {
    throw ContractError("observation symbol " + std::to_string(obs) + " out of range");
  }
  if (steps_ == 0) {
    log_delta_ = model_->pi.array().log().matrix() + log_b_.col(obs);
  } else {
    Eigen::VectorXd next(n);
    std::vector<int> bp(static_cast<std::size_t>(n), 0);
    for (int j = 0; j < n; ++j) {
      int best_i = 0;
      double best = log_delta_(0) + log_a_(0, j);
      for (int i = 1; i < n; ++i) {
        const double cand = log_delta_(i) + log_a_(i, j);
        if (cand > best) {
          best = cand;
          best_i = i;
        }
      }
      next(j) = best + log_b_(j, obs);
      bp[static_cast<std::size_t>(j)] = best_i;
    }
    backpointers_.push_back(std::move(bp));
    log_delta_ = std::move(next);
  }
  if (!(log_delta_.maxCoeff() > -std::numeric_limits<double>::infinity())) {
    throw EstimateError("no state path explains the observation sequence");
  }
  ++steps_;
}

int ViterbiTracker::current_state() const {
  if (steps_ == 0) throw ContractError("no observations consumed yet");
  int best = 0;
  for (int i = 1; i < model_->n_states(); ++i) {
    if (log_delta_(i) > log_delta_(best)) best = i;
  }
  return best;
}

Position ViterbiTracker::current_position() const {
  return model_->grid.cell_center(current_state());
}

std::vector<int> ViterbiTracker::best_path() const {
  std::vector<int> path(static_cast<std::size_t>(steps_));
  int state = current_state();  // throws when steps_ == 0
  path.back() = state;
  for (int t = steps_ - 2; t >= 0; --t) {
    state = backpointers_[static_cast<std::size_t>(t)][static_cast<std::size_t>(state)];
    path[static_cast<std::size_t>(t)] = state;
  }
  return path;
}

HmmTrackResult hmm_track(const HmmModel& model, const ObservationSequence& seq) {
  if (seq.obs.empty()) throw ContractError("observation sequence must not be empty");
  ViterbiTracker tracker(model);
  for (int obs : seq.obs) tracker.advance(obs);
  return {tracker.best_path(), tracker.current_position()};
}

namespace {

constexpr const char* kFingerprintSchema = "wsnloc.fingerprint_db.v1";
constexpr const char* kCellsenseSchema = "wsnloc.cellsense_db.v1";
constexpr const char* kHmmSchema = "wsnloc.hmm.v1";

void require_schema(const json& j, const char* expected, const std::string& what) {
  if (!j.is_object() || !j.contains("schema") || !j.at("schema").is_string()) {
    throw ParseError(what + ": missing schema field");
  }
  const std::string got = j.at("schema").get<std::string>();
  if (got != expected) {
    throw ParseError(what + ": expected schema `" + expected + "`, got `" + got + "`");
  }
}

json bounds_to_json(const Rect& r) {
  return json{{"x0", r.x0}, {"y0", r.y0}, {"width", r.width}, {"height", r.height}};
}

Rect bounds_from_json(const json& j) {
  return {j.at("x0").get<double>(), j.at("y0").get<double>(),
          j.at("width").get<double>(), j.at("height").get<double>()};
}

json binning_to_json(const RssiBinning& b) {
  return json{{"origin", b.origin}, {"width", b.width}, {"n_bins", b.n_bins}};
}

RssiBinning binning_from_json(const json& j) {
  RssiBinning b;
  b.origin = j.at("origin").get<double>();
  b.width = j.at("width").get<double>();
  b.n_bins = j.at("n_bins").get<int>();
  return b;
}

json parse_store(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(what + ": " + e.what());
  }
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spill(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write: " + path);
  out << text;
  if (!out) throw IoError("failed while writing: " + path);
}

}  // namespace

std::string to_json_string(const FingerprintDb& db) {
  json points = json::array();
  for (const ReferencePoint& p : db.points) {
    points.push_back(json{{"x", p.loc.x}, {"y", p.loc.y}, {"z", p.loc.z}, {"rssi", p.rssi}});
  }
  const json j{{"schema", kFingerprintSchema}, {"towers", db.towers}, {"points", points}};
  return j.dump(2) + "\n";
}

FingerprintDb fingerprint_db_from_json_string(const std::string& text) {
  const json j = parse_store(text, "fingerprint database");
  require_schema(j, kFingerprintSchema, "fingerprint database");
  try {
    FingerprintDb db;
    db.towers = j.at("towers").get<std::vector<TowerId>>();
    for (const json& pj : j.at("points")) {
      ReferencePoint p;
      p.loc = {pj.at("x").get<double>(), pj.at("y").get<double>(), pj.at("z").get<double>()};
      p.rssi = pj.at("rssi").get<std::vector<double>>();
      if (p.rssi.size() != db.towers.size()) {
        throw ParseError("fingerprint database: point RSSI length does not match the tower list");
      }
      db.points.push_back(std::move(p));
    }
    return db;
  } catch (const json::exception& e) {
    throw ParseError(std::string("fingerprint database: ") + e.what());
  }
}

void save_fingerprint_db(const FingerprintDb& db, const std::string& path) {
  spill(path, to_json_string(db));
}

FingerprintDb load_fingerprint_db(const std::string& path) {
  return fingerprint_db_from_json_string(slurp(path));
}

std::string to_json_string(const GridHistogramDb& db) {
  const json j{{"schema", kCellsenseSchema},
               {"bounds", bounds_to_json(db.grid().bounds())},
               {"cell_size", db.grid().cell_size()},
               {"binning", binning_to_json(db.binning())},
               {"towers", db.towers()},
               {"histograms", db.histograms()}};
  return j.dump(2) + "\n";
}

GridHistogramDb cellsense_db_from_json_string(const std::string& text) {
  const json j = parse_store(text, "histogram database");
  require_schema(j, kCellsenseSchema, "histogram database");
  try {
    GridSpec grid(bounds_from_json(j.at("bounds")), j.at("cell_size").get<double>());
    return GridHistogramDb(grid, binning_from_json(j.at("binning")),
                           j.at("towers").get<std::vector<TowerId>>(),
                           j.at("histograms")
                               .get<std::vector<std::vector<std::vector<double>>>>());
  } catch (const json::exception& e) {
    throw ParseError(std::string("histogram database: ") + e.what());
  }
}

void save_cellsense_db(const GridHistogramDb& db, const std::string& path) {
  spill(path, to_json_string(db));
}

GridHistogramDb load_cellsense_db(const std::string& path) {
  return cellsense_db_from_json_string(slurp(path));
}

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(i, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw ParseError(what + ": expected a non-empty matrix");
  const std::size_t cols = j.at(0).size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < j.size(); ++i) {
    const json& row = j.at(i);
    if (row.size() != cols) throw ParseError(what + ": ragged matrix rows");
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
          row.at(c).get<double>();
    }
  }
  return m;
}

}  // namespace

std::string to_json_string(const HmmModel& model) {
  json pi = json::array();
  for (Eigen::Index i = 0; i < model.pi.size(); ++i) pi.push_back(model.pi(i));
  const json j{{"schema", kHmmSchema},
               {"bounds", bounds_to_json(model.grid.bounds())},
               {"cell_size", model.grid.cell_size()},
               {"binning", binning_to_json(model.binning)},
               {"a", matrix_to_json(model.A)},
               {"b", matrix_to_json(model.B)},
               {"pi", pi}};
  return j.dump(2) + "\n";
}

HmmModel hmm_from_json_string(const std::string& text) {
  const json j = parse_store(text, "state model");
  require_schema(j, kHmmSchema, "state model");
  try {
    HmmModel model;
    model.grid = GridSpec(bounds_from_json(j.at("bounds")), j.at("cell_size").get<double>());
    model.binning = binning_from_json(j.at("binning"));
    model.A = matrix_from_json(j.at("a"), "state model A");
    model.B = matrix_from_json(j.at("b"), "state model B");
    const auto pi = j.at("pi").get<std::vector<double>>();
    model.pi = Eigen::Map<const Eigen::VectorXd>(pi.data(),
                                                 static_cast<Eigen::Index>(pi.size()));
    model.validate();
    return model;
  } catch (const json::exception& e) {
    throw ParseError(std::string("state model: ") + e.what());
  }
}

void save_hmm(const HmmModel& model, const std::string& path) {
  spill(path, to_json_string(model));
}

HmmModel load_hmm(const std::string& path) { return hmm_from_json_string(slurp(path)); }

}  // namespace wsnloc::fingerprint
