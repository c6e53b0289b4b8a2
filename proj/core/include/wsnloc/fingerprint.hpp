#pragma once

#include <Eigen/Dense>

#include <istream>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "wsnloc/grid.hpp"
#include "wsnloc/world.hpp"

namespace wsnloc::fingerprint {

using TowerId = int;

// One row of a survey trace: where the receiver was and what one tower
// measured there.
struct SurveySample {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  TowerId tower_id = 0;
  double rssi_dbm = 0.0;
};

// Survey CSV layout: header `t,x,y,tower_id,rssi_dbm`, one sample per row.
std::vector<SurveySample> parse_survey_csv(std::istream& in,
                                           const std::string& source_name = "<stream>");
std::vector<SurveySample> read_survey_csv(const std::string& path);
void write_survey_csv(const std::string& path, std::span<const SurveySample> samples);

// Substitute for a tower that produced no reading at a reference point.
inline constexpr double kDefaultFloorDbm = -110.0;

struct ReferencePoint {
  Position loc;
  std::vector<double> rssi;  // aligned with FingerprintDb::towers
};

struct FingerprintDb {
  std::vector<TowerId> towers;         // ascending
  std::vector<ReferencePoint> points;  // survey insertion order
};

// Pools survey samples by exact location: one reference point per distinct
// (x, y), per-tower mean RSSI, missing towers imputed with floor_dbm.
FingerprintDb build_fingerprint_db(std::span<const SurveySample> survey,
                                   double floor_dbm = kDefaultFloorDbm);

// Euclidean distance between two aligned RSSI vectors.
double fingerprint_distance(std::span<const double> a, std::span<const double> b);

// Mean location of the k reference points nearest in RSSI space; ties broken
// by insertion order. `reading` is aligned with db.towers.
Position knn_locate(const FingerprintDb& db, const std::vector<double>& reading, int k);
// Same, from a sparse reading: towers absent from the reading are imputed
// with floor_dbm, towers unknown to the db are ignored.
Position knn_locate(const FingerprintDb& db, const std::map<TowerId, double>& reading,
                    int k, double floor_dbm = kDefaultFloorDbm);

// Fixed-width discretization of RSSI into bins 0..n_bins-1 (clamped).
struct RssiBinning {
  double origin = -110.0;
  double width = 5.0;
  int n_bins = 1;
  int bin_of(double dbm) const;
  static RssiBinning fit(double lo, double hi, double width);
};

// Per-cell, per-tower smoothed RSSI histograms over a grid.
class GridHistogramDb {
 public:
  // histograms[tower][cell][bin], each row a distribution with every entry
  // strictly positive (smoothed).
  GridHistogramDb(GridSpec grid, RssiBinning binning, std::vector<TowerId> towers,
                  std::vector<std::vector<std::vector<double>>> histograms);

  const GridSpec& grid() const { return grid_; }
  const RssiBinning& binning() const { return binning_; }
  const std::vector<TowerId>& towers() const { return towers_; }
  int tower_index(TowerId tower) const;  // NotFoundError when unknown
  const std::vector<double>& histogram(TowerId tower, int cell) const;
  const std::vector<std::vector<std::vector<double>>>& histograms() const {
    return histograms_;
  }

 private:
  GridSpec grid_;
  RssiBinning binning_;
  std::vector<TowerId> towers_;
  std::vector<std::vector<std::vector<double>>> histograms_;
};

// Builds the gridded histogram database from a survey. Bin edges are fitted
// to the observed RSSI range; alpha is the additive smoothing weight.
GridHistogramDb build_cellsense(std::span<const SurveySample> survey, Rect bounds,
                                double cell_size, double bin_width, double alpha = 1.0);

// Joint log-probability of all sample streams under one cell's histograms.
double cellsense_log_likelihood(const GridHistogramDb& db, int cell,
                                const std::map<TowerId, std::vector<double>>& streams);

// Center of the cell maximizing the joint stream probability; ties go to the
// lowest cell index.
Position cellsense_locate(const GridHistogramDb& db,
                          const std::map<TowerId, std::vector<double>>& streams);

// One training walk: the cell occupied at each step and the observation
// symbol emitted there.
struct Trace {
  std::vector<int> cells;
  std::vector<int> obs;
};

struct ObservationSequence {
  std::vector<int> obs;
};

// Hidden Markov model over grid cells emitting RSSI bins. Transitions are
// restricted to each cell plus its edge-adjacent cells.
struct HmmModel {
  GridSpec grid;
  RssiBinning binning;
  Eigen::MatrixXd A;   // n_states x n_states, row-stochastic
  Eigen::MatrixXd B;   // n_states x n_symbols, row-stochastic
  Eigen::VectorXd pi;  // initial distribution
  int n_states() const { return static_cast<int>(A.rows()); }
  int n_symbols() const { return static_cast<int>(B.cols()); }
  void validate() const;
};

// Transition and emission counting with additive smoothing; pi is the
// stationary distribution of A.
HmmModel hmm_build(std::span<const Trace> traces, const GridSpec& grid,
                   const RssiBinning& binning, double alpha = 1.0);

// Stationary distribution of a row-stochastic matrix by damped power
// iteration from uniform (residual below 1e-12).
Eigen::VectorXd hmm_steady_state(const Eigen::MatrixXd& A);

// One transition step of the forward filter: belief^T A, renormalized.
Eigen::VectorXd hmm_predict(const Eigen::VectorXd& belief, const Eigen::MatrixXd& A);

// Bayes correction by one observation symbol: belief .* B[:, obs], normalized.
Eigen::VectorXd hmm_correct(const Eigen::VectorXd& belief, int obs,
                            const Eigen::MatrixXd& B);

// Incremental most-probable-path decoder; feed one observation at a time.
class ViterbiTracker {
 public:
  explicit ViterbiTracker(const HmmModel& model);
  void advance(int obs);
  int steps() const { return steps_; }
  int current_state() const;          // ContractError before the first advance
  Position current_position() const;  // center of the current state's cell
  std::vector<int> best_path() const;

 private:
  const HmmModel* model_;
  Eigen::MatrixXd log_a_;
  Eigen::MatrixXd log_b_;
  Eigen::VectorXd log_delta_;
  std::vector<std::vector<int>> backpointers_;
  int steps_ = 0;
};

struct HmmTrackResult {
  std::vector<int> path;
  Position final_pos;
};

// Viterbi decoding of a full observation sequence; the final state's cell
// center is the location estimate.
HmmTrackResult hmm_track(const HmmModel& model, const ObservationSequence& seq);

// Versioned JSON stores.
std::string to_json_string(const FingerprintDb& db);
FingerprintDb fingerprint_db_from_json_string(const std::string& text);
void save_fingerprint_db(const FingerprintDb& db, const std::string& path);
FingerprintDb load_fingerprint_db(const std::string& path);

std::string to_json_string(const GridHistogramDb& db);
GridHistogramDb cellsense_db_from_json_string(const std::string& text);
void save_cellsense_db(const GridHistogramDb& db, const std::string& path);
GridHistogramDb load_cellsense_db(const std::string& path);

std::string to_json_string(const HmmModel& model);
HmmModel hmm_from_json_string(const std::string& text);
void save_hmm(const HmmModel& model, const std::string& path);
HmmModel load_hmm(const std::string& path);

}  // namespace wsnloc::fingerprint
