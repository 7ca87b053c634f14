#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pdsr/federation.hpp"
#include "pdsr/graph.hpp"
#include "pdsr/recommend.hpp"

namespace pdsr {

// A full user x service QoS matrix before federation. 0 = never invoked;
// observed values are strictly positive after normalization.
struct RawDataset {
  size_t user_count = 0;
  size_t service_count = 0;
  std::vector<double> values;  // row-major user_count x service_count

  double at(size_t user, size_t service) const {
    return values[user * service_count + service];
  }
  double& at(size_t user, size_t service) {
    return values[user * service_count + service];
  }
  size_t observed_count() const;
};

// Whitespace-separated dense matrix, one user per line; negative entries
// (the convention for failed invocations) become missing.
RawDataset load_wsdream(const std::string& path);

// "UserID::MovieID::Rating::Timestamp" lines with 1-based ids; matrix size
// is taken from the largest ids seen.
RawDataset load_movielens(const std::string& path);

enum class NormalizeMode {
  none,             // keep raw values (rating-style data)
  minmax,           // (v - min) / (max - min), higher is better
  inverted_minmax,  // (max - v) / (max - min), for cost-like metrics
};

NormalizeMode parse_normalize_mode(const std::string& name);
std::string normalize_mode_name(NormalizeMode mode);

// Rescales observed entries to (0, 1] over the dataset-wide observed min/max;
// missing entries stay 0. Results are floored at eps = 1e-6 so an observed
// entry can never collide with the missing marker. If every observed value is
// equal, they all map to 1.
void normalize(RawDataset& data, NormalizeMode mode);

struct SplitSpec {
  std::vector<size_t> platform_user_counts;
  size_t holdout_per_user = 15;     // S: observed entries withheld per target
  size_t targets_per_platform = 15;
  size_t min_records = 0;           // users below this are dropped entirely
  uint64_t seed = 0;
};

struct HoldoutEntry {
  uint32_t user_id = 0;
  uint32_t service_id = 0;
  double truth = 0.0;
};

struct PlatformSplit {
  PlatformDataset train;  // holdout entries zeroed out
  PlatformDataset truth;  // the platform's slice before withholding
  std::vector<uint32_t> target_users;
  std::vector<std::vector<HoldoutEntry>> holdout;  // parallel to target_users
};

// Seeded disjoint assignment of the retained users to platforms: the split
// protocol's partition stage without any withholding. Users with fewer than
// min_records observed services are dropped first; the counts must sum to
// exactly the retained population.
std::vector<PlatformDataset> assign_platforms(const RawDataset& raw,
                                              std::span<const size_t> counts,
                                              size_t min_records, uint64_t seed);

// Seeded partition of the users into disjoint platforms, plus per-platform
// target users with S observed entries withheld from their training columns.
// Users with fewer than min_records observed services are dropped before the
// (shuffled) assignment; targets are drawn from users that can donate S
// entries and still keep at least one training record. The platform user
// counts must sum to exactly the retained population, so the partition is
// exhaustive and disjoint.
std::vector<PlatformSplit> split_platforms(const RawDataset& raw,
                                           const SplitSpec& spec);

// Mean absolute / squared-root error over prediction-truth pairs.
double mae(std::span<const double> predicted, std::span<const double> truth);
double rmse(std::span<const double> predicted, std::span<const double> truth);

struct AqosResult {
  double value = 0.0;     // mean ground-truth QoS of recommended services
  double coverage = 0.0;  // fraction of recommendations with known truth
};

// Ground-truth quality of recommendation lists: the mean true value of every
// recommended service, with never-invoked (unknown) entries counting as 0.
// `lists` is parallel to `target_users`.
AqosResult aqos(const PlatformDataset& truth,
                std::span<const uint32_t> target_users,
                const std::vector<std::vector<uint32_t>>& lists);

// Intra-list diversity: per list, the mean Jaccard dissimilarity between the
// ground-truth vectors of every ordered pair of recommended services; then
// the mean over lists. Lists with fewer than two entries are skipped.
double ild(const PlatformDataset& truth,
           const std::vector<std::vector<uint32_t>>& lists);

struct PipelineConfig {
  // wsdream | movielens (file loaders), or
  // synthetic-wsdream | synthetic-movielens (seeded stand-in generators).
  std::string dataset = "synthetic-wsdream";
  std::string data_path;
  uint64_t data_seed = 1;

  NormalizeMode normalize_mode = NormalizeMode::inverted_minmax;
  std::vector<size_t> platform_user_counts = {135, 204};
  size_t holdout_per_user = 15;
  size_t targets_per_platform = 15;
  size_t min_records = 0;

  std::vector<size_t> hash_counts = {3, 3};  // per platform
  uint32_t t_rounds = 9;
  double lambda = 0.1;
  double xi = 0.3;
  size_t k = 5;

  size_t repetitions = 50;
  uint64_t seed = 42;
  uint32_t platform_filter = 0;  // 0 = report all platforms, else one 1-based id
  bool timing = true;            // off => the seconds column is written as 0

  void validate() const;  // throws ConfigError
};

// Loads the configured dataset (file-backed or generated), unnormalized.
RawDataset load_dataset(const PipelineConfig& config);

// Stage seeds of repetition `rep`, derived from the master seed. The pipeline
// uses these internally; standalone consumers that want to reproduce a
// repetition's split or graph use the same derivations.
uint64_t split_seed(uint64_t master, size_t rep);
uint64_t graph_seed(uint64_t master, size_t rep);

struct PlatformMetrics {
  uint32_t platform_id = 0;
  size_t hash_count = 0;
  double mae = 0.0;
  double rmse = 0.0;
  double aqos = 0.0;
  double ild = 0.0;
  double coverage = 0.0;
  double seconds = 0.0;
};

struct EvalReport {
  PipelineConfig config;
  std::vector<PlatformMetrics> means;              // averaged over repetitions
  std::vector<std::vector<PlatformMetrics>> reps;  // [repetition][platform]
  std::vector<std::vector<uint32_t>> first_rep_targets;  // per platform
  size_t audited_messages = 0;
  bool privacy_ok = false;
};

// The full protocol, `repetitions` times: split -> federated indexing ->
// similarity graph -> per-target prediction + greedy selection -> metrics.
// Every wire message crossing the simulated platform boundary is run through
// the privacy audit. Results are averaged over repetitions; rows are limited
// to `platform_filter` when set.
EvalReport run_pipeline(const PipelineConfig& config);

struct SweepAxes {
  std::vector<size_t> hash_counts = {3};
  std::vector<uint32_t> t_rounds = {9};
  std::vector<double> lambdas = {0.1};
  std::vector<double> xis = {0.3};
};

struct SweepCell {
  size_t hash_count = 0;
  uint32_t t_rounds = 0;
  double lambda = 0.0;
  double xi = 0.0;
  EvalReport report;
  std::string error;  // nonempty when the cell's pipeline run failed
  bool failed() const { return !error.empty(); }
};

// Cartesian product of the axes; each cell reruns the pipeline with the
// cell's scalar hash count broadcast to every platform. A failing cell does
// not abort the sweep: its error text is recorded and the remaining cells
// still run.
std::vector<SweepCell> run_sweep(const PipelineConfig& base, const SweepAxes& axes);

// "platform,H,T,lambda,xi,K,mae,rmse,aqos,ild,coverage,seconds" rows, one per
// reported platform (and per sweep cell), fixed decimal formatting. A failed
// sweep cell contributes a single marker row: platform 0 with nan metrics.
void write_metrics_csv(std::ostream& out, const EvalReport& report);
void write_sweep_csv(std::ostream& out, std::span<const SweepCell> cells);

}  // namespace pdsr
