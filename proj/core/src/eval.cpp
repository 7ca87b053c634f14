#include "pdsr/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "pdsr/errors.hpp"
#include "pdsr/rng.hpp"
#include "pdsr/synthetic.hpp"

namespace pdsr {

namespace {

// Seed-derivation tags for the independent random decisions of a repetition.
constexpr uint64_t kAssignTag = 0xA551;
constexpr uint64_t kTargetTag = 0x7A86;
constexpr uint64_t kHoldoutTag = 0x1D07;
constexpr uint64_t kSplitTag = 0x5B11;
constexpr uint64_t kGraphTag = 0x66AF;

double elapsed_seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since)
      .count();
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string compact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

void write_metric_row(std::ostream& out, const PipelineConfig& config,
                      uint32_t t_rounds, const PlatformMetrics& m) {
  out << m.platform_id << ',' << m.hash_count << ',' << t_rounds << ','
      << compact(config.lambda) << ',' << compact(config.xi) << ',' << config.k
      << ',' << fixed(m.mae, 6) << ',' << fixed(m.rmse, 6) << ','
      << fixed(m.aqos, 6) << ',' << fixed(m.ild, 6) << ','
      << fixed(m.coverage, 6) << ',' << fixed(m.seconds, 4) << '\n';
}

constexpr char kCsvHeader[] =
    "platform,H,T,lambda,xi,K,mae,rmse,aqos,ild,coverage,seconds";

}  // namespace

size_t RawDataset::observed_count() const {
  size_t n = 0;
  for (double v : values) n += v != 0.0;
  return n;
}

RawDataset load_wsdream(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset file '" + path + "'");
  RawDataset data;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream row(line);
    size_t columns = 0;
    double v;
    while (row >> v) {
      if (!std::isfinite(v)) {
        throw DataError(path + ":" + std::to_string(line_no) +
                        ": non-finite entry");
      }
      // Negative marks a failed/unmeasured invocation: missing.
      data.values.push_back(v < 0.0 ? 0.0 : v);
      ++columns;
    }
    if (!row.eof()) {
      throw DataError(path + ":" + std::to_string(line_no) + ": unparsable entry");
    }
    if (data.service_count == 0) {
      data.service_count = columns;
    } else if (columns != data.service_count) {
      throw DataError(path + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(data.service_count) + " columns, got " +
                      std::to_string(columns));
    }
    ++data.user_count;
  }
  if (data.user_count == 0) throw DataError(path + ": empty dataset");
  return data;
}

RawDataset load_movielens(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset file '" + path + "'");
  struct Rating {
    uint32_t user, movie;
    double value;
  };
  std::vector<Rating> ratings;
  uint32_t max_user = 0, max_movie = 0;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    // UserID::MovieID::Rating::Timestamp
    uint32_t fields[3];
    size_t pos = 0;
    bool ok = true;
    for (int f = 0; f < 3; ++f) {
      const size_t next = line.find("::", pos);
      if (next == std::string::npos) {
        ok = false;
        break;
      }
      try {
        fields[f] = static_cast<uint32_t>(std::stoul(line.substr(pos, next - pos)));
      } catch (const std::exception&) {
        ok = false;
        break;
      }
      pos = next + 2;
    }
    if (!ok || pos >= line.size()) {
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": expected UserID::MovieID::Rating::Timestamp");
    }
    if (fields[0] == 0 || fields[1] == 0) {
      throw DataError(path + ":" + std::to_string(line_no) + ": ids are 1-based");
    }
    ratings.push_back({fields[0], fields[1], static_cast<double>(fields[2])});
    max_user = std::max(max_user, fields[0]);
    max_movie = std::max(max_movie, fields[1]);
  }
  if (ratings.empty()) throw DataError(path + ": empty dataset");
  RawDataset data;
  data.user_count = max_user;
  data.service_count = max_movie;
  data.values.assign(static_cast<size_t>(max_user) * max_movie, 0.0);
  for (const Rating& r : ratings) data.at(r.user - 1, r.movie - 1) = r.value;
  return data;
}

NormalizeMode parse_normalize_mode(const std::string& name) {
  if (name == "none") return NormalizeMode::none;
  if (name == "minmax") return NormalizeMode::minmax;
  if (name == "inverted-minmax") return NormalizeMode::inverted_minmax;
  throw ConfigError("unknown normalize mode '" + name +
                    "' (none | minmax | inverted-minmax)");
}

std::string normalize_mode_name(NormalizeMode mode) {
  switch (mode) {
    case NormalizeMode::none: return "none";
    case NormalizeMode::minmax: return "minmax";
    case NormalizeMode::inverted_minmax: return "inverted-minmax";
  }
  return "?";
}

void normalize(RawDataset& data, NormalizeMode mode) {
  if (mode == NormalizeMode::none) return;
  constexpr double kEps = 1e-6;  // keeps observed entries off the missing marker
  double lo = 0.0, hi = 0.0;
  bool seen = false;
  for (double v : data.values) {
    if (v == 0.0) continue;
    if (!seen) {
      lo = hi = v;
      seen = true;
    } else {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!seen) return;  // nothing observed, nothing to scale
  for (double& v : data.values) {
    if (v == 0.0) continue;
    if (hi == lo) {
      v = 1.0;
      continue;
    }
    const double scaled = mode == NormalizeMode::minmax ? (v - lo) / (hi - lo)
                                                        : (hi - v) / (hi - lo);
    v = std::max(scaled, kEps);
  }
}

std::vector<PlatformDataset> assign_platforms(const RawDataset& raw,
                                              std::span<const size_t> counts,
                                              size_t min_records, uint64_t seed) {
  if (counts.empty()) {
    throw std::invalid_argument("split: no platform user counts given");
  }
  for (size_t n : counts) {
    if (n == 0) throw std::invalid_argument("split: platform user count of zero");
  }

  std::vector<uint32_t> retained;
  for (size_t j = 0; j < raw.user_count; ++j) {
    size_t observed = 0;
    for (size_t i = 0; i < raw.service_count; ++i) {
      observed += raw.at(j, i) != 0.0;
    }
    if (observed >= min_records) retained.push_back(static_cast<uint32_t>(j));
  }
  const size_t wanted = std::accumulate(counts.begin(), counts.end(), size_t{0});
  if (wanted != retained.size()) {
    throw std::invalid_argument(
        "split: platform counts sum to " + std::to_string(wanted) + " but " +
        std::to_string(retained.size()) + " users remain after the min_records filter");
  }

  Rng assigner(derive_seed(seed, kAssignTag));
  assigner.shuffle(retained);

  std::vector<PlatformDataset> platforms;
  size_t cursor = 0;
  for (size_t r = 0; r < counts.size(); ++r) {
    std::vector<uint32_t> members(retained.begin() + cursor,
                                  retained.begin() + cursor + counts[r]);
    cursor += counts[r];
    std::sort(members.begin(), members.end());

    PlatformDataset platform;
    platform.platform_id = static_cast<uint32_t>(r + 1);
    platform.user_ids = std::move(members);
    platform.service_count = static_cast<uint32_t>(raw.service_count);
    platform.qos.resize(raw.service_count * platform.user_ids.size());
    for (uint32_t s = 0; s < platform.service_count; ++s) {
      for (size_t c = 0; c < platform.user_ids.size(); ++c) {
        platform.at(s, c) = raw.at(platform.user_ids[c], s);
      }
    }
    platforms.push_back(std::move(platform));
  }
  return platforms;
}

std::vector<PlatformSplit> split_platforms(const RawDataset& raw,
                                           const SplitSpec& spec) {
  if (spec.holdout_per_user == 0) {
    throw std::invalid_argument("split: holdout size S must be >= 1");
  }
  if (spec.targets_per_platform == 0) {
    throw std::invalid_argument("split: targets per platform must be >= 1");
  }
  std::vector<PlatformDataset> truths = assign_platforms(
      raw, spec.platform_user_counts, spec.min_records, spec.seed);

  std::vector<PlatformSplit> splits;
  for (size_t r = 0; r < truths.size(); ++r) {
    PlatformSplit split;
    split.truth = std::move(truths[r]);
    const PlatformDataset& truth = split.truth;
    const std::vector<uint32_t>& members = truth.user_ids;

    // Targets must be able to donate S entries and still keep one record.
    const size_t eligible_floor =
        std::max(spec.min_records, spec.holdout_per_user + 1);
    std::vector<uint32_t> eligible;
    for (size_t c = 0; c < members.size(); ++c) {
      size_t observed = 0;
      for (uint32_t s = 0; s < truth.service_count; ++s) {
        observed += truth.at(s, c) != 0.0;
      }
      if (observed >= eligible_floor) eligible.push_back(members[c]);
    }
    if (eligible.size() < spec.targets_per_platform) {
      throw std::invalid_argument(
          "split: platform " + std::to_string(r + 1) + " has only " +
          std::to_string(eligible.size()) + " users eligible as targets, need " +
          std::to_string(spec.targets_per_platform));
    }
    Rng target_rng(derive_seed(spec.seed, kTargetTag, r));
    for (uint32_t pick : target_rng.sample_without_replacement(
             static_cast<uint32_t>(eligible.size()),
             static_cast<uint32_t>(spec.targets_per_platform))) {
      split.target_users.push_back(eligible[pick]);
    }
    std::sort(split.target_users.begin(), split.target_users.end());

    split.train = truth;
    for (uint32_t user : split.target_users) {
      const size_t col = *split.train.user_column(user);
      std::vector<uint32_t> invoked;
      for (uint32_t s = 0; s < truth.service_count; ++s) {
        if (truth.at(s, col) != 0.0) invoked.push_back(s);
      }
      Rng holdout_rng(derive_seed(spec.seed, kHoldoutTag, user));
      std::vector<HoldoutEntry> entries;
      for (uint32_t pick : holdout_rng.sample_without_replacement(
               static_cast<uint32_t>(invoked.size()),
               static_cast<uint32_t>(spec.holdout_per_user))) {
        const uint32_t service = invoked[pick];
        entries.push_back({user, service, truth.at(service, col)});
        split.train.at(service, col) = 0.0;
      }
      std::sort(entries.begin(), entries.end(),
                [](const HoldoutEntry& a, const HoldoutEntry& b) {
                  return a.service_id < b.service_id;
                });
      split.holdout.push_back(std::move(entries));
    }
    splits.push_back(std::move(split));
  }
  return splits;
}

double mae(std::span<const double> predicted, std::span<const double> truth) {
  if (predicted.size() != truth.size() || predicted.empty()) {
    throw std::invalid_argument("mae: need equal, nonzero-length inputs");
  }
  double sum = 0.0;
  for (size_t i = 0; i < predicted.size(); ++i) {
    sum += std::abs(predicted[i] - truth[i]);
  }
  return sum / static_cast<double>(predicted.size());
}

double rmse(std::span<const double> predicted, std::span<const double> truth) {
  if (predicted.size() != truth.size() || predicted.empty()) {
    throw std::invalid_argument("rmse: need equal, nonzero-length inputs");
  }
  double sum = 0.0;
  for (size_t i = 0; i < predicted.size(); ++i) {
    const double d = predicted[i] - truth[i];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(predicted.size()));
}

AqosResult aqos(const PlatformDataset& truth,
                std::span<const uint32_t> target_users,
                const std::vector<std::vector<uint32_t>>& lists) {
  if (lists.size() != target_users.size()) {
    throw std::invalid_argument("aqos: one list per target user required");
  }
  size_t entries = 0, known = 0;
  double sum = 0.0;
  for (size_t u = 0; u < lists.size(); ++u) {
    const auto col = truth.user_column(target_users[u]);
    if (!col) {
      throw std::invalid_argument("aqos: user " + std::to_string(target_users[u]) +
                                  " is not on this platform");
    }
    for (uint32_t service : lists[u]) {
      const double v = truth.at(service, *col);  // 0 when never invoked
      sum += v;
      known += v != 0.0;
      ++entries;
    }
  }
  if (entries == 0) throw std::invalid_argument("aqos: no recommendations");
  return {sum / static_cast<double>(entries),
          static_cast<double>(known) / static_cast<double>(entries)};
}

double ild(const PlatformDataset& truth,
           const std::vector<std::vector<uint32_t>>& lists) {
  double sum = 0.0;
  size_t counted = 0;
  for (const auto& list : lists) {
    if (list.size() < 2) continue;  // no pairs to compare
    double pair_sum = 0.0;
    for (size_t a = 0; a < list.size(); ++a) {
      for (size_t b = 0; b < list.size(); ++b) {
        if (a == b) continue;
        pair_sum += jaccard_dissimilarity(truth.service_row(list[a]),
                                          truth.service_row(list[b]));
      }
    }
    sum += pair_sum /
           (static_cast<double>(list.size()) * static_cast<double>(list.size() - 1));
    ++counted;
  }
  if (counted == 0) {
    throw std::invalid_argument("ild: needs at least one list of length >= 2");
  }
  return sum / static_cast<double>(counted);
}

void PipelineConfig::validate() const {
  const bool synthetic =
      dataset == "synthetic-wsdream" || dataset == "synthetic-movielens";
  if (!synthetic && dataset != "wsdream" && dataset != "movielens") {
    throw ConfigError("unknown dataset '" + dataset +
                      "' (wsdream | movielens | synthetic-wsdream | "
                      "synthetic-movielens)");
  }
  if (!synthetic && data_path.empty()) {
    throw ConfigError("dataset '" + dataset + "' requires data_path");
  }
  if (platform_user_counts.empty()) {
    throw ConfigError("platform_user_counts must name at least one platform");
  }
  if (hash_counts.size() != 1 && hash_counts.size() != platform_user_counts.size()) {
    throw ConfigError("H must be a single value or one per platform");
  }
  for (size_t h : hash_counts) {
    if (h == 0 || h > 64) throw ConfigError("H values must be in 1..64");
  }
  if (k < 2) throw ConfigError("K must be >= 2 (intra-list diversity needs pairs)");
  if (lambda < 0.0 || xi < 0.0) throw ConfigError("lambda and xi must be >= 0");
  if (repetitions == 0) throw ConfigError("repetitions must be >= 1");
  if (holdout_per_user == 0) throw ConfigError("holdout S must be >= 1");
  if (targets_per_platform == 0) throw ConfigError("targets must be >= 1");
  if (platform_filter > platform_user_counts.size()) {
    throw ConfigError("platform filter out of range");
  }
  if (min_records > 0 && min_records < holdout_per_user + k) {
    throw ConfigError("min_records must be >= S + K so train and test stay nonempty");
  }
}

RawDataset load_dataset(const PipelineConfig& config) {
  if (config.dataset == "wsdream") return load_wsdream(config.data_path);
  if (config.dataset == "movielens") return load_movielens(config.data_path);
  if (config.dataset == "synthetic-wsdream") {
    return generate_wsdream_like(config.data_seed);
  }
  if (config.dataset == "synthetic-movielens") {
    return generate_movielens_like(config.data_seed);
  }
  throw ConfigError("unknown dataset '" + config.dataset + "'");
}

uint64_t split_seed(uint64_t master, size_t rep) {
  return derive_seed(master, kSplitTag, rep);
}

uint64_t graph_seed(uint64_t master, size_t rep) {
  return derive_seed(master, kGraphTag, rep);
}

namespace {

std::vector<size_t> broadcast_hash_counts(const PipelineConfig& config) {
  if (config.hash_counts.size() == config.platform_user_counts.size()) {
    return config.hash_counts;
  }
  return std::vector<size_t>(config.platform_user_counts.size(),
                             config.hash_counts.front());
}

}  // namespace

EvalReport run_pipeline(const PipelineConfig& config) {
  config.validate();
  RawDataset raw = load_dataset(config);
  normalize(raw, config.normalize_mode);

  const size_t platform_count = config.platform_user_counts.size();
  const std::vector<size_t> hash_counts = broadcast_hash_counts(config);

  EvalReport report;
  report.config = config;
  report.privacy_ok = true;

  for (size_t rep = 0; rep < config.repetitions; ++rep) {
    SplitSpec spec;
    spec.platform_user_counts = config.platform_user_counts;
    spec.holdout_per_user = config.holdout_per_user;
    spec.targets_per_platform = config.targets_per_platform;
    spec.min_records = config.min_records;
    spec.seed = split_seed(config.seed, rep);
    std::vector<PlatformSplit> splits = split_platforms(raw, spec);

    // The graph stage must only ever see the withheld-zeroed matrices.
    std::vector<PlatformDataset> train;
    train.reserve(platform_count);
    for (PlatformSplit& split : splits) train.push_back(std::move(split.train));

    const auto graph_started = std::chrono::steady_clock::now();
    GraphBuild build = build_graph_traced(train, hash_counts, config.t_rounds,
                                          graph_seed(config.seed, rep));
    const double graph_seconds = elapsed_seconds(graph_started);

    for (const auto& round : build.transcript) {
      for (const auto& message : round) {
        ++report.audited_messages;
        if (!audit_privacy(message).passed) report.privacy_ok = false;
      }
    }

    std::vector<PlatformMetrics> row;
    for (size_t r = 0; r < platform_count; ++r) {
      if (config.platform_filter != 0 && config.platform_filter != r + 1) continue;
      const PlatformSplit& split = splits[r];
      const auto started = std::chrono::steady_clock::now();

      std::vector<double> predictions, truths;
      std::vector<std::vector<uint32_t>> lists;
      for (size_t t = 0; t < split.target_users.size(); ++t) {
        const uint32_t user = split.target_users[t];
        const CandidatePool pool = CandidatePool::build(build.graph, train[r], user);
        for (const HoldoutEntry& entry : split.holdout[t]) {
          const auto idx = pool.index_of(entry.service_id);
          if (!idx) {
            throw std::logic_error("withheld service missing from candidate pool");
          }
          predictions.push_back(pool.predicted(*idx));
          truths.push_back(entry.truth);
        }
        lists.push_back(
            greedy_topk(build.graph, pool, config.k, config.lambda, config.xi)
                .services);
      }

      PlatformMetrics metrics;
      metrics.platform_id = static_cast<uint32_t>(r + 1);
      metrics.hash_count = hash_counts[r];
      metrics.mae = mae(predictions, truths);
      metrics.rmse = rmse(predictions, truths);
      const AqosResult a = aqos(split.truth, split.target_users, lists);
      metrics.aqos = a.value;
      metrics.coverage = a.coverage;
      metrics.ild = ild(split.truth, lists);
      metrics.seconds =
          elapsed_seconds(started) + graph_seconds / static_cast<double>(platform_count);
      row.push_back(metrics);

      if (rep == 0) report.first_rep_targets.push_back(split.target_users);
    }
    report.reps.push_back(std::move(row));
  }

  // Averages across repetitions; the per-platform layout is identical in
  // every repetition by construction.
  report.means = report.reps.front();
  const double n = static_cast<double>(report.reps.size());
  for (size_t p = 0; p < report.means.size(); ++p) {
    PlatformMetrics sum = report.reps.front()[p];
    sum.mae = sum.rmse = sum.aqos = sum.ild = sum.coverage = sum.seconds = 0.0;
    for (const auto& row : report.reps) {
      sum.mae += row[p].mae;
      sum.rmse += row[p].rmse;
      sum.aqos += row[p].aqos;
      sum.ild += row[p].ild;
      sum.coverage += row[p].coverage;
      sum.seconds += row[p].seconds;
    }
    sum.mae /= n;
    sum.rmse /= n;
    sum.aqos /= n;
    sum.ild /= n;
    sum.coverage /= n;
    sum.seconds /= n;
    report.means[p] = sum;
  }

  if (!config.timing) {
    for (auto& row : report.reps) {
      for (auto& m : row) m.seconds = 0.0;
    }
    for (auto& m : report.means) m.seconds = 0.0;
  }
  return report;
}

std::vector<SweepCell> run_sweep(const PipelineConfig& base, const SweepAxes& axes) {
  std::vector<SweepCell> cells;
  for (size_t h : axes.hash_counts) {
    for (uint32_t t : axes.t_rounds) {
      for (double lambda : axes.lambdas) {
        for (double xi : axes.xis) {
          SweepCell cell;
          cell.hash_count = h;
          cell.t_rounds = t;
          cell.lambda = lambda;
          cell.xi = xi;
          PipelineConfig config = base;
          config.hash_counts.assign(base.platform_user_counts.size(), h);
          config.t_rounds = t;
          config.lambda = lambda;
          config.xi = xi;
          try {
            cell.report = run_pipeline(config);
          } catch (const std::exception& e) {
            cell.error = e.what();
            cell.report = EvalReport{};
            cell.report.config = config;
          }
          cells.push_back(std::move(cell));
        }
      }
    }
  }
  return cells;
}

void write_metrics_csv(std::ostream& out, const EvalReport& report) {
  out << kCsvHeader << '\n';
  for (const PlatformMetrics& m : report.means) {
    write_metric_row(out, report.config, report.config.t_rounds, m);
  }
}

void write_sweep_csv(std::ostream& out, std::span<const SweepCell> cells) {
  out << kCsvHeader << '\n';
  for (const SweepCell& cell : cells) {
    if (cell.failed()) {
      // Marker row: platform 0 never occurs in real output (ids are 1-based).
      PlatformMetrics failed;
      failed.platform_id = 0;
      failed.hash_count = cell.hash_count;
      failed.mae = failed.rmse = failed.aqos = failed.ild = failed.coverage =
          std::numeric_limits<double>::quiet_NaN();
      write_metric_row(out, cell.report.config, cell.t_rounds, failed);
      continue;
    }
    for (const PlatformMetrics& m : cell.report.means) {
      write_metric_row(out, cell.report.config, cell.t_rounds, m);
    }
  }
}

}  // namespace pdsr
