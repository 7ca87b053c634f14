#include <algorithm>
#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pdsr/config.hpp"
#include "pdsr/errors.hpp"
#include "pdsr/eval.hpp"
#include "pdsr/federation.hpp"
#include "pdsr/graph.hpp"
#include "pdsr/recommend.hpp"
#include "pdsr/rng.hpp"

namespace {

using nlohmann::ordered_json;

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

pdsr::ConfigView make_view(const std::string& config_path,
                           const std::vector<std::string>& overrides) {
  std::map<std::string, std::string> values;
  if (!config_path.empty()) values = pdsr::parse_config_file(config_path);
  for (const auto& assignment : overrides) {
    pdsr::apply_override(values, assignment);
  }
  return pdsr::ConfigView(std::move(values));
}

// Reads every run key, so that a later unread-keys scan flags only real
// typos. With `axes` set, H/T/lambda/xi may be comma lists forming the sweep
// grid; otherwise T, lambda and xi must be scalars.
pdsr::PipelineConfig read_run_config(const pdsr::ConfigView& view,
                                     pdsr::SweepAxes* axes) {
  pdsr::PipelineConfig cfg;
  cfg.dataset = view.get_string("dataset", cfg.dataset);
  cfg.data_path = view.get_string("data_path", cfg.data_path);
  cfg.data_seed = view.get_uint("data_seed", cfg.data_seed);
  cfg.normalize_mode = pdsr::parse_normalize_mode(
      view.get_string("normalize", pdsr::normalize_mode_name(cfg.normalize_mode)));

  const auto to_sizes = [](const std::vector<uint64_t>& v) {
    return std::vector<size_t>(v.begin(), v.end());
  };
  cfg.platform_user_counts = to_sizes(view.get_uint_list("platforms", {135, 204}));
  cfg.holdout_per_user = view.get_uint("holdout", cfg.holdout_per_user);
  cfg.targets_per_platform = view.get_uint("targets", cfg.targets_per_platform);
  cfg.min_records = view.get_uint("min_records", cfg.min_records);

  const auto h = to_sizes(view.get_uint_list("H", {3}));
  const auto t = view.get_uint_list("T", {9});
  const auto lambdas = view.get_double_list("lambda", {0.1});
  const auto xis = view.get_double_list("xi", {0.3});
  if (axes == nullptr) {
    const auto single = [](const char* key, size_t n) {
      if (n != 1) {
        throw pdsr::ConfigError(std::string(key) +
                                " takes one value here; lists are for sweep");
      }
    };
    single("T", t.size());
    single("lambda", lambdas.size());
    single("xi", xis.size());
    cfg.hash_counts = h;
  } else {
    axes->hash_counts = h;
    axes->t_rounds.assign(t.begin(), t.end());
    axes->lambdas = lambdas;
    axes->xis = xis;
    cfg.hash_counts = {h.front()};
  }
  cfg.t_rounds = static_cast<uint32_t>(t.front());
  cfg.lambda = lambdas.front();
  cfg.xi = xis.front();

  cfg.k = view.get_uint("K", cfg.k);
  cfg.repetitions = view.get_uint("repetitions", cfg.repetitions);
  cfg.seed = view.get_uint("seed", cfg.seed);
  cfg.platform_filter = static_cast<uint32_t>(view.get_uint("platform_filter", 0));
  cfg.timing = view.get_bool("timing", cfg.timing);
  return cfg;
}

void reject_unread(const pdsr::ConfigView& view) {
  const auto unread = view.unread_keys();
  if (unread.empty()) return;
  std::string message = "unknown config key(s):";
  for (const auto& key : unread) message += " '" + key + "'";
  throw pdsr::ConfigError(message);
}

void write_artifact(const std::string& out_dir, const std::string& name,
                    const std::string& content) {
  if (out_dir.empty()) return;
  std::filesystem::create_directories(out_dir);
  std::ofstream file(std::filesystem::path(out_dir) / name, std::ios::binary);
  if (!file) {
    throw pdsr::DataError("cannot write '" + name + "' under '" + out_dir + "'");
  }
  file << content;
}

std::vector<size_t> per_platform_hashes(const pdsr::PipelineConfig& cfg) {
  if (cfg.hash_counts.size() == cfg.platform_user_counts.size()) {
    return cfg.hash_counts;
  }
  if (cfg.hash_counts.size() == 1) {
    return std::vector<size_t>(cfg.platform_user_counts.size(),
                               cfg.hash_counts.front());
  }
  throw pdsr::ConfigError("H must be a single value or one per platform");
}

// The load -> normalize -> assign stage shared by the standalone commands;
// matches repetition 0 of the evaluation pipeline.
std::vector<pdsr::PlatformDataset> federated_platforms(
    const pdsr::PipelineConfig& cfg) {
  pdsr::RawDataset raw = pdsr::load_dataset(cfg);
  pdsr::normalize(raw, cfg.normalize_mode);
  return pdsr::assign_platforms(raw, cfg.platform_user_counts, cfg.min_records,
                                pdsr::split_seed(cfg.seed, 0));
}

int cmd_split(const pdsr::PipelineConfig& cfg, const std::string& out_dir) {
  const auto platforms = federated_platforms(cfg);
  std::vector<std::pair<uint32_t, uint32_t>> rows;  // user, platform
  for (const auto& platform : platforms) {
    for (uint32_t user : platform.user_ids) {
      rows.emplace_back(user, platform.platform_id);
    }
  }
  std::sort(rows.begin(), rows.end());
  std::ostringstream out;
  out << "# PDSR-split v1 platforms=" << platforms.size() << " seed=" << cfg.seed
      << '\n';
  for (const auto& [user, platform] : rows) {
    out << user << '\t' << platform << '\n';
  }
  std::fputs(out.str().c_str(), stdout);
  write_artifact(out_dir, "split.tsv", out.str());
  std::fprintf(stderr, "assigned %zu users to %zu platforms\n", rows.size(),
               platforms.size());
  return 0;
}

int cmd_graph(const pdsr::PipelineConfig& cfg, const std::string& out_dir) {
  const auto platforms = federated_platforms(cfg);
  const auto graph =
      pdsr::build_graph(platforms, per_platform_hashes(cfg), cfg.t_rounds,
                        pdsr::graph_seed(cfg.seed, 0));
  std::ostringstream out;
  pdsr::write_edge_tsv(out, graph);
  std::fputs(out.str().c_str(), stdout);
  write_artifact(out_dir, "graph.tsv", out.str());
  const double mean_degree =
      graph.vertex_count == 0
          ? 0.0
          : 2.0 * static_cast<double>(graph.edge_count()) / graph.vertex_count;
  std::fprintf(stderr, "vertices=%" PRIu32 " edges=%zu mean_degree=%.4f\n",
               graph.vertex_count, graph.edge_count(), mean_degree);
  return 0;
}

int cmd_recommend(const pdsr::PipelineConfig& cfg, const std::string& out_dir,
                  uint32_t user) {
  const auto platforms = federated_platforms(cfg);
  const pdsr::PlatformDataset* home = nullptr;
  for (const auto& platform : platforms) {
    if (platform.user_column(user)) {
      home = &platform;
      break;
    }
  }
  if (home == nullptr) {
    std::fprintf(stderr, "user %" PRIu32 " is not assigned to any platform\n",
                 user);
    return 4;
  }

  const auto hashes = per_platform_hashes(cfg);
  const auto graph = pdsr::build_graph(platforms, hashes, cfg.t_rounds,
                                       pdsr::graph_seed(cfg.seed, 0));
  const auto pool = pdsr::CandidatePool::build(graph, *home, user);
  const auto list = pdsr::greedy_topk(graph, pool, cfg.k, cfg.lambda, cfg.xi);

  std::ostringstream csv;
  csv << "rank,service_id,predicted_qos,F_prime,acc,alpha,beta\n";
  for (size_t i = 0; i < list.steps.size(); ++i) {
    const auto& step = list.steps[i];
    csv << (i + 1) << ',' << step.service_id << ',' << fixed(step.predicted, 6)
        << ',' << fixed(step.f_prime, 6) << ',' << fixed(step.acc, 6) << ','
        << fixed(step.alpha, 6) << ',' << fixed(step.beta, 6) << '\n';
  }
  std::fputs(csv.str().c_str(), stdout);
  write_artifact(out_dir, "recommendation.csv", csv.str());

  ordered_json summary;
  summary["dataset"] = cfg.dataset;
  summary["normalize"] = pdsr::normalize_mode_name(cfg.normalize_mode);
  summary["user"] = user;
  summary["platform"] = home->platform_id;
  summary["k"] = cfg.k;
  summary["lambda"] = cfg.lambda;
  summary["xi"] = cfg.xi;
  summary["hash_counts"] = hashes;
  summary["t_rounds"] = cfg.t_rounds;
  summary["seed"] = cfg.seed;
  summary["data_seed"] = cfg.data_seed;
  summary["truncated"] = list.truncated;
  summary["services"] = list.services;
  const std::string text = summary.dump(2) + "\n";
  if (out_dir.empty()) {
    std::fputs(text.c_str(), stderr);
  } else {
    write_artifact(out_dir, "recommendation.json", text);
  }
  return 0;
}

int cmd_evaluate(const pdsr::PipelineConfig& cfg, const std::string& out_dir) {
  const auto report = pdsr::run_pipeline(cfg);
  std::ostringstream csv;
  pdsr::write_metrics_csv(csv, report);
  std::fputs(csv.str().c_str(), stdout);
  write_artifact(out_dir, "metrics.csv", csv.str());
  std::fprintf(stderr, "audited %zu signature messages: privacy %s\n",
               report.audited_messages, report.privacy_ok ? "ok" : "VIOLATED");
  return report.privacy_ok ? 0 : 1;
}

int cmd_sweep(const pdsr::PipelineConfig& base, const pdsr::SweepAxes& axes,
              const std::string& out_dir) {
  const auto cells = pdsr::run_sweep(base, axes);
  std::ostringstream csv;
  pdsr::write_sweep_csv(csv, cells);
  std::fputs(csv.str().c_str(), stdout);
  write_artifact(out_dir, "sweep.csv", csv.str());
  size_t failed = 0;
  for (const auto& cell : cells) {
    if (!cell.failed()) continue;
    ++failed;
    std::fprintf(stderr,
                 "cell H=%zu T=%" PRIu32 " lambda=%g xi=%g failed: %s\n",
                 cell.hash_count, cell.t_rounds, cell.lambda, cell.xi,
                 cell.error.c_str());
  }
  std::fprintf(stderr, "%zu sweep cells, %zu failed\n", cells.size(), failed);
  return 0;
}

constexpr uint64_t kOracleTag = 0x0AC7E;

int cmd_oracle(const pdsr::PipelineConfig& cfg, const std::string& out_dir,
               size_t instances, size_t max_candidates, size_t max_k) {
  if (instances == 0) throw pdsr::ConfigError("--instances must be >= 1");
  if (max_candidates < 2) throw pdsr::ConfigError("--max-candidates must be >= 2");
  if (max_k == 0) throw pdsr::ConfigError("--max-k must be >= 1");

  const auto platforms = federated_platforms(cfg);
  const auto graph =
      pdsr::build_graph(platforms, per_platform_hashes(cfg), cfg.t_rounds,
                        pdsr::graph_seed(cfg.seed, 0));
  pdsr::Rng rng(pdsr::derive_seed(cfg.seed, kOracleTag));

  std::ostringstream csv;
  csv << "instance,user,candidates,K,lambda,xi,f_greedy,f_optimal,ratio\n";
  size_t violations = 0;
  double min_ratio = 1.0;
  for (size_t inst = 0; inst < instances; ++inst) {
    uint32_t user = 0;
    pdsr::CandidatePool pool;
    bool found = false;
    for (int attempt = 0; attempt < 64 && !found; ++attempt) {
      const auto& platform = platforms[rng.below(platforms.size())];
      user = platform.user_ids[rng.below(platform.user_ids.size())];
      pool = pdsr::CandidatePool::build(graph, platform, user);
      found = pool.size() >= 2;
    }
    if (!found) {
      throw pdsr::DataError("no user with at least two candidate services found");
    }

    const size_t nc = std::min(max_candidates, pool.size());
    std::vector<size_t> keep;
    for (uint32_t pick : rng.sample_without_replacement(
             static_cast<uint32_t>(pool.size()), static_cast<uint32_t>(nc))) {
      keep.push_back(pick);
    }
    const pdsr::CandidatePool sub = pool.restricted(keep);
    const size_t k = 1 + rng.below(std::min(max_k, nc));
    const double lambda = rng.uniform(0.0, 0.5);
    const double xi = rng.uniform(0.0, 0.5);

    const auto greedy = pdsr::greedy_topk(graph, sub, k, lambda, xi);
    const double f_greedy =
        pdsr::objective_value(graph, sub, greedy.services, lambda, xi);
    const auto oracle = pdsr::brute_force_topk(graph, sub, k, lambda, xi);
    const double ratio = oracle.f_value > 0.0 ? f_greedy / oracle.f_value : 1.0;
    min_ratio = std::min(min_ratio, ratio);
    if (ratio < 0.5 - 1e-9) {
      ++violations;
      std::fprintf(stderr, "instance %zu: ratio %.6f below 0.5\n", inst, ratio);
    }
    csv << inst << ',' << user << ',' << sub.size() << ',' << k << ','
        << fixed(lambda, 6) << ',' << fixed(xi, 6) << ',' << fixed(f_greedy, 6)
        << ',' << fixed(oracle.f_value, 6) << ',' << fixed(ratio, 6) << '\n';
  }
  std::fputs(csv.str().c_str(), stdout);
  write_artifact(out_dir, "oracle.csv", csv.str());
  std::fprintf(stderr, "instances=%zu min_ratio=%.6f violations=%zu\n",
               instances, min_ratio, violations);
  return violations == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "pdsr: LSH-federated service similarity and diversified top-K "
      "recommendation"};
  app.fallthrough();
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  uint64_t seed_flag = 0;
  std::string out_dir;
  unsigned threads = 0;
  app.add_option("--config", config_path, "flat key=value configuration file");
  app.add_option("--set", overrides, "override a config key (KEY=VALUE)");
  auto* seed_opt =
      app.add_option("--seed", seed_flag, "master seed (env fallback PDSR_SEED)")
          ->envname("PDSR_SEED");
  app.add_option("--out", out_dir, "directory to copy output artifacts into");
  app.add_option("--threads", threads,
                 "parallelism cap; this build runs jobs sequentially")
      ->check(CLI::PositiveNumber);

  auto* split_cmd =
      app.add_subcommand("split", "assign users to platforms, TSV to stdout");
  auto* graph_cmd = app.add_subcommand(
      "graph", "build the service-similarity graph, edge TSV to stdout");
  auto* recommend_cmd = app.add_subcommand(
      "recommend", "top-K services for one user, CSV to stdout");
  uint32_t user = 0;
  recommend_cmd->add_option("--user", user, "target user id")->required();
  uint64_t k_flag = 0;
  double lambda_flag = 0.0, xi_flag = 0.0;
  auto* k_opt = recommend_cmd->add_option("--k", k_flag, "list length");
  auto* lambda_opt =
      recommend_cmd->add_option("--lambda", lambda_flag, "diversity weight");
  auto* xi_opt =
      recommend_cmd->add_option("--xi", xi_flag, "pairwise diversity share");
  auto* evaluate_cmd = app.add_subcommand(
      "evaluate", "full withholding protocol, metrics CSV to stdout");
  auto* sweep_cmd = app.add_subcommand(
      "sweep", "grid over comma-list H/T/lambda/xi keys, CSV to stdout");
  auto* oracle_cmd = app.add_subcommand(
      "oracle", "greedy vs exhaustive objective on down-sampled pools");
  uint64_t instances = 200, max_candidates = 12, max_k = 4;
  oracle_cmd->add_option("--instances", instances, "instances to run");
  oracle_cmd->add_option("--max-candidates", max_candidates,
                         "candidate pool size cap per instance");
  oracle_cmd->add_option("--max-k", max_k, "largest K drawn per instance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const pdsr::ConfigView view = make_view(config_path, overrides);
    pdsr::SweepAxes axes;
    pdsr::PipelineConfig cfg =
        read_run_config(view, sweep_cmd->parsed() ? &axes : nullptr);
    reject_unread(view);
    if (seed_opt->count() > 0) cfg.seed = seed_flag;

    if (split_cmd->parsed()) return cmd_split(cfg, out_dir);
    if (graph_cmd->parsed()) return cmd_graph(cfg, out_dir);
    if (recommend_cmd->parsed()) {
      if (k_opt->count() > 0) cfg.k = k_flag;
      if (lambda_opt->count() > 0) cfg.lambda = lambda_flag;
      if (xi_opt->count() > 0) cfg.xi = xi_flag;
      return cmd_recommend(cfg, out_dir, user);
    }
    if (evaluate_cmd->parsed()) return cmd_evaluate(cfg, out_dir);
    if (sweep_cmd->parsed()) return cmd_sweep(cfg, axes, out_dir);
    if (oracle_cmd->parsed()) {
      return cmd_oracle(cfg, out_dir, instances, max_candidates, max_k);
    }
    std::fprintf(stderr, "no subcommand selected\n");
    return 2;
  } catch (const pdsr::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const pdsr::TooLargeError& e) {
    std::fprintf(stderr, "cap exceeded: %s\n", e.what());
    return 5;
  } catch (const pdsr::DecodeError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 3;
  } catch (const pdsr::EmptyCandidatesError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 3;
  } catch (const pdsr::DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 3;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
