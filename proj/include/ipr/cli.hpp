/*
 * Copyright 2026 The IPR Toolkit Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// The `ipr` command line: annotate, par, vote, sweep, simulate, report.
// Exit codes: 0 success, 1 domain error, 2 configuration or credential error.

#ifndef IPR_CLI_HPP_
#define IPR_CLI_HPP_

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ipr/annotation_matrix.hpp"
#include "ipr/corpus_io.hpp"
#include "ipr/error.hpp"
#include "ipr/fingerprint.hpp"
#include "ipr/heatmap.hpp"
#include "ipr/label_schema.hpp"
#include "ipr/metrics.hpp"
#include "ipr/report.hpp"
#include "ipr/runner.hpp"
#include "ipr/synthetic.hpp"
#include "ipr/text_util.hpp"
#include "ipr/voting.hpp"
#include "json.hpp"

namespace ipr {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitConfigError = 2;

namespace cli_detail {

inline std::string strip_extension(const std::string& path) {
  const auto slash = path.find_last_of('/');
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path;
  return path.substr(0, dot);
}

struct AnnotateOpts {
  std::string corpus, dataset, schema, out, cache;
  BackendConfig backend;
  std::optional<double> temperature;
  std::int64_t retry_backoff_ms = 500;
  std::optional<int> max_tokens;
};

inline int cmd_annotate(const AnnotateOpts& o, std::ostream& out, std::ostream& err) {
  const LabelSchema schema = load_schema(o.schema);
  const Corpus corpus = load_corpus(o.corpus);
  for (const auto& w : corpus.warnings) err << "warning: " << w << '\n';
  auto prompts = corpus.for_dataset(schema.name());
  if (prompts.empty()) {
    throw ConfigError("corpus has no prompts for dataset '" + schema.name() + "'");
  }
  const Dataset dataset = load_dataset(o.dataset, schema);

  BackendConfig cfg = o.backend;
  if (o.temperature) {
    cfg.temperature = *o.temperature;
    cfg.temperature_override = true;
  }
  cfg.retry_backoff = std::chrono::milliseconds(o.retry_backoff_ms);
  cfg.max_tokens = o.max_tokens;
  cfg.validate();
  const std::string key = cfg.resolve_api_key();

  HttpChatBackend backend(cfg.base_url, key, cfg.timeout_seconds);
  ResponseCache cache(o.cache.empty() ? strip_extension(o.out) + ".cache.jsonl" : o.cache);
  std::size_t last_pct = 101;
  auto progress = [&](std::size_t done, std::size_t total) {
    const std::size_t pct = total == 0 ? 100 : done * 100 / total;
    if (pct / 10 != last_pct / 10) {
      err << "progress: " << done << "/" << total << " cells\n";
      last_pct = pct;
    }
  };
  auto result = annotate_all(prompts, dataset, schema, backend, cfg, cache, progress);
  save_matrix(o.out, result.matrix);
  out << "cells " << result.stats.cells << ", cache hits " << result.stats.cache_hits
      << ", requests " << result.stats.requests << ", failed " << result.stats.failed_cells
      << ", invalid " << result.matrix.count_invalid() << " (extra "
      << result.matrix.count_extra() << ")\n";
  out << "wrote " << o.out << '\n';
  return kExitOk;
}

inline int cmd_par(const std::string& matrix_path, const std::string& mode_name,
                   std::string prefix, std::ostream& out) {
  const ParMode mode = parse_par_mode(mode_name);
  const AnnotationMatrix m = load_matrix(matrix_path);
  if (mode == ParMode::kGraded && !m.schema().is_ordinal()) {
    throw ConfigError("graded mode requires an ordinal schema; '" + m.schema().name() +
                      "' is categorical");
  }
  const ParMatrix pm = par_matrix(m, mode);
  if (prefix.empty()) prefix = strip_extension(matrix_path) + ".par-" + mode_name;
  write_file(prefix + ".csv", pm.to_csv());
  const auto summary = pm.summary_json();
  write_file(prefix + ".json", summary.dump(2) + "\n");
  write_file(prefix + ".svg",
             render_heatmap_svg(pm, "PAR heatmap: " + (m.dataset_name.empty() ? matrix_path
                                                                                : m.dataset_name)));
  out << summary.dump(2) << '\n';
  if (summary.contains("message")) out << "note: " << summary["message"].get<std::string>() << '\n';
  return kExitOk;
}

inline int cmd_vote(const std::string& matrix_path, std::size_t k,
                    const std::vector<std::string>& prompt_ids, std::uint64_t seed,
                    const std::string& tie_rule, std::string out_path, std::ostream& out) {
  const AnnotationMatrix m = load_matrix(matrix_path);
  std::vector<std::size_t> subset;
  if (!prompt_ids.empty()) {
    const auto ids = m.prompt_ids();
    for (const auto& id : prompt_ids) {
      auto it = std::find(ids.begin(), ids.end(), id);
      if (it == ids.end()) throw Error("unknown prompt id '" + id + "'");
      subset.push_back(static_cast<std::size_t>(it - ids.begin()));
    }
  } else {
    if (k == 0 || k > m.num_prompts()) {
      throw Error("k=" + std::to_string(k) + " is outside 1.." + std::to_string(m.num_prompts()));
    }
    Rng rng(seed, k);
    subset = draw_subset(m.num_prompts(), k, rng);
  }
  const auto composite = composite_annotator(m, subset, parse_tie_rule(tie_rule));
  std::ostringstream csv;
  csv << "sample_id,label" << (m.gold() ? ",gold" : "") << '\n';
  for (std::size_t x = 0; x < m.num_samples(); ++x) {
    csv << csv_field(m.samples()[x]) << ','
        << (composite[x] ? csv_field(m.schema().labels()[*composite[x]]) : std::string());
    if (m.gold()) csv << ',' << csv_field(m.schema().labels()[(*m.gold())[x]]);
    csv << '\n';
  }
  if (out_path.empty()) out_path = strip_extension(matrix_path) + ".vote.csv";
  write_file(out_path, csv.str());
  out << "subset:";
  for (std::size_t p : subset) out << ' ' << m.prompts()[p].id;
  out << '\n';
  if (m.gold()) out << "accuracy " << format_double(accuracy(composite, *m.gold())) << '\n';
  out << "wrote " << out_path << '\n';
  return kExitOk;
}

inline int cmd_sweep(const std::string& matrix_path, const std::vector<std::size_t>& ks,
                     const VoteConfig& cfg, std::string prefix, std::ostream& out) {
  const AnnotationMatrix m = load_matrix(matrix_path);
  const auto result = aggregation_sweep(m, ks, cfg);
  if (prefix.empty()) prefix = strip_extension(matrix_path) + ".sweep";
  const std::string csv = result.to_csv();
  write_file(prefix + ".csv", csv);
  write_file(prefix + ".json", result.to_json().dump(2) + "\n");
  out << csv;
  return kExitOk;
}

inline int cmd_simulate(const std::string& config_path, const std::string& out_path,
                        std::ostream& out) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(config_path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("panel config '" + config_path + "' is not valid JSON: " + e.what());
  }
  const auto matrix = simulate(panel_config_from_json(j));
  save_matrix(out_path, matrix);
  out << "simulated " << matrix.num_prompts() << " annotators x " << matrix.num_samples()
      << " samples\nwrote " << out_path << '\n';
  return kExitOk;
}

inline int cmd_report(const std::string& matrix_path, const std::vector<std::size_t>& ks,
                      const VoteConfig& cfg, std::string prefix, std::ostream& out) {
  const std::string bytes = read_file(matrix_path);
  const AnnotationMatrix m = parse_matrix(bytes);
  std::optional<AggregationResult> sweep;
  if (!ks.empty()) sweep = aggregation_sweep(m, ks, cfg);
  const RunReport report = build_report(m, sha256_hex(bytes), std::move(sweep));
  if (prefix.empty()) prefix = strip_extension(matrix_path) + ".report";
  const std::string md = report.to_markdown();
  write_file(prefix + ".md", md);
  write_file(prefix + ".json", report.to_json().dump(2) + "\n");
  out << md;
  return kExitOk;
}

}  // namespace cli_detail

// Runs the CLI on `args` (without the program name).
inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Inter-prompt reliability toolkit", "ipr"};
  app.require_subcommand(1);

  cli_detail::AnnotateOpts ann;
  auto* annotate = app.add_subcommand("annotate", "Run a prompt corpus over a dataset");
  annotate->add_option("--corpus", ann.corpus, "Prompt corpus (JSON lines)")->required();
  annotate->add_option("--dataset", ann.dataset, "Dataset (JSON lines)")->required();
  annotate->add_option("--schema", ann.schema, "Built-in schema name or schema JSON file")->required();
  annotate->add_option("--out", ann.out, "Output matrix file")->required();
  annotate->add_option("--cache", ann.cache, "Response cache (default: <out>.cache.jsonl)");
  annotate->add_option("--backend-url", ann.backend.base_url, "OpenAI-compatible base URL")
      ->capture_default_str();
  annotate->add_option("--model", ann.backend.model, "Model identifier")->required();
  annotate->add_option("--api-key-env", ann.backend.api_key_env,
                       "Environment variable holding the API key (empty: none)")
      ->capture_default_str();
  annotate->add_option("--temperature", ann.temperature,
                       "Sampling temperature override (default 0)");
  annotate->add_option("--workers", ann.backend.workers)->capture_default_str();
  annotate->add_option("--max-retries", ann.backend.max_retries)->capture_default_str();
  annotate->add_option("--timeout", ann.backend.timeout_seconds, "Seconds")->capture_default_str();
  annotate->add_option("--rate-limit", ann.backend.rate_limit, "Requests/second (0: unlimited)")
      ->capture_default_str();
  annotate->add_option("--retry-backoff-ms", ann.retry_backoff_ms)->capture_default_str();
  annotate->add_option("--system-prompt", ann.backend.system_prompt);
  annotate->add_option("--max-tokens", ann.max_tokens);

  std::string matrix_path;
  std::string mode = "discrete";
  std::string out_prefix;
  auto* par = app.add_subcommand("par", "Pairwise agreement matrix, summary and heatmap");
  par->add_option("--matrix", matrix_path)->required();
  par->add_option("--mode", mode)->check(CLI::IsMember({"discrete", "graded"}))->capture_default_str();
  par->add_option("--out", out_prefix, "Output prefix (.csv, .json, .svg)");

  std::size_t vote_k = 1;
  std::vector<std::string> vote_prompts;
  std::uint64_t seed = 42;
  std::string tie_rule = "schema-order";
  auto* vote = app.add_subcommand("vote", "Export one majority-vote composite");
  vote->add_option("--matrix", matrix_path)->required();
  vote->add_option("--k", vote_k, "Subset size (random subset under --seed)")->capture_default_str();
  vote->add_option("--prompts", vote_prompts, "Explicit prompt ids instead of a random subset");
  vote->add_option("--seed", seed)->capture_default_str();
  vote->add_option("--tie-rule", tie_rule)->check(CLI::IsMember({"schema-order", "reject"}))->capture_default_str();
  vote->add_option("--out", out_prefix, "Output CSV path");

  std::vector<std::size_t> ks{1, 3, 5, 10};
  VoteConfig vcfg;
  bool enumerate_k1 = false;
  auto* sweep = app.add_subcommand("sweep", "Majority-vote aggregation over k");
  sweep->add_option("--matrix", matrix_path)->required();
  sweep->add_option("--k", ks, "Subset sizes")->capture_default_str();
  sweep->add_option("--draws", vcfg.draws)->capture_default_str();
  sweep->add_option("--seed", seed)->capture_default_str();
  sweep->add_option("--tie-rule", tie_rule)->check(CLI::IsMember({"schema-order", "reject"}))->capture_default_str();
  sweep->add_flag("--enumerate-k1", enumerate_k1, "Use every prompt once at k=1");
  sweep->add_option("--out", out_prefix, "Output prefix (.csv, .json)");

  std::string config_path;
  auto* simulate_cmd = app.add_subcommand("simulate", "Generate a synthetic annotator panel");
  simulate_cmd->add_option("--config", config_path, "Panel config JSON")->required();
  simulate_cmd->add_option("--out", out_prefix, "Output matrix file")->required();

  std::vector<std::size_t> report_ks;
  auto* report = app.add_subcommand("report", "Accuracy, agreement and aggregation report");
  report->add_option("--matrix", matrix_path)->required();
  report->add_option("--k", report_ks, "Include an aggregation sweep over these k");
  report->add_option("--draws", vcfg.draws)->capture_default_str();
  report->add_option("--seed", seed)->capture_default_str();
  report->add_option("--out", out_prefix, "Output prefix (.md, .json)");

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    vcfg.seed = seed;
    vcfg.tie_rule = parse_tie_rule(tie_rule);
    vcfg.enumerate_k1 = enumerate_k1;
    if (*annotate) return cli_detail::cmd_annotate(ann, out, err);
    if (*par) return cli_detail::cmd_par(matrix_path, mode, out_prefix, out);
    if (*vote) {
      return cli_detail::cmd_vote(matrix_path, vote_k, vote_prompts, seed, tie_rule, out_prefix,
                                  out);
    }
    if (*sweep) return cli_detail::cmd_sweep(matrix_path, ks, vcfg, out_prefix, out);
    if (*simulate_cmd) return cli_detail::cmd_simulate(config_path, out_prefix, out);
    if (*report) return cli_detail::cmd_report(matrix_path, report_ks, vcfg, out_prefix, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomainError;
  }
  return kExitDomainError;
}

}  // namespace ipr

#endif  // IPR_CLI_HPP_
