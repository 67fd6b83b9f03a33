// templar - template grammar induction toolkit.
//
// Subcommands: expand, translate, induce, pipeline, metrics, diff, lint.
// Exit codes: 0 success, 2 bad input/config, 3 empty result, 4 provider
// failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "templar/checklist.hpp"
#include "templar/hashing.hpp"
#include "templar/induction.hpp"
#include "templar/metrics.hpp"
#include "templar/mt.hpp"
#include "templar/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace templar;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitEmpty = 3;
constexpr int kExitProvider = 4;

bool g_quiet = false;

void info(const std::string& message) {
  if (!g_quiet) std::cout << message << "\n";
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open file: " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

int cmd_expand(const fs::path& checklist_path, const std::string& capability,
               std::optional<std::size_t> limit, const fs::path& out_dir,
               std::uint64_t seed) {
  const CheckList cl = load_checklist(checklist_path);
  fs::create_directories(out_dir);
  bool found = capability.empty();
  for (const auto& cap : cl.capabilities) {
    if (!capability.empty() && cap.name != capability) continue;
    found = true;
    std::vector<std::string> pool;
    std::set<std::string> seen;
    for (const auto& t : cap.templates) {
      for (auto& sentence : expand(t, cap.lexicon, {std::nullopt, seed}))
        if (seen.insert(sentence).second) pool.push_back(std::move(sentence));
    }
    if (limit && *limit < pool.size()) {
      std::vector<std::string> sampled;
      const std::uint64_t cap_seed = seed ^ fnv1a64(cap.name);
      for (std::size_t idx : sample_indices(pool.size(), *limit, cap_seed))
        sampled.push_back(std::move(pool[idx]));
      pool = std::move(sampled);
    }
    std::string content;
    for (const auto& sentence : pool) content += sentence + "\n";
    const fs::path out = out_dir / (sanitize_filename(cap.name) + ".txt");
    write_file_atomic(out, content);
    info("wrote " + std::to_string(pool.size()) + " sentences to " +
         out.string());
  }
  if (!found) throw ConfigError("capability not found: " + capability);
  return kExitOk;
}

std::unique_ptr<Provider> make_provider(const std::string& kind,
                                        const std::optional<fs::path>& rules,
                                        bool& cache_only) {
  cache_only = false;
  if (kind == "mock") {
    if (!rules) throw ConfigError("mock provider needs --rules");
    return std::make_unique<MockProvider>(MockRuleSet::load(*rules));
  }
  if (kind == "cache-only") {
    cache_only = true;
    return nullptr;
  }
  if (kind == "http")
    return std::make_unique<HttpProvider>(HttpProviderConfig::from_env());
  throw ConfigError("unknown provider: " + kind);
}

int cmd_translate(const fs::path& in_path, const fs::path& out_path,
                  const std::string& source_lang, const std::string& target_lang,
                  const std::string& provider_kind,
                  const std::optional<fs::path>& rules,
                  const std::optional<fs::path>& cache_path) {
  std::vector<std::string> texts;
  for (auto& line : read_lines(in_path))
    if (!line.empty()) texts.push_back(std::move(line));
  if (texts.empty()) throw ConfigError("no sentences in " + in_path.string());

  bool cache_only = false;
  std::unique_ptr<Provider> provider =
      make_provider(provider_kind, rules, cache_only);
  std::unique_ptr<TranslationCache> cache;
  if (cache_path) cache = std::make_unique<TranslationCache>(*cache_path);
  if (cache_only && !cache)
    throw ConfigError("cache-only provider needs --cache");

  TranslationService service(cache.get(), provider.get());
  const std::vector<std::string> translations =
      service.translate({texts, source_lang, target_lang});

  std::string content;
  for (const auto& t : translations) content += t + "\n";
  write_file_atomic(out_path, content);
  info("translated " + std::to_string(texts.size()) + " sentences");
  return kExitOk;
}

int cmd_induce(const fs::path& in_path, const fs::path& out_dir,
               const std::string& name, const std::string& language,
               const ExtractionConfig& ecfg, const InductionConfig& icfg,
               const std::optional<fs::path>& dump_groups) {
  const SentenceCorpus corpus =
      SentenceCorpus::from_lines(read_lines(in_path), language);
  if (corpus.sentences.empty())
    throw ConfigError("no sentences in " + in_path.string());

  if (dump_groups) {
    const WordGraph graph = build_word_graph(corpus, ecfg);
    json doc = json::array();
    for (const auto& group : extract_terminal_groups(graph, ecfg)) {
      json g;
      g["id"] = group.id;
      g["anchor"] = {group.anchor.first, group.anchor.second};
      g["terminals"] = json::object();
      for (const auto& [text, support] : group.terminals)
        g["terminals"][text] = support;
      doc.push_back(std::move(g));
    }
    write_file_atomic(*dump_groups, doc.dump(2) + "\n");
  }

  InductionReport report;
  const InducedTemplateSet induced = induce(corpus, ecfg, icfg, &report);

  CheckList out_cl;
  out_cl.language = language;
  Capability cap;
  cap.name = name;
  cap.templates = induced.templates;
  for (const auto& t : induced.orphan_literals) cap.templates.push_back(t);
  cap.lexicon = induced.lexicon;
  out_cl.capabilities.push_back(std::move(cap));

  fs::create_directories(out_dir);
  save_checklist(out_cl, out_dir / "induced_checklist.json");

  json rep;
  rep["iterations"] = json::array();
  for (const auto& trial : report.trials) {
    rep["iterations"].push_back({{"group", trial.group_id},
                                 {"usefulness", trial.usefulness},
                                 {"cover_size", trial.cover_size},
                                 {"kept", trial.kept}});
  }
  rep["unexplained"] = report.unexplained;
  rep["truncated_sentences"] = report.truncated_sentences;
  rep["support"] = json::object();
  for (const auto& [render, support] : report.support)
    rep["support"][render] = support;
  write_file_atomic(out_dir / "induce_report.json", rep.dump(2) + "\n");

  info("induced " + std::to_string(induced.templates.size()) + " templates (" +
       std::to_string(induced.unexplained.size()) + " unexplained sentences)");
  if (!induced.unexplained.empty() &&
      induced.unexplained.size() == corpus.sentences.size())
    return kExitEmpty;
  return kExitOk;
}

int cmd_pipeline(const fs::path& config_path,
                 const std::optional<fs::path>& out_override,
                 std::optional<std::uint64_t> seed_override) {
  PipelineConfig cfg = PipelineConfig::load(config_path);
  if (out_override) cfg.out_dir = *out_override;
  if (seed_override) cfg.seed = *seed_override;
  if (cfg.out_dir.empty())
    throw ConfigError("pipeline needs an output directory (--out)");
  const PipelineResult result = run_pipeline(cfg);
  write_pipeline_outputs(cfg, result);
  info("pipeline wrote " + (cfg.out_dir / "target_checklist.json").string());
  info("mean induced templates per source: " +
       std::to_string(result.mean_induced_per_source()));
  return kExitOk;
}

int cmd_metrics(const fs::path& checklist_path,
                const std::optional<fs::path>& predictions_path,
                const std::optional<fs::path>& csv_path,
                const fs::path& out_path, const MetricOptions& opts) {
  const CheckList cl = load_checklist(checklist_path);
  std::unique_ptr<PredictionsByCapability> predictions;
  if (predictions_path)
    predictions = std::make_unique<PredictionsByCapability>(
        load_predictions(*predictions_path));
  const MetricReport report = compute_metrics(cl, predictions.get(), opts);
  write_file_atomic(out_path, metric_report_to_json_text(report));
  if (csv_path) write_file_atomic(*csv_path, metric_report_to_csv(report));
  info("wrote " + out_path.string());
  return kExitOk;
}

int cmd_diff(const fs::path& candidate_path, const fs::path& reference_path,
             const std::string& mode_name,
             const std::optional<fs::path>& out_path) {
  const CheckList candidate = load_checklist(candidate_path);
  const CheckList reference = load_checklist(reference_path);
  const MatchMode mode =
      mode_name == "strict" ? MatchMode::kStrict : MatchMode::kLenient;

  json doc;
  double matched_c = 0, total_c = 0, matched_r = 0, total_r = 0;
  for (const auto& ref_cap : reference.capabilities) {
    const Capability* cand_cap = nullptr;
    for (const auto& c : candidate.capabilities)
      if (c.name == ref_cap.name) cand_cap = &c;
    Capability empty;
    empty.name = ref_cap.name;
    const MatchResult r =
        template_match(cand_cap ? *cand_cap : empty, ref_cap, mode);
    const std::size_t nc = cand_cap ? cand_cap->templates.size() : 0;
    matched_c += r.precision * static_cast<double>(nc);
    total_c += static_cast<double>(nc);
    matched_r += r.recall * static_cast<double>(ref_cap.templates.size());
    total_r += static_cast<double>(ref_cap.templates.size());

    json cap_doc;
    cap_doc["precision"] = r.precision;
    cap_doc["recall"] = r.recall;
    cap_doc["unmatched_candidate"] = r.unmatched_candidate;
    cap_doc["unmatched_reference"] = r.unmatched_reference;
    doc["per_capability"][ref_cap.name] = std::move(cap_doc);

    std::cout << ref_cap.name << ": precision=" << r.precision
              << " recall=" << r.recall << "\n";
    for (const auto& t : r.unmatched_candidate)
      std::cout << "  candidate only: " << t << "\n";
    for (const auto& t : r.unmatched_reference)
      std::cout << "  reference only: " << t << "\n";
  }
  const double precision = total_c > 0 ? matched_c / total_c : 1.0;
  const double recall = total_r > 0 ? matched_r / total_r : 1.0;
  doc["precision"] = precision;
  doc["recall"] = recall;
  doc["mode"] = mode_name;
  std::cout << "overall: precision=" << precision << " recall=" << recall
            << "\n";
  if (out_path) write_file_atomic(*out_path, doc.dump(2) + "\n");
  return kExitOk;
}

int cmd_lint(const fs::path& checklist_path) {
  const CheckList cl = load_checklist(checklist_path);
  const std::vector<LintIssue> issues = lint_checklist(cl);
  bool hard_error = false;
  for (const auto& issue : issues) {
    const bool err = issue.severity == LintIssue::Severity::kError;
    hard_error |= err;
    std::cout << (err ? "error" : "warning") << " [" << issue.capability
              << "] " << issue.message << "\n";
  }
  info(std::to_string(issues.size()) + " issue(s)");
  return hard_error ? kExitInput : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"templar - template grammar induction toolkit"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  fs::path out_dir = "out";
  app.add_flag("--quiet,-q", g_quiet, "suppress progress output");

  // expand
  auto* expand_cmd = app.add_subcommand("expand", "expand checklist templates into sentences");
  fs::path expand_checklist;
  std::string expand_capability;
  std::optional<std::size_t> expand_limit;
  expand_cmd->add_option("checklist", expand_checklist, "checklist JSON")->required();
  expand_cmd->add_option("--capability", expand_capability, "only this capability");
  expand_cmd->add_option("--limit", expand_limit, "max sentences per capability (seeded subsample)");
  expand_cmd->add_option("--out", out_dir, "output directory");
  expand_cmd->add_option("--seed", seed, "sampling seed");

  // translate
  auto* translate_cmd = app.add_subcommand("translate", "translate a sentence file");
  fs::path tr_in, tr_out = "translations.txt";
  std::string tr_source = "en", tr_target, tr_provider = "mock";
  std::optional<fs::path> tr_rules, tr_cache;
  translate_cmd->add_option("input", tr_in, "one sentence per line")->required();
  translate_cmd->add_option("--out", tr_out, "output file");
  translate_cmd->add_option("--source", tr_source, "source language tag");
  translate_cmd->add_option("--target", tr_target, "target language tag")->required();
  translate_cmd->add_option("--provider", tr_provider, "mock | cache-only | http");
  translate_cmd->add_option("--rules", tr_rules, "mock rules JSON");
  translate_cmd->add_option("--cache", tr_cache, "translation cache file (JSON lines)");

  // induce
  auto* induce_cmd = app.add_subcommand("induce", "induce templates from sentences");
  fs::path ind_in;
  std::string ind_name = "induced", ind_language;
  ExtractionConfig ecfg;
  InductionConfig icfg;
  std::optional<fs::path> dump_groups;
  std::string tokenizer_name = "whitespace";
  induce_cmd->add_option("input", ind_in, "one sentence per line")->required();
  induce_cmd->add_option("--out", out_dir, "output directory");
  induce_cmd->add_option("--name", ind_name, "capability name for the output");
  induce_cmd->add_option("--language", ind_language, "language tag");
  induce_cmd->add_option("--k", ecfg.k, "max tokens per terminal");
  induce_cmd->add_option("--min-group-size", ecfg.min_group_size, "min terminals per group");
  induce_cmd->add_option("--min-terminal-support", ecfg.min_terminal_support, "min sentences per terminal");
  induce_cmd->add_option("--tokenizer", tokenizer_name, "whitespace | unicode-word");
  induce_cmd->add_option("--max-candidates", icfg.max_candidates_per_sentence, "candidate cap per sentence");
  induce_cmd->add_option("--max-subsets", icfg.max_occurrence_subsets, "occurrence subset cap");
  induce_cmd->add_option("--min-template-support", icfg.min_template_support, "support filter (absolute)");
  induce_cmd->add_option("--min-support-ratio", icfg.min_support_ratio, "support filter (corpus fraction)");
  induce_cmd->add_option("--max-active", icfg.max_active_nonterminals, "non-terminal budget");
  induce_cmd->add_option("--epsilon", icfg.improvement_epsilon, "relative shrink to keep iterating");
  induce_cmd->add_option("--dump-groups", dump_groups, "write terminal groups JSON (debug)");

  // pipeline
  auto* pipeline_cmd = app.add_subcommand("pipeline", "expand -> translate -> induce -> evaluate");
  fs::path pipeline_config;
  std::optional<fs::path> pipeline_out;
  std::optional<std::uint64_t> pipeline_seed;
  pipeline_cmd->add_option("--config", pipeline_config, "pipeline config JSON")->required();
  pipeline_cmd->add_option("--out", pipeline_out, "output directory (overrides config)");
  pipeline_cmd->add_option("--seed", pipeline_seed, "seed (overrides config)");

  // metrics
  auto* metrics_cmd = app.add_subcommand("metrics", "compute checklist metrics");
  fs::path metrics_checklist, metrics_out = "metrics.json";
  std::optional<fs::path> metrics_predictions, metrics_csv;
  MetricOptions metric_opts;
  metrics_cmd->add_option("checklist", metrics_checklist, "checklist JSON")->required();
  metrics_cmd->add_option("--predictions", metrics_predictions, "predictions JSON lines");
  metrics_cmd->add_option("--csv", metrics_csv, "also write a CSV table");
  metrics_cmd->add_option("--out", metrics_out, "report path");
  metrics_cmd->add_option("--sample-per-template", metric_opts.bleu.sample_per_template,
                          "expansion sample size for the BLEU diversity score");
  metrics_cmd->add_option("--seed", metric_opts.bleu.seed, "sampling seed");

  // diff
  auto* diff_cmd = app.add_subcommand("diff", "compare two checklists");
  fs::path diff_candidate, diff_reference;
  std::string diff_mode = "strict";
  std::optional<fs::path> diff_out;
  diff_cmd->add_option("candidate", diff_candidate, "candidate checklist")->required();
  diff_cmd->add_option("reference", diff_reference, "reference checklist")->required();
  diff_cmd->add_option("--mode", diff_mode, "strict | lenient")
      ->check(CLI::IsMember({"strict", "lenient"}));
  diff_cmd->add_option("--out", diff_out, "write the match report JSON");

  // lint
  auto* lint_cmd = app.add_subcommand("lint", "check a checklist for problems");
  fs::path lint_checklist_path;
  lint_cmd->add_option("checklist", lint_checklist_path, "checklist JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (expand_cmd->parsed())
      return cmd_expand(expand_checklist, expand_capability, expand_limit,
                        out_dir, seed);
    if (translate_cmd->parsed())
      return cmd_translate(tr_in, tr_out, tr_source, tr_target, tr_provider,
                           tr_rules, tr_cache);
    if (induce_cmd->parsed()) {
      if (tokenizer_name == "unicode-word")
        ecfg.tokenizer = Tokenizer::kUnicodeWord;
      else if (tokenizer_name != "whitespace")
        throw ConfigError("unknown tokenizer: " + tokenizer_name);
      return cmd_induce(ind_in, out_dir, ind_name, ind_language, ecfg, icfg,
                        dump_groups);
    }
    if (pipeline_cmd->parsed())
      return cmd_pipeline(pipeline_config, pipeline_out, pipeline_seed);
    if (metrics_cmd->parsed())
      return cmd_metrics(metrics_checklist, metrics_predictions, metrics_csv,
                         metrics_out, metric_opts);
    if (diff_cmd->parsed())
      return cmd_diff(diff_candidate, diff_reference, diff_mode, diff_out);
    if (lint_cmd->parsed()) return cmd_lint(lint_checklist_path);
  } catch (const ProviderUnavailable& e) {
    std::cerr << "provider error: " << e.what() << "\n";
    return kExitProvider;
  } catch (const CacheMiss& e) {
    std::cerr << "provider error: " << e.what() << "\n";
    return kExitProvider;
  } catch (const AuthError& e) {
    std::cerr << "provider error: " << e.what() << "\n";
    return kExitProvider;
  } catch (const EmptyCorpus& e) {
    std::cerr << "empty result: " << e.what() << "\n";
    return kExitEmpty;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitOk;
}
