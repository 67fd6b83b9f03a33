#include "templar/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <memory>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "templar/hashing.hpp"

namespace templar {

using nlohmann::json;

namespace {

ExtractionConfig extraction_from_json(const json& doc) {
  ExtractionConfig cfg;
  if (doc.contains("k")) cfg.k = doc.at("k").get<int>();
  if (doc.contains("min_group_size"))
    cfg.min_group_size = doc.at("min_group_size").get<int>();
  if (doc.contains("min_terminal_support"))
    cfg.min_terminal_support = doc.at("min_terminal_support").get<int>();
  if (doc.contains("tokenizer")) {
    const std::string name = doc.at("tokenizer").get<std::string>();
    if (name == "whitespace")
      cfg.tokenizer = Tokenizer::kWhitespace;
    else if (name == "unicode-word")
      cfg.tokenizer = Tokenizer::kUnicodeWord;
    else
      throw ConfigError("unknown tokenizer: " + name);
  }
  if (cfg.k < 1) throw ConfigError("extraction k must be >= 1");
  if (cfg.min_group_size < 2)
    throw ConfigError("min_group_size must be >= 2");
  return cfg;
}

InductionConfig induction_from_json(const json& doc) {
  InductionConfig cfg;
  if (doc.contains("max_candidates_per_sentence"))
    cfg.max_candidates_per_sentence =
        doc.at("max_candidates_per_sentence").get<std::size_t>();
  if (doc.contains("max_occurrence_subsets"))
    cfg.max_occurrence_subsets =
        doc.at("max_occurrence_subsets").get<std::size_t>();
  if (doc.contains("min_template_support"))
    cfg.min_template_support =
        doc.at("min_template_support").get<std::size_t>();
  if (doc.contains("min_support_ratio"))
    cfg.min_support_ratio = doc.at("min_support_ratio").get<double>();
  if (doc.contains("max_active_nonterminals"))
    cfg.max_active_nonterminals =
        doc.at("max_active_nonterminals").get<std::size_t>();
  if (doc.contains("improvement_epsilon"))
    cfg.improvement_epsilon = doc.at("improvement_epsilon").get<double>();
  if (cfg.max_candidates_per_sentence < 1 || cfg.max_occurrence_subsets < 1)
    throw ConfigError("induction caps must be >= 1");
  if (cfg.min_support_ratio < 0.0 || cfg.min_support_ratio > 1.0)
    throw ConfigError("min_support_ratio must be in [0, 1]");
  return cfg;
}

std::string tokenizer_name(Tokenizer tok) {
  return tok == Tokenizer::kWhitespace ? "whitespace" : "unicode-word";
}

std::string provider_name(ProviderKind kind) {
  switch (kind) {
    case ProviderKind::kMock: return "mock";
    case ProviderKind::kCacheOnly: return "cache-only";
    case ProviderKind::kHttp: return "http";
  }
  return "mock";
}

}  // namespace

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid config JSON: ") + e.what());
  }

  PipelineConfig cfg;
  if (!doc.contains("source_checklist"))
    throw ConfigError("config needs 'source_checklist'");
  cfg.source_checklist = doc.at("source_checklist").get<std::string>();
  if (doc.contains("source_lang"))
    cfg.source_lang = doc.at("source_lang").get<std::string>();
  if (doc.contains("target_lang"))
    cfg.target_lang = doc.at("target_lang").get<std::string>();
  if (doc.contains("provider")) {
    const std::string name = doc.at("provider").get<std::string>();
    if (name == "mock")
      cfg.provider = ProviderKind::kMock;
    else if (name == "cache-only")
      cfg.provider = ProviderKind::kCacheOnly;
    else if (name == "http")
      cfg.provider = ProviderKind::kHttp;
    else
      throw ConfigError("unknown provider: " + name);
  }
  if (doc.contains("mock_rules"))
    cfg.mock_rules = std::filesystem::path(doc.at("mock_rules").get<std::string>());
  if (doc.contains("cache"))
    cfg.cache = std::filesystem::path(doc.at("cache").get<std::string>());
  if (doc.contains("predictions"))
    cfg.predictions =
        std::filesystem::path(doc.at("predictions").get<std::string>());
  if (doc.contains("extraction"))
    cfg.extraction = extraction_from_json(doc.at("extraction"));
  if (doc.contains("induction"))
    cfg.induction = induction_from_json(doc.at("induction"));
  if (doc.contains("metrics")) {
    const json& m = doc.at("metrics");
    if (m.contains("sample_per_template"))
      cfg.metrics.bleu.sample_per_template =
          m.at("sample_per_template").get<std::size_t>();
    if (m.contains("dedupe_terminals_across_ids"))
      cfg.metrics.diversity.dedupe_terminals_across_ids =
          m.at("dedupe_terminals_across_ids").get<bool>();
  }
  if (doc.contains("expand_limit") && !doc.at("expand_limit").is_null())
    cfg.expand_limit = doc.at("expand_limit").get<std::size_t>();
  if (doc.contains("seed")) cfg.seed = doc.at("seed").get<std::uint64_t>();
  if (doc.contains("workers"))
    cfg.workers = doc.at("workers").get<std::size_t>();
  if (doc.contains("out")) cfg.out_dir = doc.at("out").get<std::string>();

  // Relative paths resolve against the config file location.
  const std::filesystem::path base = path.parent_path();
  auto resolve = [&](std::filesystem::path& p) {
    if (!p.empty() && p.is_relative()) p = base / p;
  };
  resolve(cfg.source_checklist);
  if (cfg.mock_rules) resolve(*cfg.mock_rules);
  if (cfg.cache) resolve(*cfg.cache);
  if (cfg.predictions) resolve(*cfg.predictions);
  return cfg;
}

std::string PipelineConfig::to_json_text() const {
  json doc;
  doc["source_checklist"] = source_checklist.string();
  doc["source_lang"] = source_lang;
  doc["target_lang"] = target_lang;
  doc["provider"] = provider_name(provider);
  if (mock_rules) doc["mock_rules"] = mock_rules->string();
  if (cache) doc["cache"] = cache->string();
  if (predictions) doc["predictions"] = predictions->string();
  doc["extraction"] = {{"k", extraction.k},
                       {"min_group_size", extraction.min_group_size},
                       {"min_terminal_support", extraction.min_terminal_support},
                       {"tokenizer", tokenizer_name(extraction.tokenizer)}};
  doc["induction"] = {
      {"max_candidates_per_sentence", induction.max_candidates_per_sentence},
      {"max_occurrence_subsets", induction.max_occurrence_subsets},
      {"min_template_support", induction.min_template_support},
      {"min_support_ratio", induction.min_support_ratio},
      {"max_active_nonterminals", induction.max_active_nonterminals},
      {"improvement_epsilon", induction.improvement_epsilon}};
  doc["metrics"] = {
      {"sample_per_template", metrics.bleu.sample_per_template},
      {"dedupe_terminals_across_ids",
       metrics.diversity.dedupe_terminals_across_ids}};
  if (expand_limit) doc["expand_limit"] = *expand_limit;
  doc["seed"] = seed;
  return doc.dump(2) + "\n";
}

double PipelineResult::mean_induced_per_source() const {
  if (runs.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& run : runs) sum += static_cast<double>(run.induced_count);
  return sum / static_cast<double>(runs.size());
}

namespace {

struct UnitOutcome {
  InducedTemplateSet induced;
  TemplateRun run;
  std::size_t translations = 0;
};

// Renames a fragment's ids to CAP_n counters and appends its templates to
// the capability, collapsing exact duplicates (same structure and same
// terminal sets up to renaming).
void merge_fragment(Capability& cap, const InducedTemplateSet& fragment,
                    std::size_t& next_id, std::vector<std::string>& notes) {
  auto structural_key = [](const Template& t, const Lexicon& lex) {
    std::map<std::string, std::size_t> index;
    std::string key;
    for (const auto& seg : t.segments()) {
      if (const auto* lit = std::get_if<std::string>(&seg)) {
        key += 'L' + *lit + '\x1f';
      } else {
        const auto& ph = std::get<PlaceholderInstance>(seg);
        auto [it, inserted] = index.try_emplace(ph.id, index.size());
        key += 'P' + std::to_string(it->second) + '-' +
               std::to_string(ph.cardinal) + '\x1f';
      }
    }
    for (const auto& id : t.placeholder_ids()) {
      key += '|';
      auto lex_it = lex.entries.find(id);
      if (lex_it != lex.entries.end()) {
        std::vector<std::string> sorted(lex_it->second);
        std::sort(sorted.begin(), sorted.end());
        for (const auto& term : sorted) key += term + '\x1e';
      }
    }
    return key;
  };

  std::set<std::string> existing;
  for (const auto& t : cap.templates)
    existing.insert(structural_key(t, cap.lexicon));

  auto add_template = [&](const Template& t, const Lexicon& lex) {
    const std::string key = structural_key(t, lex);
    if (existing.count(key)) {
      notes.push_back("duplicate induced template collapsed: " +
                      render_template(t));
      return;
    }
    existing.insert(key);
    // Fresh ids per template keep fragments independent.
    std::map<std::string, std::string> rename;
    std::vector<Segment> segs;
    for (const auto& seg : t.segments()) {
      if (const auto* ph = std::get_if<PlaceholderInstance>(&seg)) {
        auto [it, inserted] = rename.try_emplace(ph->id, "");
        if (inserted) {
          it->second = "KEY_" + std::to_string(++next_id);
          cap.lexicon.entries[it->second] = lex.entries.at(ph->id);
        }
        segs.emplace_back(PlaceholderInstance{it->second, ph->cardinal});
      } else {
        segs.push_back(seg);
      }
    }
    cap.templates.push_back(Template(std::move(segs)));
  };

  for (const auto& t : fragment.templates) add_template(t, fragment.lexicon);
  for (const auto& t : fragment.orphan_literals)
    add_template(t, fragment.lexicon);
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& cfg) {
  const CheckList source = load_checklist(cfg.source_checklist);
  if (cfg.target_lang.empty())
    throw ConfigError("pipeline needs a target language");

  std::unique_ptr<TranslationCache> cache;
  if (cfg.cache) cache = std::make_unique<TranslationCache>(*cfg.cache);

  std::unique_ptr<Provider> provider;
  switch (cfg.provider) {
    case ProviderKind::kMock: {
      if (!cfg.mock_rules)
        throw ConfigError("mock provider needs 'mock_rules'");
      provider = std::make_unique<MockProvider>(MockRuleSet::load(*cfg.mock_rules));
      break;
    }
    case ProviderKind::kCacheOnly: {
      if (!cache)
        throw ConfigError("cache-only provider needs a 'cache' path");
      break;
    }
    case ProviderKind::kHttp: {
      HttpProviderConfig http = cfg.http;
      const HttpProviderConfig env = HttpProviderConfig::from_env();
      if (http.endpoint.empty()) http.endpoint = env.endpoint;
      if (http.api_key.empty()) http.api_key = env.api_key;
      if (http.api_key_header.empty()) http.api_key_header = env.api_key_header;
      provider = std::make_unique<HttpProvider>(std::move(http));
      break;
    }
  }
  TranslationService service(cache.get(), provider.get());

  struct Unit {
    std::size_t capability;
    std::size_t tmpl;
  };
  std::vector<Unit> units;
  for (std::size_t ci = 0; ci < source.capabilities.size(); ++ci)
    for (std::size_t ti = 0; ti < source.capabilities[ci].templates.size(); ++ti)
      units.push_back({ci, ti});

  std::vector<UnitOutcome> outcomes(units.size());
  std::atomic<std::size_t> next_unit{0};
  std::mutex error_mutex;
  std::exception_ptr error;

  auto process = [&](std::size_t ui) {
    const Capability& cap = source.capabilities[units[ui].capability];
    const Template& tmpl = cap.templates[units[ui].tmpl];

    ExpandOptions eo;
    eo.limit = cfg.expand_limit;
    eo.seed = cfg.seed;
    const std::vector<std::string> sentences = expand(tmpl, cap.lexicon, eo);

    TranslationRequest request{sentences, cfg.source_lang, cfg.target_lang};
    const std::vector<std::string> translations = service.translate(request);

    SentenceCorpus corpus = SentenceCorpus::from_lines(
        translations, cfg.target_lang, render_template(tmpl));

    UnitOutcome outcome;
    outcome.translations = translations.size();
    InductionReport report;
    outcome.induced = induce(corpus, cfg.extraction, cfg.induction, &report);
    outcome.run.capability = cap.name;
    outcome.run.source_template = render_template(tmpl);
    outcome.run.sentence_count = corpus.sentences.size();
    outcome.run.induced_count = outcome.induced.templates.size();
    outcome.run.orphan_count = outcome.induced.orphan_literals.size();
    for (const auto& t : outcome.induced.templates)
      outcome.run.induced_templates.push_back(render_template(t));
    outcome.run.unexplained = report.unexplained;
    outcomes[ui] = std::move(outcome);
  };

  auto worker = [&] {
    for (;;) {
      const std::size_t ui = next_unit.fetch_add(1);
      if (ui >= units.size()) return;
      {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (error) return;
      }
      try {
        process(ui);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };

  std::size_t workers = cfg.workers;
  if (workers == 0)
    workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, units.size());
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  // Merge fragments capability by capability, in source order.
  PipelineResult result;
  result.target.language = cfg.target_lang;
  for (std::size_t ci = 0; ci < source.capabilities.size(); ++ci) {
    Capability merged;
    merged.name = source.capabilities[ci].name;
    std::size_t next_id = 0;
    for (std::size_t ui = 0; ui < units.size(); ++ui) {
      if (units[ui].capability != ci) continue;
      merge_fragment(merged, outcomes[ui].induced, next_id,
                     outcomes[ui].run.merge_notes);
      result.runs.push_back(std::move(outcomes[ui].run));
      result.translation_count += outcomes[ui].translations;
    }
    result.target.capabilities.push_back(std::move(merged));
  }

  bool any_template = false;
  for (const auto& cap : result.target.capabilities)
    if (!cap.templates.empty()) any_template = true;
  if (!any_template) throw EmptyCorpus("induction produced no templates");

  std::unique_ptr<PredictionsByCapability> predictions;
  if (cfg.predictions)
    predictions = std::make_unique<PredictionsByCapability>(
        load_predictions(*cfg.predictions));
  result.metrics =
      compute_metrics(result.target, predictions.get(), cfg.metrics);
  return result;
}

void write_pipeline_outputs(const PipelineConfig& cfg,
                            const PipelineResult& result) {
  namespace fs = std::filesystem;
  const fs::path out = cfg.out_dir.empty() ? fs::path(".") : cfg.out_dir;
  fs::create_directories(out);

  save_checklist(result.target, out / "target_checklist.json");
  write_file_atomic(out / "metrics.json",
                    metric_report_to_json_text(result.metrics));
  write_file_atomic(out / "metrics.csv", metric_report_to_csv(result.metrics));

  json report;
  report["runs"] = json::array();
  for (const auto& run : result.runs) {
    json r;
    r["capability"] = run.capability;
    r["source_template"] = run.source_template;
    r["sentence_count"] = run.sentence_count;
    r["induced_count"] = run.induced_count;
    r["orphan_count"] = run.orphan_count;
    r["induced_templates"] = run.induced_templates;
    r["unexplained"] = run.unexplained;
    r["merge_notes"] = run.merge_notes;
    report["runs"].push_back(std::move(r));
  }
  report["mean_induced_per_source"] = result.mean_induced_per_source();
  report["translation_count"] = result.translation_count;
  write_file_atomic(out / "pipeline_report.json", report.dump(2) + "\n");

  const std::string config_text = cfg.to_json_text();
  json manifest;
  manifest["tool"] = "templar";
  manifest["version"] = "0.1.0";
  manifest["config"] = json::parse(config_text);
  std::ostringstream hash;
  hash << std::hex << fnv1a64(config_text);
  manifest["config_hash"] = hash.str();
  write_file_atomic(out / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace templar
