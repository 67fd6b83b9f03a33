#ifndef TEMPLAR_PIPELINE_HPP
#define TEMPLAR_PIPELINE_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "templar/checklist.hpp"
#include "templar/induction.hpp"
#include "templar/metrics.hpp"
#include "templar/mt.hpp"

namespace templar {

enum class ProviderKind { kMock, kCacheOnly, kHttp };

struct PipelineConfig {
  std::filesystem::path source_checklist;
  std::string source_lang = "en";
  std::string target_lang;
  ProviderKind provider = ProviderKind::kMock;
  std::optional<std::filesystem::path> mock_rules;
  std::optional<std::filesystem::path> cache;
  std::optional<std::filesystem::path> predictions;
  HttpProviderConfig http;
  ExtractionConfig extraction;
  InductionConfig induction;
  MetricOptions metrics;
  std::optional<std::size_t> expand_limit;
  std::uint64_t seed = 0;
  std::size_t workers = 0;  // 0 = hardware concurrency
  std::filesystem::path out_dir;

  static PipelineConfig load(const std::filesystem::path& path);
  // The effective configuration as canonical JSON (for the manifest hash).
  std::string to_json_text() const;
};

struct TemplateRun {
  std::string capability;
  std::string source_template;
  std::size_t sentence_count = 0;
  std::size_t induced_count = 0;  // main templates before merging
  std::size_t orphan_count = 0;
  std::vector<std::string> induced_templates;  // rendered
  std::vector<std::string> unexplained;
  std::vector<std::string> merge_notes;
};

struct PipelineResult {
  CheckList target;
  MetricReport metrics;
  std::vector<TemplateRun> runs;
  std::size_t translation_count = 0;

  double mean_induced_per_source() const;
};

// expand -> translate -> induce for every source template (bounded worker
// pool, results merged in source order), then per-capability merging and
// metric computation. Throws ProviderUnavailable / CacheMiss on translation
// failure and EmptyCorpus-derived errors on malformed inputs; produces no
// partial result.
PipelineResult run_pipeline(const PipelineConfig& cfg);

// Writes target_checklist.json, pipeline_report.json, metrics.json,
// metrics.csv and manifest.json under cfg.out_dir (atomically, so reruns
// are byte-comparable).
void write_pipeline_outputs(const PipelineConfig& cfg,
                            const PipelineResult& result);

}  // namespace templar

#endif  // TEMPLAR_PIPELINE_HPP
