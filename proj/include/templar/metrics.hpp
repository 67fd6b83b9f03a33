#ifndef TEMPLAR_METRICS_HPP
#define TEMPLAR_METRICS_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "templar/checklist.hpp"

namespace templar {

struct PredictionRecord {
  std::string sentence;
  std::string expected;
  std::string predicted;
};

// Predictions grouped by capability name, as read from a JSON-lines file
// with objects {"sentence", "expected", "predicted", "capability"}.
using PredictionsByCapability =
    std::map<std::string, std::vector<PredictionRecord>>;

PredictionsByCapability load_predictions(const std::filesystem::path& path);

// Fraction of records whose prediction differs from the expectation.
// Throws EmptyCapability on an empty record list.
double failure_rate(std::span<const PredictionRecord> records);

struct DiversityOptions {
  // Whether a terminal shared by several ids counts once per capability.
  bool dedupe_terminals_across_ids = true;
};

// (distinct templates, distinct terminals) for one capability.
std::pair<std::size_t, std::size_t> diversity_counts(
    const Capability& cap, const DiversityOptions& opts = {});

struct CrossBleuOptions {
  std::size_t sample_per_template = 50;
  std::uint64_t seed = 0;
};

// Cross-template diversity score: each sampled sentence of a template is
// BLEU-scored against the pooled samples of the *other* templates (templates
// rendering identically are not references for each other), averaged, then
// divided by the template count. Lower means more diverse; a single-template
// capability scores 0 by definition.
double cross_template_bleu(const Capability& cap,
                           const CrossBleuOptions& opts = {});

enum class MatchMode {
  kStrict,   // placeholder structure, literals and terminal sets must agree
  kLenient,  // terminal sets are ignored
};

struct MatchResult {
  double precision = 0.0;
  double recall = 0.0;
  std::vector<std::string> unmatched_candidate;  // rendered templates
  std::vector<std::string> unmatched_reference;
};

// Maximum matching between the two template lists. Ids are renameable: only
// the cardinal structure (and, in strict mode, the terminal sets of
// positionally corresponding ids) matters. precision(a, b) == recall(b, a).
MatchResult template_match(const Capability& candidate,
                           const Capability& reference, MatchMode mode);

// (Pearson, Spearman). Spearman uses average ranks for ties. Throws
// ConstantVector when either input has zero variance, and Error on length
// mismatch or fewer than two points.
std::pair<double, double> fr_correlation(std::span<const double> a,
                                         std::span<const double> b);

struct CapabilityMetrics {
  std::optional<double> fr;
  std::size_t temp_count = 0;
  std::size_t term_count = 0;
  double cc_bleu = 0.0;
};

// Unweighted means over capabilities; counts may average to fractions.
struct MacroMetrics {
  std::optional<double> fr;
  double temp_count = 0.0;
  double term_count = 0.0;
  double cc_bleu = 0.0;
};

struct MetricReport {
  std::map<std::string, CapabilityMetrics> per_capability;
  MacroMetrics macro;
  std::size_t total_temp_count = 0;
  std::size_t total_term_count = 0;
};

struct MetricOptions {
  DiversityOptions diversity;
  CrossBleuOptions bleu;
};

MetricReport compute_metrics(const CheckList& cl,
                             const PredictionsByCapability* predictions,
                             const MetricOptions& opts = {});

std::string metric_report_to_json_text(const MetricReport& report);
std::string metric_report_to_csv(const MetricReport& report);

}  // namespace templar

#endif  // TEMPLAR_METRICS_HPP
