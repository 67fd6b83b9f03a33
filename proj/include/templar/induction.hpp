#ifndef TEMPLAR_INDUCTION_HPP
#define TEMPLAR_INDUCTION_HPP

#include <cstddef>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "templar/template.hpp"
#include "templar/word_graph.hpp"

namespace templar {

struct InductionConfig {
  // Cap on candidate templates kept per sentence; the literal template is
  // always retained. Truncation is flagged, not fatal.
  std::size_t max_candidates_per_sentence = 10000;
  // Cap on occurrence subsets per replacement call, larger subsets first.
  std::size_t max_occurrence_subsets = 64;
  // Support filter: pattern templates covering fewer sentences than
  // max(min_template_support, ceil(min_support_ratio * N)) are dropped and
  // their sentences reported as unexplained. Literal templates are exempt
  // (a literal always covers exactly its own sentence).
  std::size_t min_template_support = 2;
  double min_support_ratio = 0.0;
  // Budget and stopping rule for iterative non-terminal selection.
  std::size_t max_active_nonterminals = 8;
  double improvement_epsilon = 0.02;

  static constexpr std::size_t kUncapped =
      std::numeric_limits<std::size_t>::max();
};

// All templates obtained from `t` by replacing a non-empty subset of the
// occurrences of `terminal` inside literal segments with a placeholder for
// `nonterminal`. Occurrences are found leftmost-first, non-overlapping; all
// replaced occurrences in one call share the cardinal max+1 (cardinals may
// come out non-canonical; callers rename). Subsets are enumerated larger
// first, capped at `max_subsets`. No occurrence yields an empty result.
std::vector<Template> replace_terminal(
    const Template& t, std::string_view terminal,
    const std::string& nonterminal,
    std::size_t max_subsets = InductionConfig::kUncapped);

// The candidate templates for one sentence: every member generates the
// sentence, and the literal template is always included.
struct CandidateSet {
  std::size_t sentence_index = 0;
  std::vector<Template> templates;
  bool truncated = false;

  // The placeholder-free member, i.e. the sentence itself.
  const Template& literal() const;
};

// Sequentially folds the (terminal, non-terminal) pair list into the
// candidate set: starting from the literal sentence, each pair replaces
// matches in every current candidate and the renamed results are added.
CandidateSet candidate_templates(std::string_view sentence,
                                 const GroupedLexicon& pairs,
                                 const InductionConfig& cfg,
                                 std::size_t sentence_index = 0);

struct InducedTemplateSet {
  // Kept templates in greedy pick order.
  std::vector<Template> templates;
  // Restricted to ids the templates use.
  Lexicon lexicon;
  // Rendered template -> number of candidate sets containing it.
  std::map<std::string, std::size_t> support;
  // Literal fallbacks for sentences orphaned by the support filter.
  std::vector<Template> orphan_literals;
  std::vector<std::string> unexplained;

  std::size_t cover_size() const {
    return templates.size() + orphan_literals.size();
  }
};

// Greedy set cover over the candidate sets: repeatedly picks the template
// contained in the most not-yet-covered sets (ties: more placeholders, fewer
// literal characters, lexicographic render), then applies the support
// filter. Throws EmptyCandidateSet.
InducedTemplateSet greedy_hitting_set(const std::vector<CandidateSet>& sets,
                                      const Lexicon& lexicon,
                                      const InductionConfig& cfg);

struct InductionReport {
  struct Trial {
    std::string group_id;
    double usefulness = 0.0;
    std::size_t cover_size = 0;
    bool kept = false;
  };
  std::vector<Trial> trials;
  std::vector<std::size_t> truncated_sentences;
  std::vector<std::string> unexplained;
  std::map<std::string, std::size_t> support;
  std::size_t group_count = 0;
  std::size_t active_count = 0;
};

// Full induction: extracts terminal groups once, then grows the active
// non-terminal set greedily. Groups are tried in usefulness order
// (coverage x log2(1 + group size)); an activation is kept only when the
// cover shrinks by at least improvement_epsilon, otherwise it is rolled back
// and the next-best group is tried. Stops when no group helps or the budget
// is reached. Throws EmptyCorpus.
InducedTemplateSet induce(const SentenceCorpus& corpus,
                          const ExtractionConfig& ecfg,
                          const InductionConfig& icfg,
                          InductionReport* report = nullptr);

}  // namespace templar

#endif  // TEMPLAR_INDUCTION_HPP
