#ifndef TEMPLAR_WORD_GRAPH_HPP
#define TEMPLAR_WORD_GRAPH_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "templar/template.hpp"

namespace templar {

// Example sentences for one source template. Sentences are deduplicated
// preserving first-seen order.
struct SentenceCorpus {
  std::vector<std::string> sentences;
  std::string language;
  std::optional<std::string> source_template_id;

  // Builds a corpus from raw lines: whitespace runs are collapsed to single
  // spaces, ends trimmed, blank lines skipped, duplicates removed.
  static SentenceCorpus from_lines(const std::vector<std::string>& lines,
                                   std::string language = {},
                                   std::optional<std::string> source_id = {});
};

enum class Tokenizer {
  kWhitespace,   // split on ASCII whitespace runs
  kUnicodeWord,  // runs of word characters; each punctuation char on its own
};

std::vector<std::string> tokenize(std::string_view sentence, Tokenizer tok);

struct ExtractionConfig {
  int k = 2;                     // max intermediate tokens per terminal
  int min_group_size = 2;        // min distinct terminals per group
  int min_terminal_support = 1;  // min sentences containing the terminal
  Tokenizer tokenizer = Tokenizer::kWhitespace;
};

// Directed graph over the corpus tokens plus BOS/EOS sentinels. An edge
// (A, B) exists iff token B immediately follows token A in some sentence;
// counts record the number of adjacent occurrences. The tokenized sentence
// paths are retained so terminal support can be measured against the corpus.
class WordGraph {
 public:
  static constexpr int kBos = 0;
  static constexpr int kEos = 1;

  int node_count() const { return static_cast<int>(tokens_.size()); }
  // Sentinels display as "<s>" and "</s>".
  const std::string& token(int node) const { return tokens_[node]; }
  // (target node, count) pairs sorted by target.
  const std::vector<std::pair<int, int>>& successors(int node) const {
    return adjacency_[node];
  }
  std::size_t edge_count() const;
  int edge_weight(int from, int to) const;

  // Node sequences per corpus sentence, including sentinels.
  const std::vector<std::vector<int>>& sentence_paths() const {
    return paths_;
  }

  friend WordGraph build_word_graph(const SentenceCorpus& corpus,
                                    const ExtractionConfig& cfg);

 private:
  std::vector<std::string> tokens_;
  std::vector<std::vector<std::pair<int, int>>> adjacency_;
  std::vector<std::vector<int>> paths_;
};

// Throws EmptyCorpus when no sentence survives normalization.
WordGraph build_word_graph(const SentenceCorpus& corpus,
                           const ExtractionConfig& cfg);

// A candidate lexicon: terminals found between the two anchor nodes, with
// per-terminal sentence support.
struct TerminalGroup {
  std::string id;  // KEY_1, KEY_2, ... in deterministic order
  std::pair<std::string, std::string> anchor;
  std::vector<std::pair<std::string, int>> terminals;  // sorted, (text, support)

  std::vector<std::string> terminal_strings() const;
  int total_support() const;
};

// Emits one group per ordered node pair with >= min_group_size distinct
// simple paths having 1..k intermediate nodes. Terminals below
// min_terminal_support (measured as sentences containing the anchored token
// run) are dropped before the size check; groups with identical terminal
// sets are merged keeping the first anchor in (left, right) lexicographic
// order.
std::vector<TerminalGroup> extract_terminal_groups(const WordGraph& graph,
                                                   const ExtractionConfig& cfg);

enum class PairOrder {
  kSupportDesc,  // support desc, longer terminal first, lexicographic
  kInsertion,    // group order, then terminal order within the group
};

GroupedLexicon to_grouped_lexicon(const std::vector<TerminalGroup>& groups,
                                  PairOrder order = PairOrder::kSupportDesc);

}  // namespace templar

#endif  // TEMPLAR_WORD_GRAPH_HPP
