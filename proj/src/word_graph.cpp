#include "templar/word_graph.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>

#include "templar/errors.hpp"

namespace templar {

namespace {

bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

std::string normalize_whitespace(std::string_view line) {
  std::string out;
  bool pending_space = false;
  for (char c : line) {
    if (is_ascii_space(c)) {
      if (!out.empty()) pending_space = true;
    } else {
      if (pending_space) out += ' ';
      pending_space = false;
      out += c;
    }
  }
  return out;
}

}  // namespace

SentenceCorpus SentenceCorpus::from_lines(
    const std::vector<std::string>& lines, std::string language,
    std::optional<std::string> source_id) {
  SentenceCorpus corpus;
  corpus.language = std::move(language);
  corpus.source_template_id = std::move(source_id);
  std::set<std::string> seen;
  for (const auto& line : lines) {
    std::string s = normalize_whitespace(line);
    if (s.empty()) continue;
    if (seen.insert(s).second) corpus.sentences.push_back(std::move(s));
  }
  return corpus;
}

std::vector<std::string> tokenize(std::string_view sentence, Tokenizer tok) {
  std::vector<std::string> tokens;
  if (tok == Tokenizer::kWhitespace) {
    std::string cur;
    for (char c : sentence) {
      if (is_ascii_space(c)) {
        if (!cur.empty()) tokens.push_back(std::move(cur)), cur.clear();
      } else {
        cur += c;
      }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
  }
  // kUnicodeWord: ASCII letters/digits/underscore and all bytes >= 0x80 are
  // word characters; ASCII punctuation becomes single-character tokens.
  std::string cur;
  for (char c : sentence) {
    const unsigned char u = static_cast<unsigned char>(c);
    const bool word = (u >= 0x80) || (c >= 'A' && c <= 'Z') ||
                      (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
                      c == '_';
    if (word) {
      cur += c;
    } else {
      if (!cur.empty()) tokens.push_back(std::move(cur)), cur.clear();
      if (!is_ascii_space(c)) tokens.push_back(std::string(1, c));
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

std::size_t WordGraph::edge_count() const {
  std::size_t n = 0;
  for (const auto& adj : adjacency_) n += adj.size();
  return n;
}

int WordGraph::edge_weight(int from, int to) const {
  for (const auto& [target, count] : adjacency_[from])
    if (target == to) return count;
  return 0;
}

WordGraph build_word_graph(const SentenceCorpus& corpus,
                           const ExtractionConfig& cfg) {
  if (corpus.sentences.empty()) throw EmptyCorpus("corpus has no sentences");

  WordGraph g;
  g.tokens_ = {"<s>", "</s>"};
  std::unordered_map<std::string, int> node_of;
  std::map<std::pair<int, int>, int> edges;

  auto intern = [&](const std::string& tok) {
    auto it = node_of.find(tok);
    if (it != node_of.end()) return it->second;
    const int id = static_cast<int>(g.tokens_.size());
    g.tokens_.push_back(tok);
    node_of.emplace(tok, id);
    return id;
  };

  for (const auto& sentence : corpus.sentences) {
    std::vector<int> path;
    path.push_back(WordGraph::kBos);
    for (const auto& tok : tokenize(sentence, cfg.tokenizer))
      path.push_back(intern(tok));
    path.push_back(WordGraph::kEos);
    for (std::size_t i = 0; i + 1 < path.size(); ++i)
      ++edges[{path[i], path[i + 1]}];
    g.paths_.push_back(std::move(path));
  }

  g.adjacency_.resize(g.tokens_.size());
  for (const auto& [edge, count] : edges)
    g.adjacency_[edge.first].emplace_back(edge.second, count);
  return g;
}

std::vector<std::string> TerminalGroup::terminal_strings() const {
  std::vector<std::string> out;
  out.reserve(terminals.size());
  for (const auto& [text, support] : terminals) out.push_back(text);
  return out;
}

int TerminalGroup::total_support() const {
  int n = 0;
  for (const auto& [text, support] : terminals) n += support;
  return n;
}

namespace {

// Number of sentences containing the node run [left, mids..., right]
// contiguously.
int anchored_support(const WordGraph& g, int left,
                     const std::vector<int>& mids, int right) {
  int support = 0;
  std::vector<int> run;
  run.reserve(mids.size() + 2);
  run.push_back(left);
  run.insert(run.end(), mids.begin(), mids.end());
  run.push_back(right);
  for (const auto& path : g.sentence_paths()) {
    if (path.size() < run.size()) continue;
    bool found = false;
    for (std::size_t i = 0; i + run.size() <= path.size() && !found; ++i) {
      found = std::equal(run.begin(), run.end(), path.begin() + i);
    }
    if (found) ++support;
  }
  return support;
}

struct PendingGroup {
  std::pair<std::string, std::string> anchor;
  std::vector<std::pair<std::string, int>> terminals;  // sorted by text
};

}  // namespace

std::vector<TerminalGroup> extract_terminal_groups(
    const WordGraph& g, const ExtractionConfig& cfg) {
  const int k = std::max(1, cfg.k);
  // (u, v) -> list of intermediate node sequences.
  std::map<std::pair<int, int>, std::vector<std::vector<int>>> paths_between;

  // Depth-bounded DFS over simple paths; cycles cannot recur because every
  // node on the current path is excluded.
  std::vector<int> path;
  std::vector<char> on_path(g.node_count(), 0);
  auto dfs = [&](auto&& self, int start, int node, int depth) -> void {
    for (const auto& [next, count] : g.successors(node)) {
      if (on_path[next]) continue;
      if (depth >= 1)  // 1..k intermediates collected so far
        paths_between[{start, next}].emplace_back(path.begin() + 1,
                                                  path.end());
      if (depth + 1 <= k) {
        path.push_back(next);
        on_path[next] = 1;
        self(self, start, next, depth + 1);
        on_path[next] = 0;
        path.pop_back();
      }
    }
  };
  for (int u = 0; u < g.node_count(); ++u) {
    path.assign(1, u);
    on_path.assign(g.node_count(), 0);
    on_path[u] = 1;
    dfs(dfs, u, u, 0);
  }

  // Order node pairs by anchor token text so group ids are stable.
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(paths_between.size());
  for (const auto& [pair, seqs] : paths_between) pairs.push_back(pair);
  std::sort(pairs.begin(), pairs.end(), [&](const auto& a, const auto& b) {
    const auto key_a = std::tie(g.token(a.first), g.token(a.second));
    const auto key_b = std::tie(g.token(b.first), g.token(b.second));
    if (key_a != key_b) return key_a < key_b;
    return a < b;
  });

  std::vector<PendingGroup> groups;
  std::set<std::vector<std::string>> seen_terminal_sets;
  for (const auto& [u, v] : pairs) {
    const auto& seqs = paths_between.at({u, v});
    std::vector<std::pair<std::string, int>> terminals;
    for (const auto& mids : seqs) {
      const int support = anchored_support(g, u, mids, v);
      if (support < cfg.min_terminal_support) continue;
      std::string text;
      for (std::size_t i = 0; i < mids.size(); ++i) {
        if (i) text += ' ';
        text += g.token(mids[i]);
      }
      terminals.emplace_back(std::move(text), support);
    }
    if (static_cast<int>(terminals.size()) < cfg.min_group_size) continue;
    std::sort(terminals.begin(), terminals.end());
    std::vector<std::string> texts;
    texts.reserve(terminals.size());
    for (const auto& [text, support] : terminals) texts.push_back(text);
    if (!seen_terminal_sets.insert(texts).second) continue;  // merged
    groups.push_back({{g.token(u), g.token(v)}, std::move(terminals)});
  }

  std::vector<TerminalGroup> out;
  out.reserve(groups.size());
  for (std::size_t i = 0; i < groups.size(); ++i) {
    out.push_back({"KEY_" + std::to_string(i + 1), std::move(groups[i].anchor),
                   std::move(groups[i].terminals)});
  }
  return out;
}

GroupedLexicon to_grouped_lexicon(const std::vector<TerminalGroup>& groups,
                                  PairOrder order) {
  GroupedLexicon out;
  if (order == PairOrder::kInsertion) {
    for (const auto& group : groups)
      for (const auto& [text, support] : group.terminals)
        out.pairs.emplace_back(text, group.id);
    return out;
  }
  struct Entry {
    const std::string* text;
    const std::string* id;
    int support;
    std::size_t group_index;
  };
  std::vector<Entry> entries;
  for (std::size_t gi = 0; gi < groups.size(); ++gi)
    for (const auto& [text, support] : groups[gi].terminals)
      entries.push_back({&text, &groups[gi].id, support, gi});
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.support != b.support) return a.support > b.support;
    if (a.text->size() != b.text->size()) return a.text->size() > b.text->size();
    if (*a.text != *b.text) return *a.text < *b.text;
    return a.group_index < b.group_index;
  });
  for (const Entry& e : entries) out.pairs.emplace_back(*e.text, *e.id);
  return out;
}

}  // namespace templar
