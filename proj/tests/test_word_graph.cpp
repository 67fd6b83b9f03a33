#include <doctest.h>

#include <set>

#include "templar/word_graph.hpp"

using namespace templar;

namespace {

SentenceCorpus corpus_of(std::vector<std::string> lines) {
  return SentenceCorpus::from_lines(lines);
}

const TerminalGroup* find_group(const std::vector<TerminalGroup>& groups,
                                const std::set<std::string>& terminals) {
  for (const auto& g : groups) {
    std::set<std::string> have;
    for (const auto& [text, support] : g.terminals) have.insert(text);
    if (have == terminals) return &g;
  }
  return nullptr;
}

}  // namespace

TEST_CASE("corpus loader dedupes and normalizes") {
  const SentenceCorpus corpus =
      corpus_of({"A is good", "  A   is good ", "", "B is good", "A is good"});
  CHECK(corpus.sentences ==
        std::vector<std::string>{"A is good", "B is good"});
}

TEST_CASE("word graph adjacency") {
  const ExtractionConfig cfg;
  const WordGraph g = build_word_graph(corpus_of({"A is good", "B is good"}), cfg);

  std::set<std::string> tokens;
  for (int n = 0; n < g.node_count(); ++n) tokens.insert(g.token(n));
  CHECK(tokens == std::set<std::string>{"<s>", "</s>", "A", "B", "is", "good"});

  auto node = [&](const std::string& text) {
    for (int n = 0; n < g.node_count(); ++n)
      if (g.token(n) == text) return n;
    return -1;
  };
  CHECK(g.edge_weight(WordGraph::kBos, node("A")) == 1);
  CHECK(g.edge_weight(WordGraph::kBos, node("B")) == 1);
  CHECK(g.edge_weight(node("A"), node("is")) == 1);
  CHECK(g.edge_weight(node("is"), node("good")) == 2);
  CHECK(g.edge_weight(node("good"), WordGraph::kEos) == 2);
  CHECK(g.edge_weight(node("good"), node("A")) == 0);

  const WordGraph single = build_word_graph(corpus_of({"x"}), cfg);
  CHECK(single.node_count() == 3);
  CHECK(single.edge_count() == 2);

  const WordGraph loop = build_word_graph(corpus_of({"a b a"}), cfg);
  auto lnode = [&](const std::string& text) {
    for (int n = 0; n < loop.node_count(); ++n)
      if (loop.token(n) == text) return n;
    return -1;
  };
  CHECK(loop.edge_weight(lnode("a"), lnode("b")) == 1);
  CHECK(loop.edge_weight(lnode("b"), lnode("a")) == 1);
}

TEST_CASE("every sentence is a BOS-EOS path in the graph") {
  const ExtractionConfig cfg;
  const SentenceCorpus corpus = corpus_of(
      {"the crew was kind", "the pilot was kind", "crew was crew", "x"});
  const WordGraph g = build_word_graph(corpus, cfg);
  REQUIRE(g.sentence_paths().size() == corpus.sentences.size());
  for (const auto& path : g.sentence_paths()) {
    REQUIRE(path.size() >= 2);
    CHECK(path.front() == WordGraph::kBos);
    CHECK(path.back() == WordGraph::kEos);
    for (std::size_t i = 0; i + 1 < path.size(); ++i)
      CHECK(g.edge_weight(path[i], path[i + 1]) >= 1);
  }
  CHECK_THROWS_AS(build_word_graph(corpus_of({}), cfg), EmptyCorpus);
}

TEST_CASE("terminal groups from shared contexts") {
  const ExtractionConfig cfg;
  const WordGraph g = build_word_graph(
      corpus_of({"A is good", "B is good", "C is good"}), cfg);
  const auto groups = extract_terminal_groups(g, cfg);
  const TerminalGroup* abc = find_group(groups, {"A", "B", "C"});
  REQUIRE(abc != nullptr);
  CHECK(abc->anchor.first == "<s>");
  CHECK(abc->anchor.second == "is");
  for (const auto& [text, support] : abc->terminals) CHECK(support == 1);
}

TEST_CASE("two-token terminals within k") {
  ExtractionConfig cfg;
  cfg.k = 2;
  const WordGraph g = build_word_graph(
      corpus_of({"yah acha viman hai", "yah achi seva hai"}), cfg);
  const auto groups = extract_terminal_groups(g, cfg);
  const TerminalGroup* pair = find_group(groups, {"acha viman", "achi seva"});
  REQUIRE(pair != nullptr);
  CHECK(pair->anchor == std::pair<std::string, std::string>{"yah", "hai"});

  // k = 1 cannot produce the two-token terminals.
  ExtractionConfig k1 = cfg;
  k1.k = 1;
  CHECK(find_group(extract_terminal_groups(build_word_graph(
                       corpus_of({"yah acha viman hai", "yah achi seva hai"}), k1),
                   k1),
                   {"acha viman", "achi seva"}) == nullptr);
}

TEST_CASE("no group from a single path") {
  const ExtractionConfig cfg;
  const WordGraph g = build_word_graph(corpus_of({"x y"}), cfg);
  CHECK(extract_terminal_groups(g, cfg).empty());
}

TEST_CASE("group terminals occur flanked in the corpus") {
  // A graph path mixing edges from different sentences is not a corpus
  // occurrence and is dropped at the default support threshold.
  const ExtractionConfig cfg;
  const SentenceCorpus corpus =
      corpus_of({"p a x", "q a y", "p b x", "q b y", "p c x"});
  const WordGraph g = build_word_graph(corpus, cfg);

  auto contains_run = [&](const std::string& sentence,
                          const std::vector<std::string>& run) {
    std::vector<std::string> padded = {"<s>"};
    for (auto& tok : tokenize(sentence, cfg.tokenizer)) padded.push_back(tok);
    padded.push_back("</s>");
    for (std::size_t i = 0; i + run.size() <= padded.size(); ++i) {
      if (std::equal(run.begin(), run.end(), padded.begin() + i)) return true;
    }
    return false;
  };

  const auto groups = extract_terminal_groups(g, cfg);
  CHECK(!groups.empty());
  for (const auto& group : groups) {
    for (const auto& [text, support] : group.terminals) {
      CHECK(support >= cfg.min_terminal_support);
      std::vector<std::string> run = {group.anchor.first};
      for (auto& tok : tokenize(text, cfg.tokenizer)) run.push_back(tok);
      run.push_back(group.anchor.second);
      int sentences_with_run = 0;
      for (const auto& s : corpus.sentences)
        if (contains_run(s, run)) ++sentences_with_run;
      CHECK(sentences_with_run == support);
      CHECK(sentences_with_run >= cfg.min_terminal_support);
    }
  }
}

TEST_CASE("raising min_terminal_support never adds terminals") {
  const SentenceCorpus corpus = corpus_of(
      {"the crew was fine", "the crew was fine today", "the cast was fine",
       "the cast was odd", "the crew was odd"});
  ExtractionConfig low;
  low.min_terminal_support = 1;
  ExtractionConfig high = low;
  high.min_terminal_support = 2;
  const WordGraph g = build_word_graph(corpus, low);
  const auto groups_low = extract_terminal_groups(g, low);
  const auto groups_high = extract_terminal_groups(g, high);

  auto collect = [](const std::vector<TerminalGroup>& groups) {
    std::set<std::pair<std::pair<std::string, std::string>, std::string>> out;
    for (const auto& g : groups)
      for (const auto& [text, support] : g.terminals)
        out.insert({g.anchor, text});
    return out;
  };
  const auto low_set = collect(groups_low);
  for (const auto& item : collect(groups_high)) CHECK(low_set.count(item));
}

TEST_CASE("extraction is deterministic") {
  const SentenceCorpus corpus = corpus_of(
      {"a p x", "a q x", "b p y", "b q y", "a p y", "b q x"});
  const ExtractionConfig cfg;
  const auto once =
      extract_terminal_groups(build_word_graph(corpus, cfg), cfg);
  const auto twice =
      extract_terminal_groups(build_word_graph(corpus, cfg), cfg);
  REQUIRE(once.size() == twice.size());
  for (std::size_t i = 0; i < once.size(); ++i) {
    CHECK(once[i].id == twice[i].id);
    CHECK(once[i].anchor == twice[i].anchor);
    CHECK(once[i].terminals == twice[i].terminals);
  }
}

TEST_CASE("grouped lexicon ordering") {
  std::vector<TerminalGroup> groups;
  groups.push_back({"KEY_1", {"<s>", "is"}, {{"A", 3}, {"BB", 3}, {"C", 1}}});
  groups.push_back({"KEY_2", {"is", "</s>"}, {{"zz", 5}}});

  const GroupedLexicon by_support = to_grouped_lexicon(groups);
  REQUIRE(by_support.pairs.size() == 4);
  CHECK(by_support.pairs[0] == std::pair<std::string, std::string>{"zz", "KEY_2"});
  CHECK(by_support.pairs[1] == std::pair<std::string, std::string>{"BB", "KEY_1"});
  CHECK(by_support.pairs[2] == std::pair<std::string, std::string>{"A", "KEY_1"});
  CHECK(by_support.pairs[3] == std::pair<std::string, std::string>{"C", "KEY_1"});

  const GroupedLexicon insertion =
      to_grouped_lexicon(groups, PairOrder::kInsertion);
  CHECK(insertion.pairs[0] == std::pair<std::string, std::string>{"A", "KEY_1"});
  CHECK(insertion.pairs[3] == std::pair<std::string, std::string>{"zz", "KEY_2"});

  CHECK(to_grouped_lexicon({}).pairs.empty());

  // Shared terminals across groups are all retained.
  std::vector<TerminalGroup> overlapping;
  overlapping.push_back({"KEY_1", {"a", "b"}, {{"Delhi", 2}, {"Paris", 2}}});
  overlapping.push_back({"KEY_2", {"c", "d"}, {{"Delhi", 2}, {"London", 2}}});
  const GroupedLexicon both = to_grouped_lexicon(overlapping);
  int delhi_count = 0;
  for (const auto& [text, id] : both.pairs)
    if (text == "Delhi") ++delhi_count;
  CHECK(delhi_count == 2);
}

TEST_CASE("unicode-word tokenizer splits punctuation") {
  CHECK(tokenize("yah hai.", Tokenizer::kUnicodeWord) ==
        std::vector<std::string>{"yah", "hai", "."});
  CHECK(tokenize("a,b c", Tokenizer::kUnicodeWord) ==
        std::vector<std::string>{"a", ",", "b", "c"});
  CHECK(tokenize("a,b c", Tokenizer::kWhitespace) ==
        std::vector<std::string>{"a,b", "c"});
}
