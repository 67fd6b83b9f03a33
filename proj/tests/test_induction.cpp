#include <doctest.h>

#include <algorithm>
#include <set>

#include "oracles.hpp"
#include "templar/induction.hpp"

using namespace templar;

namespace {

std::set<std::string> renders(const std::vector<Template>& templates) {
  std::set<std::string> out;
  for (const auto& t : templates) out.insert(render_template(t));
  return out;
}

GroupedLexicon pairs_of(
    std::initializer_list<std::pair<std::string, std::string>> pairs) {
  GroupedLexicon out;
  for (const auto& p : pairs) out.pairs.push_back(p);
  return out;
}

}  // namespace

TEST_CASE("replace_terminal reproduces the three-template example") {
  const Template t = parse_template(
      "#Paris is beautiful. {CITY-0} is cold. Paris is bigger.");
  const auto raw = replace_terminal(t, "Paris", "CITY");
  CHECK(renders(raw) ==
        std::set<std::string>{
            "#{CITY-1} is beautiful. {CITY-0} is cold. Paris is bigger.",
            "#Paris is beautiful. {CITY-0} is cold. {CITY-1} is bigger.",
            "#{CITY-1} is beautiful. {CITY-0} is cold. {CITY-1} is bigger."});

  std::vector<Template> renamed;
  for (const auto& r : raw) renamed.push_back(canonicalize_cardinals(r));
  CHECK(renders(renamed) ==
        std::set<std::string>{
            "#{CITY-0} is beautiful. {CITY-1} is cold. Paris is bigger.",
            "#Paris is beautiful. {CITY-0} is cold. {CITY-1} is bigger.",
            "#{CITY-0} is beautiful. {CITY-1} is cold. {CITY-0} is bigger."});
}

TEST_CASE("replace_terminal shares one fresh cardinal per call") {
  const Template t = Template::literal("delhi is delhi");
  const auto out = replace_terminal(t, "delhi", "CITY");
  std::set<std::string> got;
  for (const auto& r : out)
    got.insert(render_template(canonicalize_cardinals(r)));
  CHECK(got == std::set<std::string>{"{CITY-0} is delhi", "delhi is {CITY-0}",
                                     "{CITY-0} is {CITY-0}"});
}

TEST_CASE("replace_terminal edge cases") {
  CHECK(replace_terminal(Template::literal("x"), "y", "K").empty());
  CHECK(replace_terminal(Template::literal("x"), "", "K").empty());

  // Non-overlapping leftmost-first discovery: "aa" in "aaa" matches once.
  const auto out = replace_terminal(Template::literal("aaa"), "aa", "K");
  CHECK(renders(out) == std::set<std::string>{"{K-0}a"});

  // The subset cap keeps the largest subsets.
  const auto capped =
      replace_terminal(Template::literal("a b a b a"), "a", "K", 1);
  REQUIRE(capped.size() == 1);
  CHECK(render_template(capped[0]) == "{K-0} b {K-0} b {K-0}");
}

TEST_CASE("candidate_templates enumerates slot combinations") {
  const InductionConfig cfg;
  const CandidateSet set = candidate_templates(
      "Paris beats Delhi", pairs_of({{"Paris", "CITY"}, {"Delhi", "CITY"}}),
      cfg);
  CHECK(renders(set.templates) ==
        std::set<std::string>{"Paris beats Delhi", "{CITY-0} beats Delhi",
                              "Paris beats {CITY-0}",
                              "{CITY-0} beats {CITY-1}"});
  CHECK_FALSE(set.truncated);

  const CandidateSet none =
      candidate_templates("nothing matches", pairs_of({{"xyz", "K"}}), cfg);
  CHECK(renders(none.templates) == std::set<std::string>{"nothing matches"});

  const CandidateSet two = candidate_templates(
      "A is good", pairs_of({{"A", "KEY_1"}, {"good", "KEY_2"}}), cfg);
  CHECK(two.templates.size() == 4);
}

TEST_CASE("candidate truncation keeps the literal and flags") {
  InductionConfig cfg;
  cfg.max_candidates_per_sentence = 3;
  const CandidateSet set = candidate_templates(
      "a b c d",
      pairs_of({{"a", "K"}, {"b", "K"}, {"c", "K"}, {"d", "K"}}), cfg);
  CHECK(set.truncated);
  CHECK(set.templates.size() <= 3);
  CHECK(set.literal() == Template::literal("a b c d"));
  // Highest-placeholder candidates survive.
  std::size_t best = 0;
  for (const auto& t : set.templates)
    best = std::max(best, t.placeholder_count());
  CHECK(best >= 3);
}

TEST_CASE("every candidate generates its sentence (Lemma 1, small sweep)") {
  const InductionConfig cfg;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto inst = oracle::random_lemma_instance(seed);
    const CandidateSet set =
        candidate_templates(inst.sentence, inst.pairs, cfg);
    const Lexicon lex = inst.pairs.to_lexicon();
    for (const auto& t : set.templates) {
      CAPTURE(inst.sentence);
      CAPTURE(render_template(t));
      CHECK(generates(t, lex, inst.sentence));
    }
  }
}

TEST_CASE("uncapped candidates equal the span oracle (Lemma 2, small sweep)") {
  InductionConfig cfg;
  cfg.max_candidates_per_sentence = InductionConfig::kUncapped;
  cfg.max_occurrence_subsets = InductionConfig::kUncapped;
  int tested = 0;
  for (std::uint64_t seed = 0; tested < 60 && seed < 4000; ++seed) {
    const auto inst = oracle::random_lemma_instance(seed);
    if (oracle::has_self_overlap(inst.sentence, inst.pairs)) continue;
    ++tested;
    const CandidateSet set =
        candidate_templates(inst.sentence, inst.pairs, cfg);
    CHECK_FALSE(set.truncated);
    CHECK(renders(set.templates) ==
          oracle::all_generating_templates(inst.sentence, inst.pairs));
  }
  CHECK(tested == 60);
}

TEST_CASE("greedy hitting set basics") {
  const InductionConfig cfg;
  // T_1 = {a, b}, T_2 = {b, c}, T_3 = {c}: minimum cover is 2.
  const Template a = Template::literal("a");
  const Template b = Template::literal("b");
  const Template c = Template::literal("c");
  std::vector<CandidateSet> sets(3);
  sets[0] = {0, {a, b}, false};
  sets[1] = {1, {b, c}, false};
  sets[2] = {2, {c}, false};
  InductionConfig open = cfg;
  open.min_template_support = 1;
  const InducedTemplateSet cover = greedy_hitting_set(sets, Lexicon{}, open);
  CHECK(cover.templates.size() == 2);

  std::vector<std::vector<std::size_t>> membership = {{0, 1}, {1, 2}, {2}};
  CHECK(oracle::exact_min_hitting_set(membership, 3) == 2);

  // All sets share one template.
  std::vector<CandidateSet> shared(4);
  for (std::size_t i = 0; i < 4; ++i)
    shared[i] = {i, {Template::literal("s" + std::to_string(i)), a}, false};
  const InducedTemplateSet one = greedy_hitting_set(shared, Lexicon{}, open);
  CHECK(one.templates.size() == 1);
  CHECK(render_template(one.templates[0]) == "a");
  CHECK(one.support.at("a") == 4);

  std::vector<CandidateSet> empty_set(1);
  empty_set[0] = {0, {}, false};
  CHECK_THROWS_AS(greedy_hitting_set(empty_set, Lexicon{}, open),
                  EmptyCandidateSet);
}

TEST_CASE("support filter drops low-support patterns and reports orphans") {
  // 6 sentences match pattern P, 2 match only pattern Q.
  GroupedLexicon pairs = pairs_of({{"p1", "X"}, {"p2", "X"}, {"p3", "X"},
                                   {"q1", "Y"}, {"q2", "Y"}});
  std::vector<std::string> sentences;
  for (const char* x : {"p1", "p2", "p3"}) {
    sentences.push_back(std::string(x) + " is fine");
    sentences.push_back(std::string(x) + " is odd");
  }
  sentences.push_back("q1 went by");
  sentences.push_back("q2 went by");

  InductionConfig cfg;
  cfg.min_template_support = 3;
  std::vector<CandidateSet> sets;
  for (std::size_t i = 0; i < sentences.size(); ++i)
    sets.push_back(candidate_templates(sentences[i], pairs, cfg, i));
  const InducedTemplateSet result =
      greedy_hitting_set(sets, pairs.to_lexicon(), cfg);

  CHECK(renders(result.templates) ==
        std::set<std::string>{"{X-0} is fine", "{X-0} is odd"});
  CHECK(result.unexplained ==
        std::vector<std::string>{"q1 went by", "q2 went by"});
  CHECK(result.orphan_literals.size() == 2);
  // Only ids still used remain in the lexicon.
  CHECK(result.lexicon.entries.count("X") == 1);
  CHECK(result.lexicon.entries.count("Y") == 0);
}

TEST_CASE("induce recovers a two-slot template from its expansion") {
  Lexicon lex;
  lex.entries["CITY"] = {"Delhi", "Paris", "Tokyo"};
  lex.entries["ADJ"] = {"calm", "warm", "neat", "grand"};
  const Template truth = parse_template("{CITY-0} is {ADJ-0}");
  const SentenceCorpus corpus =
      SentenceCorpus::from_lines(expand(truth, lex));
  REQUIRE(corpus.sentences.size() == 12);

  ExtractionConfig ecfg;
  ecfg.k = 1;
  const InductionConfig icfg;
  InductionReport report;
  const InducedTemplateSet induced = induce(corpus, ecfg, icfg, &report);

  REQUIRE(induced.templates.size() == 1);
  const Template& got = induced.templates[0];
  CHECK(got.placeholder_count() == 2);
  REQUIRE(got.placeholder_ids().size() == 2);
  const std::string first = got.placeholder_ids()[0];
  const std::string second = got.placeholder_ids()[1];
  std::set<std::string> first_terms(induced.lexicon.entries.at(first).begin(),
                                    induced.lexicon.entries.at(first).end());
  std::set<std::string> second_terms(
      induced.lexicon.entries.at(second).begin(),
      induced.lexicon.entries.at(second).end());
  CHECK(first_terms == std::set<std::string>{"Delhi", "Paris", "Tokyo"});
  CHECK(second_terms == std::set<std::string>{"calm", "warm", "neat", "grand"});
  CHECK(induced.unexplained.empty());
  CHECK(report.active_count >= 2);
}

TEST_CASE("induce on a single sentence returns the literal") {
  const SentenceCorpus corpus = SentenceCorpus::from_lines({"just one line"});
  const InducedTemplateSet induced =
      induce(corpus, ExtractionConfig{}, InductionConfig{});
  REQUIRE(induced.templates.size() == 1);
  CHECK(render_template(induced.templates[0]) == "just one line");
  CHECK(induced.unexplained.empty());
  CHECK(induced.orphan_literals.empty());
}

TEST_CASE("induce output generates the corpus (Lemma 3, filters off)") {
  InductionConfig icfg;
  icfg.min_template_support = 1;
  for (std::uint64_t seed = 100; seed < 112; ++seed) {
    const Capability truth = oracle::random_ground_truth(seed);
    for (const auto& tmpl : truth.templates) {
      ExpandOptions eo;
      eo.limit = 12;
      eo.seed = seed;
      const SentenceCorpus corpus =
          SentenceCorpus::from_lines(expand(tmpl, truth.lexicon, eo));
      ExtractionConfig ecfg;
      ecfg.k = 1;
      const InducedTemplateSet induced = induce(corpus, ecfg, icfg);
      CHECK(induced.unexplained.empty());
      for (const auto& sentence : corpus.sentences) {
        bool covered = false;
        for (const auto& t : induced.templates)
          if (generates(t, induced.lexicon, sentence)) covered = true;
        CAPTURE(sentence);
        CHECK(covered);
      }
    }
  }
}

TEST_CASE("induction is deterministic") {
  Lexicon lex;
  lex.entries["A"] = {"pine", "oak", "fir"};
  lex.entries["B"] = {"north", "south"};
  const Template truth = parse_template("the {A-0} stands {B-0} of town");
  const SentenceCorpus corpus =
      SentenceCorpus::from_lines(expand(truth, lex));
  ExtractionConfig ecfg;
  ecfg.k = 1;
  const InducedTemplateSet once = induce(corpus, ecfg, InductionConfig{});
  const InducedTemplateSet twice = induce(corpus, ecfg, InductionConfig{});
  CHECK(renders(once.templates) == renders(twice.templates));
  CHECK(once.lexicon.entries == twice.lexicon.entries);
  CHECK(once.support == twice.support);
}
