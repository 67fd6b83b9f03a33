// Test-only brute-force reference implementations. These stay independent
// of the library's candidate-generation path: templates are enumerated from
// raw substring spans and minima are found by exhaustive subset search.
#ifndef TEMPLAR_TESTS_ORACLES_HPP
#define TEMPLAR_TESTS_ORACLES_HPP

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "templar/checklist.hpp"
#include "templar/induction.hpp"
#include "templar/template.hpp"

namespace templar::oracle {

// Every canonical template over L's ids that generates `sentence`, as
// rendered strings. Enumerates all sets of pairwise non-overlapping
// (occurrence, pair) spans; the cardinal assignment per span set is unique
// under the cardinal convention, so each set maps to exactly one canonical
// template.
std::set<std::string> all_generating_templates(const std::string& sentence,
                                               const GroupedLexicon& pairs);

// True when some terminal has two overlapping occurrences in `sentence`
// (the one configuration where greedy leftmost matching and exhaustive span
// enumeration diverge).
bool has_self_overlap(const std::string& sentence, const GroupedLexicon& pairs);

// Size of the smallest subset of templates (columns) hitting every
// candidate set; `membership[i]` lists the template indices present in
// candidate set i. Exhaustive search by increasing size.
std::size_t exact_min_hitting_set(
    const std::vector<std::vector<std::size_t>>& membership,
    std::size_t template_count);

// Size of the smallest subset of `pool` such that every sentence is
// generated by some member (via generates()).
std::size_t exact_min_generating_set(const std::vector<std::string>& sentences,
                                     const std::vector<Template>& pool,
                                     const Lexicon& lexicon);

// Random instance for the candidate-generation lemmas: a sentence and a
// pair list over small token pools.
struct LemmaInstance {
  std::string sentence;
  GroupedLexicon pairs;
};

LemmaInstance random_lemma_instance(std::uint64_t seed);

// Random ground-truth capability for round-trip recovery: templates use
// single-token terminals, distinct literal words, and ids with disjoint
// terminal sets, so the grammar is identifiable from its expansion.
Capability random_ground_truth(std::uint64_t seed);

}  // namespace templar::oracle

#endif  // TEMPLAR_TESTS_ORACLES_HPP
