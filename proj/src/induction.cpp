#include "templar/induction.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "templar/errors.hpp"

namespace templar {

namespace {

struct Occurrence {
  std::size_t segment;  // index into t.segments()
  std::size_t offset;   // byte offset within that literal
};

// Leftmost-first non-overlapping occurrences of `w` in the literal segments.
std::vector<Occurrence> find_occurrences(const Template& t,
                                         std::string_view w) {
  std::vector<Occurrence> out;
  if (w.empty()) return out;
  for (std::size_t si = 0; si < t.segments().size(); ++si) {
    const auto* lit = std::get_if<std::string>(&t.segments()[si]);
    if (!lit) continue;
    std::size_t pos = 0;
    while ((pos = lit->find(w, pos)) != std::string::npos) {
      out.push_back({si, pos});
      pos += w.size();
    }
  }
  return out;
}

Template apply_replacement(const Template& t, std::string_view w,
                           const PlaceholderInstance& ph,
                           const std::vector<Occurrence>& chosen) {
  std::vector<Segment> segs;
  segs.reserve(t.segments().size() + 2 * chosen.size());
  std::size_t next = 0;
  for (std::size_t si = 0; si < t.segments().size(); ++si) {
    const auto& seg = t.segments()[si];
    const auto* lit = std::get_if<std::string>(&seg);
    if (!lit) {
      segs.push_back(seg);
      continue;
    }
    std::size_t cursor = 0;
    while (next < chosen.size() && chosen[next].segment == si) {
      const std::size_t at = chosen[next].offset;
      segs.emplace_back(lit->substr(cursor, at - cursor));
      segs.emplace_back(ph);
      cursor = at + w.size();
      ++next;
    }
    segs.emplace_back(lit->substr(cursor));
  }
  return Template(std::move(segs));
}

// Advances `c` to the next lexicographic size-|c| combination of {0..n-1};
// false when exhausted.
bool next_combination(std::vector<std::size_t>& c, std::size_t n) {
  const std::size_t size = c.size();
  std::size_t i = size;
  while (i > 0) {
    --i;
    if (c[i] != i + n - size) {
      ++c[i];
      for (std::size_t j = i + 1; j < size; ++j) c[j] = c[j - 1] + 1;
      return true;
    }
  }
  return false;
}

// Visits index combinations of {0..n-1} by decreasing size, lexicographic
// within a size, stopping after `cap` subsets.
template <typename Fn>
void for_each_subset_larger_first(std::size_t n, std::size_t cap, Fn&& fn) {
  std::size_t emitted = 0;
  for (std::size_t size = n; size >= 1; --size) {
    std::vector<std::size_t> combo(size);
    for (std::size_t i = 0; i < size; ++i) combo[i] = i;
    do {
      if (emitted >= cap) return;
      fn(combo);
      ++emitted;
    } while (next_combination(combo, n));
  }
}

}  // namespace

std::vector<Template> replace_terminal(const Template& t,
                                       std::string_view terminal,
                                       const std::string& nonterminal,
                                       std::size_t max_subsets) {
  std::vector<Template> out;
  const std::vector<Occurrence> occurrences = find_occurrences(t, terminal);
  if (occurrences.empty()) return out;

  // One shared fresh cardinal for every occurrence replaced in this call;
  // distinct cardinals would forbid equal terminals and the result could no
  // longer generate the source sentence.
  const PlaceholderInstance fresh{nonterminal,
                                  t.max_cardinal(nonterminal) + 1};

  for_each_subset_larger_first(
      occurrences.size(), max_subsets, [&](const std::vector<std::size_t>& combo) {
        std::vector<Occurrence> chosen;
        chosen.reserve(combo.size());
        for (std::size_t idx : combo) chosen.push_back(occurrences[idx]);
        out.push_back(apply_replacement(t, terminal, fresh, chosen));
      });
  return out;
}

const Template& CandidateSet::literal() const {
  for (const auto& t : templates)
    if (t.placeholder_count() == 0) return t;
  throw EmptyCandidateSet("candidate set lost its literal template");
}

namespace {

struct RankedCandidate {
  Template tmpl;
  std::string render;
  std::size_t placeholders;
  std::size_t literal_chars;
};

bool truncation_rank(const RankedCandidate& a, const RankedCandidate& b) {
  if (a.placeholders != b.placeholders) return a.placeholders > b.placeholders;
  if (a.literal_chars != b.literal_chars)
    return a.literal_chars < b.literal_chars;
  return a.render < b.render;
}

}  // namespace

CandidateSet candidate_templates(std::string_view sentence,
                                 const GroupedLexicon& pairs,
                                 const InductionConfig& cfg,
                                 std::size_t sentence_index) {
  CandidateSet result;
  result.sentence_index = sentence_index;

  std::vector<RankedCandidate> current;
  std::unordered_set<std::string> seen;
  auto add = [&](Template t) {
    std::string r = render_template(t);
    if (!seen.insert(r).second) return;
    const std::size_t ph = t.placeholder_count();
    const std::size_t lits = t.literal_size();
    current.push_back({std::move(t), std::move(r), ph, lits});
  };
  add(Template::literal(std::string(sentence)));

  const std::size_t cap = std::max<std::size_t>(1, cfg.max_candidates_per_sentence);
  for (const auto& [terminal, id] : pairs) {
    std::vector<Template> fresh;
    for (const auto& cand : current) {
      for (Template& replaced :
           replace_terminal(cand.tmpl, terminal, id, cfg.max_occurrence_subsets))
        fresh.push_back(canonicalize_cardinals(replaced));
    }
    for (Template& t : fresh) add(std::move(t));

    if (current.size() > cap) {
      // Keep the literal plus the highest-ranked others: generalized
      // candidates carry the hitting-set value. Only the initial literal is
      // placeholder-free, so it is identified by its placeholder count.
      std::vector<RankedCandidate> kept;
      kept.reserve(cap);
      std::vector<RankedCandidate> rest;
      rest.reserve(current.size());
      for (auto& cand : current) {
        if (cand.placeholders == 0)
          kept.push_back(std::move(cand));
        else
          rest.push_back(std::move(cand));
      }
      std::sort(rest.begin(), rest.end(), truncation_rank);
      for (auto& cand : rest) {
        if (kept.size() >= cap) break;
        kept.push_back(std::move(cand));
      }
      seen.clear();
      for (const auto& cand : kept) seen.insert(cand.render);
      current = std::move(kept);
      result.truncated = true;
    }
  }

  result.templates.reserve(current.size());
  for (auto& cand : current) result.templates.push_back(std::move(cand.tmpl));
  return result;
}

namespace {

struct CoverEntry {
  Template tmpl;
  std::vector<std::size_t> member_of;  // candidate-set indices, ascending
  std::size_t placeholders;
  std::size_t literal_chars;
};

}  // namespace

InducedTemplateSet greedy_hitting_set(const std::vector<CandidateSet>& sets,
                                      const Lexicon& lexicon,
                                      const InductionConfig& cfg) {
  const std::size_t n = sets.size();
  std::map<std::string, CoverEntry> entries;
  for (std::size_t i = 0; i < n; ++i) {
    if (sets[i].templates.empty())
      throw EmptyCandidateSet("candidate set " + std::to_string(i) +
                              " is empty");
    for (const auto& t : sets[i].templates) {
      auto [it, inserted] = entries.try_emplace(render_template(t));
      if (inserted) {
        it->second.tmpl = t;
        it->second.placeholders = t.placeholder_count();
        it->second.literal_chars = t.literal_size();
      }
      it->second.member_of.push_back(i);
    }
  }

  std::vector<char> covered(n, 0);
  std::size_t covered_count = 0;
  std::vector<const std::string*> picked;  // keys into `entries`

  while (covered_count < n) {
    const std::string* best_key = nullptr;
    const CoverEntry* best = nullptr;
    std::size_t best_gain = 0;
    for (const auto& [render, entry] : entries) {
      std::size_t gain = 0;
      for (std::size_t i : entry.member_of)
        if (!covered[i]) ++gain;
      if (gain == 0) continue;
      bool better = false;
      if (!best) {
        better = true;
      } else if (gain != best_gain) {
        better = gain > best_gain;
      } else if (entry.placeholders != best->placeholders) {
        better = entry.placeholders > best->placeholders;
      } else if (entry.literal_chars != best->literal_chars) {
        better = entry.literal_chars < best->literal_chars;
      }  // map order already ascends by render, so first wins remaining ties
      if (better) {
        best_key = &render;
        best = &entry;
        best_gain = gain;
      }
    }
    if (!best) break;  // unreachable: every set is non-empty
    for (std::size_t i : best->member_of) {
      if (!covered[i]) {
        covered[i] = 1;
        ++covered_count;
      }
    }
    picked.push_back(best_key);
  }

  // Support filter. Support counts every candidate set the template belongs
  // to, not only the ones it was credited with covering.
  const std::size_t threshold = std::max<std::size_t>(
      cfg.min_template_support,
      static_cast<std::size_t>(
          std::ceil(cfg.min_support_ratio * static_cast<double>(n))));

  InducedTemplateSet out;
  std::vector<const CoverEntry*> kept;
  for (const std::string* key : picked) {
    const CoverEntry& entry = entries.at(*key);
    const std::size_t support = entry.member_of.size();
    out.support[*key] = support;
    const bool literal_template = entry.placeholders == 0;
    if (!literal_template && support < threshold) continue;
    kept.push_back(&entry);
    out.templates.push_back(entry.tmpl);
  }

  std::vector<char> explained(n, 0);
  for (const CoverEntry* entry : kept)
    for (std::size_t i : entry->member_of) explained[i] = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (explained[i]) continue;
    const Template& lit = sets[i].literal();
    out.orphan_literals.push_back(lit);
    std::string sentence;
    if (!lit.segments().empty())
      sentence = std::get<std::string>(lit.segments().front());
    out.unexplained.push_back(std::move(sentence));
  }

  std::unordered_set<std::string> used_ids;
  for (const auto& t : out.templates)
    for (const auto& id : t.placeholder_ids()) used_ids.insert(id);
  for (const auto& [id, terms] : lexicon.entries)
    if (used_ids.count(id)) out.lexicon.entries.emplace(id, terms);
  return out;
}

namespace {

struct GroupScore {
  std::size_t index;
  double usefulness;
  std::size_t total_length;
};

// Support-desc pair ordering over a pointer selection, mirroring
// to_grouped_lexicon(). Groups are passed pre-sorted by id so the relative
// order of untouched pairs is stable while the active set grows.
GroupedLexicon flatten_groups(const std::vector<const TerminalGroup*>& groups) {
  struct Entry {
    const std::string* text;
    const std::string* id;
    int support;
    std::size_t group_index;
  };
  std::vector<Entry> entries;
  for (std::size_t gi = 0; gi < groups.size(); ++gi)
    for (const auto& [text, support] : groups[gi]->terminals)
      entries.push_back({&text, &groups[gi]->id, support, gi});
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.support != b.support) return a.support > b.support;
    if (a.text->size() != b.text->size()) return a.text->size() > b.text->size();
    if (*a.text != *b.text) return *a.text < *b.text;
    return *a.id < *b.id;
  });
  GroupedLexicon out;
  for (const Entry& e : entries) out.pairs.emplace_back(*e.text, *e.id);
  return out;
}

}  // namespace

InducedTemplateSet induce(const SentenceCorpus& corpus,
                          const ExtractionConfig& ecfg,
                          const InductionConfig& icfg,
                          InductionReport* report) {
  const WordGraph graph = build_word_graph(corpus, ecfg);
  const std::vector<TerminalGroup> groups = extract_terminal_groups(graph, ecfg);
  const std::size_t n = corpus.sentences.size();
  if (report) report->group_count = groups.size();

  // Static usefulness: corpus coverage weighted by log group size. Bigger
  // and broader groups are tried first; the improvement gate below decides
  // whether an activation actually stays.
  std::vector<GroupScore> scores;
  scores.reserve(groups.size());
  std::vector<std::vector<std::size_t>> match_lists(groups.size());
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    std::size_t matched = 0;
    std::size_t total_length = 0;
    for (const auto& [text, support] : groups[gi].terminals)
      total_length += text.size();
    for (std::size_t si = 0; si < n; ++si) {
      const std::string& s = corpus.sentences[si];
      for (const auto& [text, support] : groups[gi].terminals) {
        if (s.find(text) != std::string::npos) {
          ++matched;
          match_lists[gi].push_back(si);
          break;
        }
      }
    }
    const double usefulness =
        static_cast<double>(matched) *
        std::log2(1.0 + static_cast<double>(groups[gi].terminals.size()));
    scores.push_back({gi, usefulness, total_length});
  }
  std::sort(scores.begin(), scores.end(),
            [](const GroupScore& a, const GroupScore& b) {
              if (a.usefulness != b.usefulness)
                return a.usefulness > b.usefulness;
              if (a.total_length != b.total_length)
                return a.total_length < b.total_length;
              return a.index < b.index;
            });

  std::vector<char> active(groups.size(), 0);
  std::vector<const TerminalGroup*> active_groups;

  auto lexicon_for = [&](const std::vector<const TerminalGroup*>& gs) {
    Lexicon lex;
    for (const TerminalGroup* g : gs)
      lex.entries.emplace(g->id, g->terminal_strings());
    return lex;
  };

  // Baseline: no non-terminals, every sentence its own literal.
  std::vector<CandidateSet> base(n);
  for (std::size_t si = 0; si < n; ++si)
    base[si] = candidate_templates(corpus.sentences[si], {}, icfg, si);
  InducedTemplateSet current =
      greedy_hitting_set(base, lexicon_for(active_groups), icfg);
  std::size_t current_size = current.cover_size();

  while (active_groups.size() < icfg.max_active_nonterminals) {
    bool improved = false;
    for (const GroupScore& gs : scores) {
      if (active[gs.index]) continue;
      const TerminalGroup& group = groups[gs.index];

      // Only sentences containing one of the group's terminals can change.
      std::vector<const TerminalGroup*> trial_groups = active_groups;
      trial_groups.push_back(&group);
      std::sort(trial_groups.begin(), trial_groups.end(),
                [](const TerminalGroup* a, const TerminalGroup* b) {
                  return a->id < b->id;
                });
      const GroupedLexicon trial_pairs = flatten_groups(trial_groups);
      std::vector<CandidateSet> trial = base;
      for (std::size_t si : match_lists[gs.index])
        trial[si] =
            candidate_templates(corpus.sentences[si], trial_pairs, icfg, si);

      InducedTemplateSet trial_result =
          greedy_hitting_set(trial, lexicon_for(trial_groups), icfg);
      const std::size_t trial_size = trial_result.cover_size();
      if (report)
        report->trials.push_back({group.id, gs.usefulness, trial_size, false});

      const double required =
          (1.0 - icfg.improvement_epsilon) * static_cast<double>(current_size);
      if (static_cast<double>(trial_size) <= required) {
        active[gs.index] = 1;
        active_groups = std::move(trial_groups);
        base = std::move(trial);
        current = std::move(trial_result);
        current_size = trial_size;
        if (report) report->trials.back().kept = true;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }

  if (report) {
    report->active_count = active_groups.size();
    report->unexplained = current.unexplained;
    report->support.clear();
    for (const auto& t : current.templates)
      report->support[render_template(t)] =
          current.support.at(render_template(t));
    report->truncated_sentences.clear();
    for (std::size_t si = 0; si < n; ++si)
      if (base[si].truncated) report->truncated_sentences.push_back(si);
  }
  return current;
}

}  // namespace templar
