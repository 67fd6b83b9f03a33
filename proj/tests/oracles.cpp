#include "oracles.hpp"

#include <algorithm>
#include <functional>
#include <map>

#include "templar/hashing.hpp"

namespace templar::oracle {

namespace {

struct Span {
  std::size_t begin;
  std::size_t end;
  std::size_t pair;  // index into pairs.pairs
};

std::vector<Span> collect_spans(const std::string& sentence,
                                const GroupedLexicon& pairs) {
  std::vector<Span> spans;
  for (std::size_t pi = 0; pi < pairs.pairs.size(); ++pi) {
    const std::string& w = pairs.pairs[pi].first;
    if (w.empty()) continue;
    std::size_t pos = 0;
    while ((pos = sentence.find(w, pos)) != std::string::npos) {
      spans.push_back({pos, pos + w.size(), pi});
      ++pos;  // all positions, including overlapping ones
    }
  }
  std::sort(spans.begin(), spans.end(), [](const Span& a, const Span& b) {
    return std::tie(a.begin, a.end, a.pair) < std::tie(b.begin, b.end, b.pair);
  });
  return spans;
}

}  // namespace

std::set<std::string> all_generating_templates(const std::string& sentence,
                                               const GroupedLexicon& pairs) {
  const std::vector<Span> spans = collect_spans(sentence, pairs);
  std::set<std::string> out;

  std::vector<const Span*> chosen;
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == spans.size()) {
      // The cardinal assignment is forced: spans of one id with equal
      // terminals share a cardinal, distinct terminals get fresh ones in
      // first-occurrence order.
      std::vector<Segment> segs;
      std::map<std::string, std::map<std::string, int>> cardinal_of;
      std::size_t cursor = 0;
      for (const Span* span : chosen) {
        segs.emplace_back(sentence.substr(cursor, span->begin - cursor));
        const auto& [w, id] = pairs.pairs[span->pair];
        auto& table = cardinal_of[id];
        auto it = table.find(w);
        if (it == table.end())
          it = table.emplace(w, static_cast<int>(table.size())).first;
        segs.emplace_back(PlaceholderInstance{id, it->second});
        cursor = span->end;
      }
      segs.emplace_back(sentence.substr(cursor));
      out.insert(render_template(Template(std::move(segs))));
      return;
    }
    rec(i + 1);  // skip span i
    const std::size_t last_end = chosen.empty() ? 0 : chosen.back()->end;
    if (spans[i].begin >= last_end) {
      chosen.push_back(&spans[i]);
      rec(i + 1);
      chosen.pop_back();
    }
  };
  rec(0);
  return out;
}

bool has_self_overlap(const std::string& sentence,
                      const GroupedLexicon& pairs) {
  std::set<std::string> terminals;
  for (const auto& [w, id] : pairs.pairs) terminals.insert(w);
  for (const auto& w : terminals) {
    if (w.empty()) continue;
    std::vector<std::size_t> positions;
    std::size_t pos = 0;
    while ((pos = sentence.find(w, pos)) != std::string::npos) {
      positions.push_back(pos);
      ++pos;
    }
    for (std::size_t i = 1; i < positions.size(); ++i)
      if (positions[i] < positions[i - 1] + w.size()) return true;
  }
  return false;
}

namespace {

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

}  // namespace

std::size_t exact_min_hitting_set(
    const std::vector<std::vector<std::size_t>>& membership,
    std::size_t template_count) {
  if (membership.empty()) return 0;
  for (std::size_t size = 1; size <= template_count; ++size) {
    std::vector<std::size_t> combo(size);
    for (std::size_t i = 0; i < size; ++i) combo[i] = i;
    do {
      bool all_hit = true;
      for (const auto& members : membership) {
        bool hit = false;
        for (std::size_t t : members) {
          if (std::binary_search(combo.begin(), combo.end(), t)) {
            hit = true;
            break;
          }
        }
        if (!hit) {
          all_hit = false;
          break;
        }
      }
      if (all_hit) return size;
    } while (next_combination(combo, template_count));
  }
  return template_count + 1;  // unsatisfiable (empty candidate set)
}

std::size_t exact_min_generating_set(const std::vector<std::string>& sentences,
                                     const std::vector<Template>& pool,
                                     const Lexicon& lexicon) {
  std::vector<std::vector<std::size_t>> membership(sentences.size());
  for (std::size_t si = 0; si < sentences.size(); ++si)
    for (std::size_t ti = 0; ti < pool.size(); ++ti)
      if (generates(pool[ti], lexicon, sentences[si]))
        membership[si].push_back(ti);
  return exact_min_hitting_set(membership, pool.size());
}

LemmaInstance random_lemma_instance(std::uint64_t seed) {
  SplitMix64 rng(seed);
  static const std::vector<std::string> pool = {"ka", "bo", "si", "du",
                                                "re", "mo", "ti", "la"};
  static const std::vector<std::string> ids = {"K1", "K2", "K3"};
  static const std::string chars = "kabosidu";

  LemmaInstance inst;
  const std::size_t token_count = 1 + rng.below(8);
  std::vector<std::string> tokens;
  for (std::size_t i = 0; i < token_count; ++i)
    tokens.push_back(pool[rng.below(pool.size())]);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) inst.sentence += ' ';
    inst.sentence += tokens[i];
  }

  const std::size_t pair_count = 1 + rng.below(6);
  std::set<std::pair<std::string, std::string>> seen;
  for (std::size_t i = 0; i < pair_count; ++i) {
    std::string terminal;
    switch (rng.below(4)) {
      case 0:  // a sentence token (likely match)
        terminal = tokens[rng.below(tokens.size())];
        break;
      case 1:  // any pool token
        terminal = pool[rng.below(pool.size())];
        break;
      case 2: {  // an adjacent bigram from the sentence
        if (tokens.size() >= 2) {
          const std::size_t at = rng.below(tokens.size() - 1);
          terminal = tokens[at] + " " + tokens[at + 1];
        } else {
          terminal = tokens[0];
        }
        break;
      }
      default:  // a single character (sub-word match)
        terminal = std::string(1, chars[rng.below(chars.size())]);
        break;
    }
    const std::string id = ids[rng.below(ids.size())];
    if (seen.insert({terminal, id}).second)
      inst.pairs.pairs.emplace_back(terminal, id);
  }
  return inst;
}

Capability random_ground_truth(std::uint64_t seed) {
  SplitMix64 rng(seed);
  static const std::vector<std::string> literal_pool = {
      "alta",  "brim",  "corvo", "dune",  "ember", "folly", "grove",
      "harbor", "inlet", "jetty", "kiln",  "lagu",  "marsh", "nova",
      "osier", "pique", "quill", "ridge", "shoal", "tidal", "umber",
      "vale",  "weir",  "xylem", "yonder", "zephyr"};
  static const std::vector<std::string> terminal_pool = {
      "pim",  "qua",  "rix",  "sol",  "tam",  "ugo",  "vex",  "wob",
      "yar",  "zem",  "nilo", "kash", "lumo", "piro", "sava", "tiko",
      "runa", "mabi", "zolo", "ferd", "gani", "helo", "ibex", "jora",
      "kuno", "lira", "mino", "nops", "orik", "peli", "ratu", "simb",
      "talo", "umbo", "vanu", "wexo", "yamu", "zinc", "afar", "boke",
      "cedo", "dita", "egon", "fipa", "gubo", "hiti", "ilex", "joba"};

  std::vector<std::string> literals = literal_pool;
  std::vector<std::string> terminals = terminal_pool;
  for (std::size_t i = literals.size(); i > 1; --i)
    std::swap(literals[i - 1], literals[rng.below(i)]);
  for (std::size_t i = terminals.size(); i > 1; --i)
    std::swap(terminals[i - 1], terminals[rng.below(i)]);
  std::size_t next_literal = 0;
  std::size_t next_terminal = 0;

  Capability cap;
  cap.name = "ground_truth";
  const std::size_t template_count = 1 + rng.below(3);
  std::size_t id_counter = 0;
  for (std::size_t ti = 0; ti < template_count; ++ti) {
    const std::size_t placeholder_count = 1 + rng.below(3);

    // Each placeholder instance is either a fresh id or a higher cardinal
    // of the previous one (when the lexicon can still supply distinct
    // terminals).
    std::vector<PlaceholderInstance> placeholders;
    std::map<std::string, std::size_t> lexicon_size;
    for (std::size_t pi = 0; pi < placeholder_count; ++pi) {
      const bool can_repeat =
          !placeholders.empty() &&
          lexicon_size[placeholders.back().id] >
              static_cast<std::size_t>(placeholders.back().cardinal) + 1;
      if (can_repeat && rng.below(3) == 0) {
        const PlaceholderInstance& prev = placeholders.back();
        placeholders.push_back({prev.id, prev.cardinal + 1});
      } else {
        const std::string id = "G" + std::to_string(++id_counter);
        const std::size_t size = 2 + rng.below(4);  // 2..5 terminals
        std::vector<std::string> terms;
        for (std::size_t i = 0; i < size && next_terminal < terminals.size();
             ++i)
          terms.push_back(terminals[next_terminal++]);
        lexicon_size[id] = terms.size();
        cap.lexicon.entries.emplace(id, std::move(terms));
        placeholders.push_back({id, 0});
      }
    }

    auto draw_literal_words = [&](std::size_t count) {
      std::string text;
      for (std::size_t i = 0; i < count; ++i) {
        if (next_literal >= literals.size()) next_literal = 0;
        if (i) text += ' ';
        text += literals[next_literal++];
      }
      return text;
    };

    std::vector<Segment> segs;
    if (rng.below(2) == 0)
      segs.emplace_back(draw_literal_words(1 + rng.below(2)) + " ");
    for (std::size_t pi = 0; pi < placeholders.size(); ++pi) {
      segs.emplace_back(placeholders[pi]);
      if (pi + 1 < placeholders.size())
        segs.emplace_back(" " + draw_literal_words(1 + rng.below(2)) + " ");
    }
    if (rng.below(2) == 0)
      segs.emplace_back(" " + draw_literal_words(1 + rng.below(2)));
    cap.templates.emplace_back(std::move(segs));
  }
  return cap;
}

}  // namespace templar::oracle
