#include "templar/template.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "templar/hashing.hpp"

namespace templar {

bool is_valid_nonterminal_id(std::string_view id) {
  if (id.empty()) return false;
  for (char c : id) {
    const bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
                    (c >= '0' && c <= '9') || c == '_';
    if (!ok) return false;
  }
  return true;
}

Template::Template(std::vector<Segment> segments) {
  segments_.reserve(segments.size());
  for (auto& seg : segments) {
    if (auto* lit = std::get_if<std::string>(&seg)) {
      if (lit->empty()) continue;
      if (!segments_.empty()) {
        if (auto* prev = std::get_if<std::string>(&segments_.back())) {
          prev->append(*lit);
          continue;
        }
      }
      segments_.emplace_back(std::move(*lit));
    } else {
      const auto& ph = std::get<PlaceholderInstance>(seg);
      if (!is_valid_nonterminal_id(ph.id))
        throw MalformedPlaceholder("invalid non-terminal id: '" + ph.id + "'");
      if (ph.cardinal < 0)
        throw MalformedPlaceholder("negative cardinal for id '" + ph.id + "'");
      segments_.emplace_back(std::move(seg));
    }
  }
}

Template Template::literal(std::string text) {
  std::vector<Segment> segs;
  if (!text.empty()) segs.emplace_back(std::move(text));
  return Template(std::move(segs));
}

std::size_t Template::placeholder_count() const {
  std::size_t n = 0;
  for (const auto& seg : segments_)
    if (std::holds_alternative<PlaceholderInstance>(seg)) ++n;
  return n;
}

std::size_t Template::literal_size() const {
  std::size_t n = 0;
  for (const auto& seg : segments_)
    if (const auto* lit = std::get_if<std::string>(&seg)) n += lit->size();
  return n;
}

std::vector<std::string> Template::placeholder_ids() const {
  std::vector<std::string> ids;
  for (const auto& seg : segments_) {
    if (const auto* ph = std::get_if<PlaceholderInstance>(&seg)) {
      if (std::find(ids.begin(), ids.end(), ph->id) == ids.end())
        ids.push_back(ph->id);
    }
  }
  return ids;
}

int Template::max_cardinal(std::string_view id) const {
  int best = -1;
  for (const auto& seg : segments_) {
    if (const auto* ph = std::get_if<PlaceholderInstance>(&seg)) {
      if (ph->id == id) best = std::max(best, ph->cardinal);
    }
  }
  return best;
}

bool Template::has_canonical_cardinals() const {
  std::unordered_map<std::string, std::set<int>> seen;
  for (const auto& seg : segments_) {
    const auto* ph = std::get_if<PlaceholderInstance>(&seg);
    if (!ph) continue;
    auto& s = seen[ph->id];
    if (ph->cardinal > 0 && !s.count(ph->cardinal - 1)) return false;
    s.insert(ph->cardinal);
  }
  return true;
}

namespace detail {

std::vector<Segment> parse_segments(std::string_view text) {
  std::vector<Segment> segments;
  std::string literal;
  std::size_t i = 0;
  const std::size_t n = text.size();

  auto flush = [&] {
    if (!literal.empty()) {
      segments.emplace_back(std::move(literal));
      literal.clear();
    }
  };

  while (i < n) {
    const char c = text[i];
    if (c == '{') {
      if (i + 1 < n && text[i + 1] == '{') {
        literal += '{';
        i += 2;
        continue;
      }
      const std::size_t close = text.find('}', i + 1);
      if (close == std::string_view::npos)
        throw MalformedPlaceholder("unclosed placeholder at offset " +
                                   std::to_string(i) + " in \"" +
                                   std::string(text) + "\"");
      std::string_view inner = text.substr(i + 1, close - i - 1);
      std::string_view name = inner;
      int cardinal = 0;
      if (const std::size_t dash = inner.find('-');
          dash != std::string_view::npos) {
        name = inner.substr(0, dash);
        std::string_view num = inner.substr(dash + 1);
        const bool digits =
            !num.empty() && std::all_of(num.begin(), num.end(), [](char d) {
              return d >= '0' && d <= '9';
            });
        if (!digits || (num.size() > 1 && num.front() == '0'))
          throw MalformedPlaceholder("bad cardinal '" + std::string(num) +
                                     "' in placeholder {" + std::string(inner) +
                                     "}");
        if (num.size() > 9)
          throw MalformedPlaceholder("cardinal out of range in {" +
                                     std::string(inner) + "}");
        cardinal = std::stoi(std::string(num));
      }
      if (!is_valid_nonterminal_id(name))
        throw MalformedPlaceholder("bad non-terminal id '" + std::string(name) +
                                   "' in placeholder {" + std::string(inner) +
                                   "}");
      flush();
      segments.emplace_back(PlaceholderInstance{std::string(name), cardinal});
      i = close + 1;
    } else if (c == '}') {
      if (i + 1 < n && text[i + 1] == '}') {
        literal += '}';
        i += 2;
        continue;
      }
      throw MalformedPlaceholder("unescaped '}' at offset " +
                                 std::to_string(i) + " in \"" +
                                 std::string(text) + "\"");
    } else {
      literal += c;
      ++i;
    }
  }
  flush();
  return segments;
}

}  // namespace detail

Template parse_template(std::string_view text) {
  Template t(detail::parse_segments(text));
  if (!t.has_canonical_cardinals())
    throw CardinalGap("cardinal k > 0 before k-1 of the same id in \"" +
                      std::string(text) + "\"");
  return t;
}

std::string render_template(const Template& t) {
  std::string out;
  for (const auto& seg : t.segments()) {
    if (const auto* lit = std::get_if<std::string>(&seg)) {
      for (char c : *lit) {
        if (c == '{')
          out += "{{";
        else if (c == '}')
          out += "}}";
        else
          out += c;
      }
    } else {
      const auto& ph = std::get<PlaceholderInstance>(seg);
      out += '{';
      out += ph.id;
      out += '-';
      out += std::to_string(ph.cardinal);
      out += '}';
    }
  }
  return out;
}

Template canonicalize_cardinals(const Template& t) {
  std::unordered_map<std::string, std::unordered_map<int, int>> relabel;
  std::vector<Segment> segs;
  segs.reserve(t.segments().size());
  for (const auto& seg : t.segments()) {
    if (const auto* ph = std::get_if<PlaceholderInstance>(&seg)) {
      auto& table = relabel[ph->id];
      auto it = table.find(ph->cardinal);
      if (it == table.end())
        it = table.emplace(ph->cardinal, static_cast<int>(table.size())).first;
      segs.emplace_back(PlaceholderInstance{ph->id, it->second});
    } else {
      segs.push_back(seg);
    }
  }
  return Template(std::move(segs));
}

void Lexicon::validate() const {
  for (const auto& [id, terms] : entries) {
    if (!is_valid_nonterminal_id(id))
      throw MalformedPlaceholder("invalid lexicon id: '" + id + "'");
    if (terms.empty())
      throw Error("lexicon entry '" + id + "' has no terminals");
    std::unordered_set<std::string> seen;
    for (const auto& term : terms) {
      if (term.empty())
        throw Error("lexicon entry '" + id + "' contains an empty terminal");
      if (!seen.insert(term).second)
        throw Error("lexicon entry '" + id + "' repeats terminal '" + term +
                    "'");
    }
  }
}

Lexicon GroupedLexicon::to_lexicon() const {
  Lexicon lex;
  for (const auto& [terminal, id] : pairs) {
    auto& list = lex.entries[id];
    if (std::find(list.begin(), list.end(), terminal) == list.end())
      list.push_back(terminal);
  }
  return lex;
}

namespace {

struct Variable {
  std::string id;
  int cardinal;
};

// Distinct (id, cardinal) variables in first-occurrence order plus the
// per-id variable count, validated against the lexicon.
struct VariableLayout {
  std::vector<Variable> variables;
  // id -> indices into `variables`, in cardinal order of appearance.
  std::map<std::string, std::vector<std::size_t>> by_id;
};

VariableLayout collect_variables(const Template& t, const Lexicon& lex) {
  VariableLayout layout;
  for (const auto& seg : t.segments()) {
    const auto* ph = std::get_if<PlaceholderInstance>(&seg);
    if (!ph) continue;
    auto& idx = layout.by_id[ph->id];
    const bool known = std::any_of(
        idx.begin(), idx.end(), [&](std::size_t v) {
          return layout.variables[v].cardinal == ph->cardinal;
        });
    if (!known) {
      idx.push_back(layout.variables.size());
      layout.variables.push_back({ph->id, ph->cardinal});
    }
  }
  for (const auto& [id, idx] : layout.by_id) {
    auto it = lex.entries.find(id);
    if (it == lex.entries.end())
      throw MissingLexiconEntry("no lexicon entry for id '" + id + "'");
    if (it->second.size() < idx.size())
      throw InsufficientTerminals(
          "id '" + id + "' needs " + std::to_string(idx.size()) +
          " distinct terminals but the lexicon provides " +
          std::to_string(it->second.size()));
  }
  return layout;
}

}  // namespace

std::vector<std::string> expand(const Template& t, const Lexicon& lex,
                                const ExpandOptions& opts) {
  const VariableLayout layout = collect_variables(t, lex);

  // Bindings are enumerated id by id: for an id with m variables we walk all
  // m-permutations of its terminal list in lexicographic index order, which
  // keeps the output order deterministic.
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  std::map<std::string, std::unordered_map<int, const std::string*>> binding;

  std::function<void(std::map<std::string, std::vector<std::size_t>>::const_iterator)>
      recurse = [&](auto id_it) {
        if (id_it == layout.by_id.end()) {
          std::string sentence;
          for (const auto& seg : t.segments()) {
            if (const auto* lit = std::get_if<std::string>(&seg))
              sentence += *lit;
            else {
              const auto& ph = std::get<PlaceholderInstance>(seg);
              sentence += *binding[ph.id][ph.cardinal];
            }
          }
          if (seen.insert(sentence).second) out.push_back(std::move(sentence));
          return;
        }
        const auto& [id, var_indices] = *id_it;
        const auto& terms = lex.entries.at(id);
        const std::size_t m = var_indices.size();
        std::vector<std::size_t> pick;
        std::vector<bool> used(terms.size(), false);
        std::function<void()> choose = [&] {
          if (pick.size() == m) {
            for (std::size_t v = 0; v < m; ++v) {
              const Variable& var = layout.variables[var_indices[v]];
              binding[id][var.cardinal] = &terms[pick[v]];
            }
            recurse(std::next(id_it));
            return;
          }
          for (std::size_t i = 0; i < terms.size(); ++i) {
            if (used[i]) continue;
            used[i] = true;
            pick.push_back(i);
            choose();
            pick.pop_back();
            used[i] = false;
          }
        };
        choose();
      };
  recurse(layout.by_id.begin());

  if (opts.limit && *opts.limit < out.size()) {
    const std::uint64_t seed =
        opts.seed ^ fnv1a64(render_template(t)) ^ 0x7e4a5c3d2b1f0e9dULL;
    std::vector<std::string> sampled;
    sampled.reserve(*opts.limit);
    for (std::size_t idx : sample_indices(out.size(), *opts.limit, seed))
      sampled.push_back(std::move(out[idx]));
    return sampled;
  }
  return out;
}

namespace {

struct MatchState {
  const std::vector<Segment>* segments;
  std::string_view sentence;
  const Lexicon* lex;
  // id -> cardinal -> bound terminal.
  std::map<std::string, std::map<int, std::string_view>> bound;
};

bool match_from(MatchState& st, std::size_t seg_idx, std::size_t pos) {
  if (seg_idx == st.segments->size()) return pos == st.sentence.size();
  const Segment& seg = (*st.segments)[seg_idx];
  if (const auto* lit = std::get_if<std::string>(&seg)) {
    if (st.sentence.compare(pos, lit->size(), *lit) != 0) return false;
    return match_from(st, seg_idx + 1, pos + lit->size());
  }
  const auto& ph = std::get<PlaceholderInstance>(seg);
  auto& per_id = st.bound[ph.id];
  if (auto it = per_id.find(ph.cardinal); it != per_id.end()) {
    const std::string_view term = it->second;
    if (st.sentence.compare(pos, term.size(), term) != 0) return false;
    return match_from(st, seg_idx + 1, pos + term.size());
  }
  const auto lex_it = st.lex->entries.find(ph.id);
  if (lex_it == st.lex->entries.end()) return false;
  for (const std::string& term : lex_it->second) {
    bool taken = false;
    for (const auto& [card, used] : per_id) {
      if (used == term) {
        taken = true;
        break;
      }
    }
    if (taken) continue;  // distinct cardinals take distinct terminals
    if (st.sentence.compare(pos, term.size(), term) != 0) continue;
    per_id[ph.cardinal] = term;
    if (match_from(st, seg_idx + 1, pos + term.size())) return true;
    per_id.erase(ph.cardinal);
  }
  return false;
}

}  // namespace

bool generates(const Template& t, const Lexicon& lex,
               std::string_view sentence) {
  MatchState st{&t.segments(), sentence, &lex, {}};
  return match_from(st, 0, 0);
}

}  // namespace templar
