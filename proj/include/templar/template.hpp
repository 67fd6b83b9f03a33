#ifndef TEMPLAR_TEMPLATE_HPP
#define TEMPLAR_TEMPLATE_HPP

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "templar/errors.hpp"

namespace templar {

// A placeholder names a non-terminal plus a cardinal. Equal cardinals of one
// non-terminal always receive the same terminal when a sentence is generated;
// distinct cardinals must receive distinct terminals.
struct PlaceholderInstance {
  std::string id;
  int cardinal = 0;

  friend auto operator<=>(const PlaceholderInstance&,
                          const PlaceholderInstance&) = default;
};

// A segment is either raw literal text or a placeholder.
using Segment = std::variant<std::string, PlaceholderInstance>;

bool is_valid_nonterminal_id(std::string_view id);

// A sentence pattern: an alternating sequence of literal text and
// placeholders. Construction normalizes the segment list (adjacent literals
// merged, empty literals dropped) so structural equality is well defined.
//
// The cardinal convention — cardinal k > 0 may appear only after cardinal
// k-1 of the same id has appeared — is *not* enforced by the constructor:
// intermediate templates produced during induction legitimately violate it
// and are repaired by canonicalize_cardinals(). parse_template() does
// enforce it, so templates read from files are always canonical.
class Template {
 public:
  Template() = default;
  explicit Template(std::vector<Segment> segments);

  static Template literal(std::string text);

  const std::vector<Segment>& segments() const { return segments_; }
  bool operator==(const Template&) const = default;

  std::size_t placeholder_count() const;
  // Total number of literal characters.
  std::size_t literal_size() const;
  // Distinct placeholder ids in first-occurrence order.
  std::vector<std::string> placeholder_ids() const;
  // Largest cardinal used for `id`, or -1 if the id does not occur.
  int max_cardinal(std::string_view id) const;
  bool has_canonical_cardinals() const;

 private:
  std::vector<Segment> segments_;
};

// Textual syntax: placeholders are written `{NAME}` or `{NAME-k}` where NAME
// is [A-Za-z0-9_]+ and k a non-negative decimal without leading zeros;
// `{NAME}` is shorthand for `{NAME-0}`. Literal braces are escaped as `{{`
// and `}}`.
//
// Throws MalformedPlaceholder on syntax errors and CardinalGap when the
// cardinal convention is violated.
Template parse_template(std::string_view text);

// render_template(parse_template(x)) == x for canonical inputs (after the
// `{NAME}` -> `{NAME-0}` rewrite); placeholders always render with an
// explicit cardinal.
std::string render_template(const Template& t);

// Relabels cardinals per id by order of first occurrence (first-seen old
// cardinal -> 0, next distinct -> 1, ...). Idempotent; literal structure is
// untouched. Renaming never changes the language generated.
Template canonicalize_cardinals(const Template& t);

namespace detail {
// Lenient parse: syntax checked, cardinal convention not. Used to build raw
// templates in tests and linting.
std::vector<Segment> parse_segments(std::string_view text);
}  // namespace detail

// Terminals per non-terminal id. Lists are ordered and duplicate-free.
struct Lexicon {
  std::map<std::string, std::vector<std::string>> entries;

  bool operator==(const Lexicon&) const = default;

  // Throws MalformedPlaceholder / Error on invalid ids, empty or duplicate
  // terminals.
  void validate() const;
};

// The flattened (terminal, non-terminal) pair list consumed sequentially by
// candidate generation. Order is significant.
struct GroupedLexicon {
  std::vector<std::pair<std::string, std::string>> pairs;

  Lexicon to_lexicon() const;
};

struct ExpandOptions {
  std::optional<std::size_t> limit;
  std::uint64_t seed = 0;
};

// All sentences generated by `t` under `lex`: each (id, cardinal) variable
// is bound to one terminal, equal cardinals of one id share a binding and
// distinct cardinals must differ. Substitution is raw string splicing.
// Result is deduplicated, in a deterministic order; when `limit` is set a
// seeded uniform subsample is returned instead.
//
// Throws MissingLexiconEntry / InsufficientTerminals.
std::vector<std::string> expand(const Template& t, const Lexicon& lex,
                                const ExpandOptions& opts = {});

// Membership test: true iff `sentence` is generated by `t` under `lex`.
// Backtracking match over segments honoring the cardinal constraints; agrees
// with expand() by construction.
bool generates(const Template& t, const Lexicon& lex,
               std::string_view sentence);

}  // namespace templar

#endif  // TEMPLAR_TEMPLATE_HPP
