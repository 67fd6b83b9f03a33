#ifndef TEMPLAR_CHECKLIST_HPP
#define TEMPLAR_CHECKLIST_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "templar/template.hpp"

namespace templar {

struct Capability {
  std::string name;
  std::vector<Template> templates;
  Lexicon lexicon;
};

// A per-capability collection of templates plus lexicons; the document the
// pipeline consumes and produces. Every id referenced by a template must
// have an entry in its capability's lexicon.
struct CheckList {
  std::string language;
  std::vector<Capability> capabilities;

  // Throws MissingLexiconEntry naming the offending capability/template.
  void validate() const;
};

// JSON document format:
//   {"language": str,
//    "capabilities": [{"name": str, "templates": [str],
//                      "lexicon": {ID: [str]}}]}
// Templates are stored in the textual syntax; files are UTF-8.
CheckList checklist_from_json_text(const std::string& text);
CheckList load_checklist(const std::filesystem::path& path);
std::string checklist_to_json_text(const CheckList& cl);
void save_checklist(const CheckList& cl, const std::filesystem::path& path);

struct LintIssue {
  enum class Severity { kWarning, kError };
  Severity severity;
  std::string capability;
  std::string message;
};

// Non-fatal quality checks: repeated (id, cardinal) placeholder instances,
// lexicons too small to satisfy distinct-cardinal expansion, unused ids.
std::vector<LintIssue> lint_checklist(const CheckList& cl);

// Atomic file write: content lands under `path` via rename, so a failed run
// never leaves a truncated artifact.
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content);

std::string sanitize_filename(std::string_view name);

}  // namespace templar

#endif  // TEMPLAR_CHECKLIST_HPP
