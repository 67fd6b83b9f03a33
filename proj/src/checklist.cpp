#include "templar/checklist.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "templar/errors.hpp"

namespace templar {

using nlohmann::json;

void CheckList::validate() const {
  for (const auto& cap : capabilities) {
    cap.lexicon.validate();
    for (const auto& t : cap.templates) {
      for (const auto& id : t.placeholder_ids()) {
        if (!cap.lexicon.entries.count(id))
          throw MissingLexiconEntry("capability '" + cap.name +
                                    "': template \"" + render_template(t) +
                                    "\" uses id '" + id +
                                    "' with no lexicon entry");
      }
    }
  }
}

CheckList checklist_from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid checklist JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("language") ||
      !doc.contains("capabilities"))
    throw ConfigError("checklist JSON must have 'language' and 'capabilities'");

  CheckList cl;
  cl.language = doc.at("language").get<std::string>();
  for (const auto& cap_doc : doc.at("capabilities")) {
    Capability cap;
    cap.name = cap_doc.at("name").get<std::string>();
    for (const auto& tmpl : cap_doc.at("templates")) {
      try {
        cap.templates.push_back(parse_template(tmpl.get<std::string>()));
      } catch (const Error& e) {
        throw ConfigError("capability '" + cap.name + "': template \"" +
                          tmpl.get<std::string>() + "\": " + e.what());
      }
    }
    if (cap_doc.contains("lexicon")) {
      for (const auto& [id, terms] : cap_doc.at("lexicon").items()) {
        std::vector<std::string> list;
        for (const auto& term : terms) list.push_back(term.get<std::string>());
        cap.lexicon.entries.emplace(id, std::move(list));
      }
    }
    cl.capabilities.push_back(std::move(cap));
  }
  cl.validate();
  return cl;
}

CheckList load_checklist(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open checklist file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return checklist_from_json_text(buf.str());
}

std::string checklist_to_json_text(const CheckList& cl) {
  json doc;
  doc["language"] = cl.language;
  doc["capabilities"] = json::array();
  for (const auto& cap : cl.capabilities) {
    json cap_doc;
    cap_doc["name"] = cap.name;
    cap_doc["templates"] = json::array();
    for (const auto& t : cap.templates)
      cap_doc["templates"].push_back(render_template(t));
    cap_doc["lexicon"] = json::object();
    for (const auto& [id, terms] : cap.lexicon.entries)
      cap_doc["lexicon"][id] = terms;
    doc["capabilities"].push_back(std::move(cap_doc));
  }
  return doc.dump(2) + "\n";
}

void save_checklist(const CheckList& cl, const std::filesystem::path& path) {
  write_file_atomic(path, checklist_to_json_text(cl));
}

std::vector<LintIssue> lint_checklist(const CheckList& cl) {
  std::vector<LintIssue> issues;
  for (const auto& cap : cl.capabilities) {
    std::set<std::string> used_ids;
    for (const auto& t : cap.templates) {
      std::map<std::pair<std::string, int>, int> instance_counts;
      for (const auto& seg : t.segments()) {
        if (const auto* ph = std::get_if<PlaceholderInstance>(&seg))
          ++instance_counts[{ph->id, ph->cardinal}];
      }
      for (const auto& [key, count] : instance_counts) {
        used_ids.insert(key.first);
        if (count > 1)
          issues.push_back({LintIssue::Severity::kWarning, cap.name,
                            "template \"" + render_template(t) +
                                "\" repeats placeholder {" + key.first + "-" +
                                std::to_string(key.second) + "} " +
                                std::to_string(count) + " times"});
      }
      for (const auto& id : t.placeholder_ids()) {
        const int needed = t.max_cardinal(id) + 1;
        auto it = cap.lexicon.entries.find(id);
        if (it != cap.lexicon.entries.end() &&
            static_cast<int>(it->second.size()) < needed)
          issues.push_back({LintIssue::Severity::kError, cap.name,
                            "template \"" + render_template(t) + "\" needs " +
                                std::to_string(needed) +
                                " distinct terminals for '" + id +
                                "' but the lexicon has " +
                                std::to_string(it->second.size())});
      }
    }
    for (const auto& [id, terms] : cap.lexicon.entries) {
      if (!used_ids.count(id))
        issues.push_back({LintIssue::Severity::kWarning, cap.name,
                          "lexicon id '" + id + "' is never referenced"});
    }
  }
  return issues;
}

void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write file: " + tmp.string());
    out << content;
    if (!out) throw Error("short write: " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string sanitize_filename(std::string_view name) {
  std::string out;
  for (char c : name) {
    const bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
                    (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.';
    out += ok ? c : '_';
  }
  if (out.empty()) out = "unnamed";
  return out;
}

}  // namespace templar
