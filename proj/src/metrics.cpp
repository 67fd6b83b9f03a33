#include "templar/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "templar/bleu.hpp"
#include "templar/errors.hpp"
#include "templar/hashing.hpp"
#include "templar/word_graph.hpp"

namespace templar {

using nlohmann::json;

PredictionsByCapability load_predictions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open predictions file: " + path.string());
  PredictionsByCapability out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::exception& e) {
      throw ConfigError("predictions line " + std::to_string(line_no) + ": " +
                        e.what());
    }
    PredictionRecord rec{doc.at("sentence").get<std::string>(),
                         doc.at("expected").get<std::string>(),
                         doc.at("predicted").get<std::string>()};
    if (rec.expected.empty() || rec.predicted.empty())
      throw ConfigError("predictions line " + std::to_string(line_no) +
                        ": empty label");
    out[doc.at("capability").get<std::string>()].push_back(std::move(rec));
  }
  return out;
}

double failure_rate(std::span<const PredictionRecord> records) {
  if (records.empty()) throw EmptyCapability("no prediction records");
  std::size_t failures = 0;
  for (const auto& rec : records)
    if (rec.predicted != rec.expected) ++failures;
  return static_cast<double>(failures) / static_cast<double>(records.size());
}

std::pair<std::size_t, std::size_t> diversity_counts(
    const Capability& cap, const DiversityOptions& opts) {
  std::set<std::string> templates;
  for (const auto& t : cap.templates) templates.insert(render_template(t));

  std::size_t terms = 0;
  if (opts.dedupe_terminals_across_ids) {
    std::set<std::string> all;
    for (const auto& [id, list] : cap.lexicon.entries)
      all.insert(list.begin(), list.end());
    terms = all.size();
  } else {
    for (const auto& [id, list] : cap.lexicon.entries) {
      std::set<std::string> per_id(list.begin(), list.end());
      terms += per_id.size();
    }
  }
  return {templates.size(), terms};
}

double cross_template_bleu(const Capability& cap,
                           const CrossBleuOptions& opts) {
  const std::size_t count = cap.templates.size();
  if (count <= 1) return 0.0;

  // Samples are seeded from the template text so structural duplicates draw
  // identical samples and the score is invariant under reordering.
  std::vector<std::string> renders(count);
  std::vector<std::vector<std::vector<std::string>>> samples(count);
  for (std::size_t i = 0; i < count; ++i) {
    renders[i] = render_template(cap.templates[i]);
    ExpandOptions eo;
    eo.limit = opts.sample_per_template;
    eo.seed = opts.seed;
    for (const auto& sentence : expand(cap.templates[i], cap.lexicon, eo))
      samples[i].push_back(tokenize(sentence, Tokenizer::kWhitespace));
  }

  double score_sum = 0.0;
  std::size_t scored = 0;
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<std::vector<std::string>> references;
    for (std::size_t j = 0; j < count; ++j) {
      if (renders[j] == renders[i]) continue;  // same template is no reference
      references.insert(references.end(), samples[j].begin(), samples[j].end());
    }
    for (const auto& hyp : samples[i]) {
      score_sum += references.empty() ? 0.0 : sentence_bleu(hyp, references);
      ++scored;
    }
  }
  const double raw_mean = scored ? score_sum / static_cast<double>(scored) : 0.0;
  return raw_mean / static_cast<double>(count);
}

namespace {

// Structural key with ids canonicalized by first occurrence; two templates
// with equal keys are identical up to id renaming.
std::string lenient_key(const Template& t) {
  std::map<std::string, std::size_t> id_index;
  std::string key;
  for (const auto& seg : t.segments()) {
    if (const auto* lit = std::get_if<std::string>(&seg)) {
      key += 'L';
      key += std::to_string(lit->size());
      key += ':';
      key += *lit;
      key += '\x1f';
    } else {
      const auto& ph = std::get<PlaceholderInstance>(seg);
      auto [it, inserted] = id_index.try_emplace(ph.id, id_index.size());
      key += 'P';
      key += std::to_string(it->second);
      key += '-';
      key += std::to_string(ph.cardinal);
      key += '\x1f';
    }
  }
  return key;
}

std::string strict_key(const Template& t, const Lexicon& lex) {
  std::string key = lenient_key(t);
  for (const auto& id : t.placeholder_ids()) {
    key += '|';
    auto it = lex.entries.find(id);
    if (it != lex.entries.end()) {
      std::set<std::string> sorted(it->second.begin(), it->second.end());
      for (const auto& term : sorted) {
        key += term;
        key += '\x1e';
      }
    }
  }
  return key;
}

}  // namespace

MatchResult template_match(const Capability& candidate,
                           const Capability& reference, MatchMode mode) {
  auto key_of = [&](const Template& t, const Lexicon& lex) {
    return mode == MatchMode::kStrict ? strict_key(t, lex) : lenient_key(t);
  };

  // Matching templates form equivalence classes under the key, so the
  // maximum bipartite matching is min(count, count) per class.
  std::map<std::string, std::vector<std::size_t>> cand_classes, ref_classes;
  for (std::size_t i = 0; i < candidate.templates.size(); ++i)
    cand_classes[key_of(candidate.templates[i], candidate.lexicon)].push_back(i);
  for (std::size_t i = 0; i < reference.templates.size(); ++i)
    ref_classes[key_of(reference.templates[i], reference.lexicon)].push_back(i);

  MatchResult result;
  std::size_t matched = 0;
  for (const auto& [key, cand_indices] : cand_classes) {
    auto it = ref_classes.find(key);
    const std::size_t have = it == ref_classes.end() ? 0 : it->second.size();
    const std::size_t used = std::min(cand_indices.size(), have);
    matched += used;
    for (std::size_t i = used; i < cand_indices.size(); ++i)
      result.unmatched_candidate.push_back(
          render_template(candidate.templates[cand_indices[i]]));
  }
  for (const auto& [key, ref_indices] : ref_classes) {
    auto it = cand_classes.find(key);
    const std::size_t have = it == cand_classes.end() ? 0 : it->second.size();
    for (std::size_t i = have; i < ref_indices.size(); ++i)
      result.unmatched_reference.push_back(
          render_template(reference.templates[ref_indices[i]]));
  }

  const std::size_t nc = candidate.templates.size();
  const std::size_t nr = reference.templates.size();
  result.precision =
      nc ? static_cast<double>(matched) / static_cast<double>(nc)
         : (nr == 0 ? 1.0 : 0.0);
  result.recall = nr ? static_cast<double>(matched) / static_cast<double>(nr)
                     : (nc == 0 ? 1.0 : 0.0);
  return result;
}

namespace {

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  const double mean_a = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mean_b = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double cov = 0.0, var_a = 0.0, var_b = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - mean_a;
    const double db = b[i] - mean_b;
    cov += da * db;
    var_a += da * da;
    var_b += db * db;
  }
  if (var_a == 0.0 || var_b == 0.0)
    throw ConstantVector("correlation is undefined for a constant vector");
  return cov / std::sqrt(var_a * var_b);
}

}  // namespace

std::pair<double, double> fr_correlation(std::span<const double> a,
                                         std::span<const double> b) {
  if (a.size() != b.size())
    throw Error("correlation inputs differ in length");
  if (a.size() < 2) throw Error("correlation needs at least two points");
  const double r = pearson(a, b);
  const std::vector<double> ra = average_ranks(a);
  const std::vector<double> rb = average_ranks(b);
  const double rho = pearson(ra, rb);
  return {r, rho};
}

MetricReport compute_metrics(const CheckList& cl,
                             const PredictionsByCapability* predictions,
                             const MetricOptions& opts) {
  MetricReport report;
  double fr_sum = 0.0, bleu_sum = 0.0;
  double temp_sum = 0.0, term_sum = 0.0;
  std::size_t fr_count = 0;

  for (const auto& cap : cl.capabilities) {
    CapabilityMetrics m;
    const auto [temps, terms] = diversity_counts(cap, opts.diversity);
    m.temp_count = temps;
    m.term_count = terms;
    m.cc_bleu = cross_template_bleu(cap, opts.bleu);
    if (predictions) {
      auto it = predictions->find(cap.name);
      if (it != predictions->end() && !it->second.empty()) {
        m.fr = failure_rate(it->second);
        fr_sum += *m.fr;
        ++fr_count;
      }
    }
    temp_sum += static_cast<double>(m.temp_count);
    term_sum += static_cast<double>(m.term_count);
    bleu_sum += m.cc_bleu;
    report.total_temp_count += m.temp_count;
    report.total_term_count += m.term_count;
    report.per_capability.emplace(cap.name, std::move(m));
  }

  const double n = static_cast<double>(cl.capabilities.size());
  if (n > 0) {
    report.macro.temp_count = temp_sum / n;
    report.macro.term_count = term_sum / n;
    report.macro.cc_bleu = bleu_sum / n;
    if (fr_count > 0) report.macro.fr = fr_sum / static_cast<double>(fr_count);
  }
  return report;
}

std::string metric_report_to_json_text(const MetricReport& report) {
  json doc;
  doc["per_capability"] = json::object();
  for (const auto& [name, m] : report.per_capability) {
    json cap_doc;
    if (m.fr) cap_doc["fr"] = *m.fr;
    cap_doc["temp_count"] = m.temp_count;
    cap_doc["term_count"] = m.term_count;
    cap_doc["cc_bleu"] = m.cc_bleu;
    doc["per_capability"][name] = std::move(cap_doc);
  }
  json macro_doc;
  if (report.macro.fr) macro_doc["fr"] = *report.macro.fr;
  macro_doc["temp_count"] = report.macro.temp_count;
  macro_doc["term_count"] = report.macro.term_count;
  macro_doc["cc_bleu"] = report.macro.cc_bleu;
  doc["macro"] = std::move(macro_doc);
  doc["total_temp_count"] = report.total_temp_count;
  doc["total_term_count"] = report.total_term_count;
  return doc.dump(2) + "\n";
}

std::string metric_report_to_csv(const MetricReport& report) {
  std::ostringstream out;
  out << "metric";
  for (const auto& [name, m] : report.per_capability) out << ',' << name;
  out << ",macro\n";

  out << "fr";
  for (const auto& [name, m] : report.per_capability) {
    out << ',';
    if (m.fr) out << *m.fr;
  }
  out << ',';
  if (report.macro.fr) out << *report.macro.fr;
  out << '\n';

  out << "temp_count";
  for (const auto& [name, m] : report.per_capability) out << ',' << m.temp_count;
  out << ',' << report.macro.temp_count << '\n';

  out << "term_count";
  for (const auto& [name, m] : report.per_capability) out << ',' << m.term_count;
  out << ',' << report.macro.term_count << '\n';

  out << "cc_bleu";
  for (const auto& [name, m] : report.per_capability) out << ',' << m.cc_bleu;
  out << ',' << report.macro.cc_bleu << '\n';
  return out.str();
}

}  // namespace templar
