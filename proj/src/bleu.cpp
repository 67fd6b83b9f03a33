#include "templar/bleu.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>

namespace templar {

namespace {

using NgramCounts = std::map<std::vector<std::string>, int>;

NgramCounts count_ngrams(const std::vector<std::string>& tokens, int n) {
  NgramCounts counts;
  if (static_cast<int>(tokens.size()) < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i)
    ++counts[std::vector<std::string>(tokens.begin() + i,
                                      tokens.begin() + i + n)];
  return counts;
}

}  // namespace

double sentence_bleu(const std::vector<std::string>& hypothesis,
                     const std::vector<std::vector<std::string>>& references,
                     int max_order) {
  if (hypothesis.empty() || references.empty()) return 0.0;

  double log_precision_sum = 0.0;
  for (int n = 1; n <= max_order; ++n) {
    const NgramCounts hyp_counts = count_ngrams(hypothesis, n);
    // Clip each hypothesis n-gram by its maximum count in any reference.
    NgramCounts max_ref;
    for (const auto& ref : references) {
      for (const auto& [ngram, count] : count_ngrams(ref, n)) {
        auto [it, inserted] = max_ref.try_emplace(ngram, count);
        if (!inserted) it->second = std::max(it->second, count);
      }
    }
    long matched = 0;
    long total = 0;
    for (const auto& [ngram, count] : hyp_counts) {
      total += count;
      auto it = max_ref.find(ngram);
      if (it != max_ref.end()) matched += std::min(count, it->second);
    }
    log_precision_sum += std::log(static_cast<double>(matched + 1) /
                                  static_cast<double>(total + 1));
  }

  // Brevity penalty against the closest reference length; ties toward the
  // shorter reference.
  const long hyp_len = static_cast<long>(hypothesis.size());
  long ref_len = static_cast<long>(references.front().size());
  for (const auto& ref : references) {
    const long len = static_cast<long>(ref.size());
    const long d_new = std::labs(len - hyp_len);
    const long d_old = std::labs(ref_len - hyp_len);
    if (d_new < d_old || (d_new == d_old && len < ref_len)) ref_len = len;
  }
  double brevity = 1.0;
  if (hyp_len < ref_len)
    brevity = std::exp(1.0 - static_cast<double>(ref_len) /
                                 static_cast<double>(hyp_len));

  return brevity * std::exp(log_precision_sum / max_order);
}

}  // namespace templar
