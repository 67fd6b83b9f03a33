#ifndef TEMPLAR_BLEU_HPP
#define TEMPLAR_BLEU_HPP

#include <string>
#include <vector>

namespace templar {

// Smoothed sentence-level BLEU: n-gram order `max_order` (default 4),
// add-one smoothing on every precision, standard brevity penalty with the
// closest reference length (ties resolved toward the shorter reference).
// Returns a value in [0, 1]; 0 when the hypothesis or reference set is
// empty.
double sentence_bleu(const std::vector<std::string>& hypothesis,
                     const std::vector<std::vector<std::string>>& references,
                     int max_order = 4);

}  // namespace templar

#endif  // TEMPLAR_BLEU_HPP
