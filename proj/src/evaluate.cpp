#include <algorithm>
#include <set>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "salstm/crf.hpp"
#include "salstm/training.hpp"

namespace salstm {

namespace {

struct SentenceScore {
  long matched = 0;
  long predicted = 0;
  long gold = 0;
  long unk = 0;
};

SentenceScore score_sentence(const Checkpoint& ckpt, const Sentence& s) {
  SentenceScore out;
  int unk = 0;
  const EncodedSentence enc = encode_tokens(s, ckpt.vocab, ckpt.rels, nullptr, &unk);
  out.unk = unk;
  const ForwardResult fr = encode_sentence(enc, ckpt.params);
  const ViterbiResult vr = viterbi(fr.emissions, ckpt.tags);
  const std::vector<Span> pred = spans_from_roles(roles_from_tags(vr.path, ckpt.tags));
  const std::vector<Span> gold = spans_from_roles(s.roles());
  out.predicted = static_cast<long>(pred.size());
  out.gold = static_cast<long>(gold.size());
  const std::set<Span> gold_set(gold.begin(), gold.end());
  for (const Span& sp : pred) out.matched += gold_set.count(sp) ? 1 : 0;
  return out;
}

}  // namespace

EvalResult score_span_counts(long matched, long predicted, long gold) {
  EvalResult r;
  r.matched = matched;
  r.predicted = predicted;
  r.gold = gold;
  r.precision = predicted > 0 ? static_cast<double>(matched) / predicted : 0.0;
  r.recall = gold > 0 ? static_cast<double>(matched) / gold : 0.0;
  r.f1 = r.precision + r.recall > 0.0
             ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
             : 0.0;
  return r;
}

EvalResult evaluate_serial(const Checkpoint& ckpt, const std::vector<Sentence>& corpus) {
  long matched = 0, predicted = 0, gold = 0, unk = 0;
  for (const Sentence& s : corpus) {
    const SentenceScore sc = score_sentence(ckpt, s);
    matched += sc.matched;
    predicted += sc.predicted;
    gold += sc.gold;
    unk += sc.unk;
  }
  EvalResult r = score_span_counts(matched, predicted, gold);
  r.unk_tokens = unk;
  return r;
}

EvalResult evaluate(const Checkpoint& ckpt, const std::vector<Sentence>& corpus, int threads) {
#ifdef _OPENMP
  const int n = static_cast<int>(corpus.size());
  long matched = 0, predicted = 0, gold = 0, unk = 0;
  if (threads <= 0) threads = omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 8) num_threads(threads) \
    reduction(+ : matched, predicted, gold, unk)
  for (int i = 0; i < n; ++i) {
    const SentenceScore sc = score_sentence(ckpt, corpus[i]);
    matched += sc.matched;
    predicted += sc.predicted;
    gold += sc.gold;
    unk += sc.unk;
  }
  EvalResult r = score_span_counts(matched, predicted, gold);
  r.unk_tokens = unk;
  return r;
#else
  (void)threads;
  return evaluate_serial(ckpt, corpus);
#endif
}

std::vector<std::vector<std::string>> predict_roles(const Checkpoint& ckpt,
                                                    const std::vector<Sentence>& corpus,
                                                    bool enforce_mask, int threads) {
  const int n = static_cast<int>(corpus.size());
  std::vector<std::vector<std::string>> out(n);
#ifdef _OPENMP
  if (threads <= 0) threads = omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 8) num_threads(threads)
#else
  (void)threads;
#endif
  for (int i = 0; i < n; ++i) {
    const EncodedSentence enc = encode_tokens(corpus[i], ckpt.vocab, ckpt.rels, nullptr);
    const ForwardResult fr = encode_sentence(enc, ckpt.params);
    const ViterbiResult vr = viterbi(fr.emissions, ckpt.tags, enforce_mask);
    out[i] = roles_from_tags(vr.path, ckpt.tags);
  }
  return out;
}

}  // namespace salstm
