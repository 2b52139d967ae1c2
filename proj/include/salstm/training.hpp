#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "salstm/checkpoint.hpp"
#include "salstm/corpus.hpp"
#include "salstm/encoder.hpp"

namespace salstm {

struct EpochLog {
  int epoch = 0;
  double mean_neg_logp = 0.0;
  double dev_f1 = -1.0;  // -1 when no dev corpus was given
};

struct TrainResult {
  Checkpoint best;
  std::vector<EpochLog> log;
};

// Stochastic gradient ascent on the sentence log likelihood, one update per
// sentence, shuffled each epoch with the seeded generator. The best dev-F1
// checkpoint is retained (later epochs win ties); without a dev corpus the
// final parameters are returned.
TrainResult train(const TrainConfig& cfg, const std::vector<Sentence>& train_corpus,
                  const std::vector<Sentence>& dev_corpus, std::ostream* log = nullptr);

struct EvalResult {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  long matched = 0;
  long predicted = 0;
  long gold = 0;
  long unk_tokens = 0;
};

// P, R, F1 from micro-averaged span counts.
EvalResult score_span_counts(long matched, long predicted, long gold);

// Micro-averaged exact span matches, Viterbi decoding per sentence.
// The parallel path fans sentences out across OpenMP threads against the
// read-only parameters; threads = 0 picks the runtime default.
EvalResult evaluate(const Checkpoint& ckpt, const std::vector<Sentence>& corpus,
                    int threads = 0);
// Single-threaded reference implementation, kept for testing; the parallel
// path must reproduce it exactly.
EvalResult evaluate_serial(const Checkpoint& ckpt, const std::vector<Sentence>& corpus);

// Predicted per-token role strings for each sentence, in input order.
std::vector<std::vector<std::string>> predict_roles(const Checkpoint& ckpt,
                                                    const std::vector<Sentence>& corpus,
                                                    bool enforce_mask = true, int threads = 0);

struct TensorCheck {
  std::string tensor;
  double max_rel_err = 0.0;
};

struct GradcheckModelReport {
  ModelKind kind = ModelKind::kVanilla;
  std::vector<TensorCheck> tensors;
  double max_rel_err = 0.0;
};

struct GradcheckReport {
  std::vector<GradcheckModelReport> models;
  double threshold = 1e-4;

  bool ok() const;
};

// Builds a random tiny instance per model kind and compares the analytic
// gradient of the log likelihood against central finite differences
// (eps = 1e-5) for every parameter coordinate.
GradcheckReport gradcheck(uint64_t seed);

// Random small instance used by the checker and the property tests.
struct TinyInstance {
  ModelParams params;
  TagSet tags;
  EncodedSentence sent;
};
TinyInstance make_tiny_instance(ModelKind kind, Rng& rng, int max_tokens = 6, int nh = 4);

// CSV rows (relation,alpha) sorted by weight descending; typed mode only.
std::vector<std::pair<std::string, double>> relweight_rows(const Checkpoint& ckpt);
void export_relweights(const Checkpoint& ckpt, std::ostream& out);

}  // namespace salstm
