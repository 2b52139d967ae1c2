#pragma once

#include <string>
#include <vector>

#include "salstm/corpus.hpp"
#include "salstm/numkit.hpp"
#include "salstm/rng.hpp"

namespace salstm {

enum class ModelKind { kVanilla, kFeatureConcat, kSaBinary, kSaTyped };

ModelKind model_kind_from_string(const std::string& s);
std::string to_string(ModelKind kind);

// Gate index into CellParams arrays: candidate, input, forget, output,
// syntax. The syntax slot is live only in the SA modes.
enum Gate { kGateC = 0, kGateI, kGateF, kGateO, kGateS, kNumGates };

struct CellParams {
  Mat64 W[kNumGates];  // n_h x n_1
  Mat64 U[kNumGates];  // n_h x n_h
  Vec64 b[kNumGates];  // n_h
};

struct TensorRef {
  std::string name;
  Vec64* data;
};

// Every trainable tensor. The syntax-gate tensors and the per-relation
// weights exist in all modes; modes that do not use them leave them with
// zero gradient.
struct ModelParams {
  ModelKind kind = ModelKind::kVanilla;
  int n0_word = 0;
  int n0_flag = 0;
  int n1 = 0;
  int nh = 0;
  int n3 = 0;
  int n4 = 0;

  Mat64 word_emb;  // |V| x n0_word
  Mat64 flag_emb;  // 2 x n0_flag
  Mat64 W1;        // n1 x feat_dim()
  CellParams fwd;
  CellParams bwd;
  Vec64 alpha;  // one weight per relation type, shared by both directions
  Mat64 W2;     // n3 x 2*nh
  Mat64 W3;     // n4 x n3

  int n0() const { return n0_word + n0_flag; }
  int feat_dim() const { return kind == ModelKind::kFeatureConcat ? 2 * n0() : n0(); }
  bool syntax_mode() const { return kind == ModelKind::kSaBinary || kind == ModelKind::kSaTyped; }

  // Weights uniform in [-0.08, 0.08], biases 0, alpha 1 so the typed mode
  // starts out equivalent to the binary mode.
  static ModelParams init(ModelKind kind, int n0_word, int n0_flag, int n1, int nh, int n3,
                          int n4, int n_rels, int vocab_size, Rng& rng);

  // Stable enumeration order used by serialization and the gradient checker.
  std::vector<TensorRef> tensors();
  std::vector<TensorRef> tensors() const;

  double rel_weight(int rel_id) const {
    return kind == ModelKind::kSaTyped ? alpha[rel_id] : 1.0;
  }
};

ModelParams zeros_like(const ModelParams& p);

// Sentence resolved against the vocabularies, ready for the net.
struct EncodedSentence {
  std::vector<int> word_ids;
  std::vector<char> pred_flag;
  DependencyAdjacency adj;
  std::vector<int> gold_tags;  // empty when tagging unlabeled input

  int size() const { return static_cast<int>(word_ids.size()); }
};

EncodedSentence encode_tokens(const Sentence& s, const Vocab& vocab, const RelTypeIndex& rels,
                              const TagSet* gold_tags, int* unk_count = nullptr);

// One direction step. All cached values are needed on the reverse pass.
struct StepOut {
  Vec64 ctilde, gi, gf, go, c, tanh_c, h;
  Vec64 gs, s;  // SA modes only
};

StepOut lstm_step(const CellParams& p, const Vec64& z, const Vec64& h_prev, const Vec64& c_prev);
StepOut sa_lstm_step(const CellParams& p, const Vec64& z, const Vec64& h_prev,
                     const Vec64& c_prev, const Vec64& s_t);

// tanh of the weighted sum of already-computed neighbor hidden states;
// an empty neighborhood gives the zero vector.
Vec64 syntax_context(const std::vector<const Vec64*>& neighbor_h, const Vec64& weights, int nh);

// Dependency neighbors consumed at step t: the forward pass takes smaller
// indices, the backward pass larger ones, so each undirected edge enters
// exactly one step per direction.
std::vector<std::pair<int, int>> dir_neighbors(const DependencyAdjacency& adj, int t,
                                               bool forward);

struct DirTrace {
  std::vector<StepOut> steps;
};

struct StepTrace {
  EncodedSentence sent;
  Mat64 feats;   // N x feat_dim
  Mat64 z;       // N x n1
  DirTrace fwd;
  DirTrace bwd;
  Mat64 proj_r;  // N x n3, tanh(W2 a_t)
};

struct ForwardResult {
  Emissions emissions;  // N x n4
  StepTrace trace;
};

// z_t = tanh(W1 x_t)
Vec64 embed(const Vec64& x_t, const Mat64& w1);

// Full forward pass for any model kind (the feature-concat kind builds its
// augmented features internally).
ForwardResult encode_sentence(const EncodedSentence& s, const ModelParams& p);

// Exact reverse-mode gradients for every tensor, accumulated over all
// timesteps, including the syntax paths h_i -> S_t -> h_t and the
// per-relation weights in typed mode.
ModelParams backward(const ModelParams& p, const StepTrace& trace, const Mat64& d_emissions);

}  // namespace salstm
