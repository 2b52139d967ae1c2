#pragma once

#include <cstdint>
#include <string>

namespace salstm {

// Corpus generator for desk-scale experiments. Each sentence carries one
// predicate (the tree root), a random projective dependency tree, and
// argument spans whose role is determined solely by the identity of the cue
// token attached to the argument head through the signal relation. Decoy
// cue words elsewhere keep the role unreadable from linear context.
struct SynthSpec {
  int min_len = 5;
  int max_len = 12;
  int n_roles = 2;
  std::string signal_rel = "dobj";
  int n_distractor_rels = 4;  // signal + distractors >= 3 relation types
  int n_fillers = 60;
  int n_predicates = 8;
  int max_args = 2;
  double span_ext_prob = 0.3;  // chance an argument grows to a 2-token span
  int max_decoys = 2;          // decoy cue forms sprinkled per sentence

  std::string role_name(int k) const { return "A" + std::to_string(k); }
  std::string cue_form(int k) const { return "cue" + role_name(k); }
};

// Deterministic per seed, byte for byte.
std::string synth_generate(uint64_t seed, int n_sentences, const SynthSpec& spec);

}  // namespace salstm
