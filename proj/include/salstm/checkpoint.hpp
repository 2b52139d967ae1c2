#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "salstm/corpus.hpp"
#include "salstm/encoder.hpp"

namespace salstm {

// Defaults follow the published hyper parameter table: n1 200, nh 100
// (so the concatenated width is 200), n3 100, learning rate 0.001.
struct TrainConfig {
  int n0_word = 50;
  int n0_flag = 10;
  int n1 = 200;
  int nh = 100;
  int n3 = 100;
  double learning_rate = 0.001;
  int epochs = 20;
  uint64_t seed = 1;
  ModelKind model = ModelKind::kSaTyped;
  std::string embeddings_path;
  int patience = 0;            // 0 = never stop early
  bool clip_gradients = false; // global norm 5.0 when enabled

  int n2() const { return 2 * nh; }
};

// Flat "key = value" text, one pair per line, '#' comments.
TrainConfig parse_config_file(const std::string& path);
void apply_config_line(TrainConfig& cfg, const std::string& key, const std::string& value);

// Self-describing container: plain-text header (dims, vocab, relation
// index, tag set, config) followed by the parameter arrays in the stable
// tensor enumeration order. save -> load -> save is byte identical.
struct Checkpoint {
  int version = 1;
  TrainConfig config;
  Vocab vocab{"<unk>"};
  RelTypeIndex rels{"<unk-rel>"};
  TagSet tags;
  ModelParams params;
};

void save_checkpoint(const Checkpoint& ckpt, std::ostream& out);
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(std::istream& in);
Checkpoint load_checkpoint(const std::string& path);

// Shortest text form that parses back to exactly the same double.
std::string format_double(double v);

}  // namespace salstm
