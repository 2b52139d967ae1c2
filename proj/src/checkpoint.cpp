#include "salstm/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace salstm {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

uint64_t parse_u64(const std::string& s, const char* what) {
  size_t used = 0;
  uint64_t v = 0;
  try {
    v = std::stoull(s, &used);
  } catch (const std::exception&) {
    used = std::string::npos;
  }
  if (used != s.size() || s.empty()) fatal(std::string("config: bad ") + what + " '" + s + "'");
  return v;
}

int parse_pos_int(const std::string& s, const char* what) {
  const uint64_t v = parse_u64(s, what);
  if (v == 0 || v > 1u << 20) fatal(std::string("config: ") + what + " out of range");
  return static_cast<int>(v);
}

double parse_real(const std::string& s, const char* what) {
  size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = std::string::npos;
  }
  if (used != s.size() || s.empty()) fatal(std::string("config: bad ") + what + " '" + s + "'");
  return v;
}

bool parse_bool(const std::string& s, const char* what) {
  if (s == "1" || s == "true" || s == "on") return true;
  if (s == "0" || s == "false" || s == "off") return false;
  fatal(std::string("config: bad ") + what + " '" + s + "' (expected true/false)");
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

}  // namespace

void apply_config_line(TrainConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "n0_word") cfg.n0_word = parse_pos_int(value, "n0_word");
  else if (key == "n0_flag") cfg.n0_flag = parse_pos_int(value, "n0_flag");
  else if (key == "n1") cfg.n1 = parse_pos_int(value, "n1");
  else if (key == "nh") cfg.nh = parse_pos_int(value, "nh");
  else if (key == "n3") cfg.n3 = parse_pos_int(value, "n3");
  else if (key == "learning_rate") cfg.learning_rate = parse_real(value, "learning_rate");
  else if (key == "epochs") cfg.epochs = parse_pos_int(value, "epochs");
  else if (key == "seed") cfg.seed = parse_u64(value, "seed");
  else if (key == "model") cfg.model = model_kind_from_string(value);
  else if (key == "embeddings") cfg.embeddings_path = value;
  else if (key == "patience") cfg.patience = static_cast<int>(parse_u64(value, "patience"));
  else if (key == "clip_gradients") cfg.clip_gradients = parse_bool(value, "clip_gradients");
  else fatal("config: unknown key '" + key + "'");
}

TrainConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fatal("cannot open config file: " + path);
  TrainConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const size_t eq = t.find('=');
    if (eq == std::string::npos)
      fatal("config line " + std::to_string(line_no) + ": expected 'key = value'");
    apply_config_line(cfg, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return cfg;
}

namespace {

void write_config(const TrainConfig& c, std::ostream& out) {
  out << "model " << to_string(c.model) << '\n';
  out << "n0_word " << c.n0_word << '\n';
  out << "n0_flag " << c.n0_flag << '\n';
  out << "n1 " << c.n1 << '\n';
  out << "nh " << c.nh << '\n';
  out << "n3 " << c.n3 << '\n';
  out << "learning_rate " << format_double(c.learning_rate) << '\n';
  out << "epochs " << c.epochs << '\n';
  out << "seed " << c.seed << '\n';
  out << "patience " << c.patience << '\n';
  out << "clip_gradients " << (c.clip_gradients ? 1 : 0) << '\n';
  out << "embeddings " << c.embeddings_path << '\n';
}

std::string expect_key(std::istream& in, const std::string& key) {
  std::string line;
  if (!std::getline(in, line)) fatal("checkpoint: truncated before '" + key + "'");
  if (line.rfind(key + " ", 0) == 0) return line.substr(key.size() + 1);
  if (line == key) return "";
  fatal("checkpoint: expected '" + key + "', got '" + line + "'");
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, std::ostream& out) {
  out << "salstm-checkpoint " << ckpt.version << '\n';
  write_config(ckpt.config, out);
  out << "vocab " << ckpt.vocab.size() << '\n';
  for (const std::string& f : ckpt.vocab.forms()) out << f << '\n';
  out << "rels " << ckpt.rels.size() << '\n';
  for (const std::string& f : ckpt.rels.forms()) out << f << '\n';
  out << "roles " << ckpt.tags.roles.size() << '\n';
  for (const std::string& r : ckpt.tags.roles) out << r << '\n';
  for (const TensorRef& t : ckpt.params.tensors()) {
    out << "tensor " << t.name << ' ' << t.data->size() << '\n';
    const Vec64& v = *t.data;
    for (size_t i = 0; i < v.size(); ++i)
      out << format_double(v[i]) << ((i + 1) % 8 == 0 || i + 1 == v.size() ? '\n' : ' ');
  }
  out << "end\n";
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::ofstream out(path);
  if (!out) fatal("cannot write checkpoint file: " + path);
  save_checkpoint(ckpt, out);
}

Checkpoint load_checkpoint(std::istream& in) {
  Checkpoint ckpt;
  {
    const std::string v = expect_key(in, "salstm-checkpoint");
    ckpt.version = static_cast<int>(parse_u64(v, "version"));
    if (ckpt.version != 1) fatal("checkpoint: unsupported version " + v);
  }
  TrainConfig& c = ckpt.config;
  c.model = model_kind_from_string(expect_key(in, "model"));
  c.n0_word = parse_pos_int(expect_key(in, "n0_word"), "n0_word");
  c.n0_flag = parse_pos_int(expect_key(in, "n0_flag"), "n0_flag");
  c.n1 = parse_pos_int(expect_key(in, "n1"), "n1");
  c.nh = parse_pos_int(expect_key(in, "nh"), "nh");
  c.n3 = parse_pos_int(expect_key(in, "n3"), "n3");
  c.learning_rate = parse_real(expect_key(in, "learning_rate"), "learning_rate");
  c.epochs = parse_pos_int(expect_key(in, "epochs"), "epochs");
  c.seed = parse_u64(expect_key(in, "seed"), "seed");
  c.patience = static_cast<int>(parse_u64(expect_key(in, "patience"), "patience"));
  c.clip_gradients = expect_key(in, "clip_gradients") == "1";
  c.embeddings_path = expect_key(in, "embeddings");

  const int n_vocab = parse_pos_int(expect_key(in, "vocab"), "vocab size");
  std::string line;
  for (int i = 0; i < n_vocab; ++i) {
    if (!std::getline(in, line)) fatal("checkpoint: truncated vocab block");
    if (i > 0) ckpt.vocab.add(line);
  }
  const int n_rels = parse_pos_int(expect_key(in, "rels"), "relation count");
  for (int i = 0; i < n_rels; ++i) {
    if (!std::getline(in, line)) fatal("checkpoint: truncated relation block");
    if (i > 0) ckpt.rels.add(line);
  }
  const int n_roles = static_cast<int>(parse_u64(expect_key(in, "roles"), "role count"));
  std::vector<std::string> roles;
  for (int i = 0; i < n_roles; ++i) {
    if (!std::getline(in, line)) fatal("checkpoint: truncated role block");
    roles.push_back(line);
  }
  ckpt.tags = TagSet::from_roles(roles);

  {
    Rng rng(0);
    ckpt.params = ModelParams::init(c.model, c.n0_word, c.n0_flag, c.n1, c.nh, c.n3,
                                    ckpt.tags.n4(), ckpt.rels.size(), ckpt.vocab.size(), rng);
  }
  for (const TensorRef& t : ckpt.params.tensors()) {
    std::string head = expect_key(in, "tensor");
    std::istringstream hs(head);
    std::string name;
    size_t count = 0;
    hs >> name >> count;
    if (name != t.name)
      fatal("checkpoint: expected tensor '" + t.name + "', got '" + name + "'");
    if (count != t.data->size())
      fatal("checkpoint: tensor '" + name + "' has " + std::to_string(count) +
            " values, expected " + std::to_string(t.data->size()));
    for (size_t i = 0; i < count; ++i)
      if (!(in >> (*t.data)[i])) fatal("checkpoint: truncated tensor '" + name + "'");
    std::getline(in, line);  // consume the trailing newline
  }
  if (expect_key(in, "end") != "") fatal("checkpoint: trailing data after end marker");
  return ckpt;
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) fatal("cannot open checkpoint file: " + path);
  return load_checkpoint(in);
}

}  // namespace salstm
