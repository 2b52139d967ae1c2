#include "salstm/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace salstm {

std::vector<std::string> Sentence::roles() const {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const Token& t : tokens) out.push_back(t.role);
  return out;
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  size_t pos = 0;
  while (true) {
    size_t tab = line.find('\t', pos);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(pos));
      break;
    }
    fields.push_back(line.substr(pos, tab - pos));
    pos = tab + 1;
  }
  return fields;
}

int parse_int(const std::string& s, const char* what, int line_no) {
  size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(s, &used);
  } catch (const std::exception&) {
    used = std::string::npos;
  }
  if (used != s.size() || s.empty())
    fatal(std::string("line ") + std::to_string(line_no) + ": bad " + what + " field '" + s + "'");
  return v;
}

void finish_sentence(std::vector<Token>& toks, const std::vector<int>& lines, int start_line,
                     std::vector<Sentence>& out) {
  const int n = static_cast<int>(toks.size());
  int predicate = 0;
  for (int i = 0; i < n; ++i) {
    const Token& t = toks[i];
    if (t.head < 0 || t.head > n)
      fatal("line " + std::to_string(lines[i]) + ": head " + std::to_string(t.head) +
            " out of range for a " + std::to_string(n) + "-token sentence");
    if (t.head == t.index)
      fatal("line " + std::to_string(lines[i]) + ": token is its own head");
    if (t.is_predicate) {
      if (predicate != 0)
        fatal("line " + std::to_string(lines[i]) + ": multiple predicates in one sentence");
      predicate = t.index;
    }
  }
  if (predicate == 0)
    fatal("sentence starting at line " + std::to_string(start_line) + ": no predicate token");
  Sentence s;
  s.tokens = std::move(toks);
  s.predicate_index = predicate;
  out.push_back(std::move(s));
  toks.clear();
}

}  // namespace

std::vector<Sentence> parse_corpus(std::istream& in) {
  std::vector<Sentence> out;
  std::vector<Token> toks;
  std::vector<int> tok_lines;
  int line_no = 0;
  int sent_start = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      if (!toks.empty()) finish_sentence(toks, tok_lines, sent_start, out);
      tok_lines.clear();
      continue;
    }
    if (toks.empty()) sent_start = line_no;
    std::vector<std::string> f = split_tabs(line);
    if (f.size() != 6)
      fatal("line " + std::to_string(line_no) + ": expected 6 tab-separated fields, got " +
            std::to_string(f.size()));
    Token t;
    t.index = parse_int(f[0], "INDEX", line_no);
    if (t.index != static_cast<int>(toks.size()) + 1)
      fatal("line " + std::to_string(line_no) + ": INDEX " + f[0] + " out of sequence");
    t.form = f[1];
    if (t.form.empty()) fatal("line " + std::to_string(line_no) + ": empty FORM field");
    const int pred = parse_int(f[2], "PRED", line_no);
    if (pred != 0 && pred != 1)
      fatal("line " + std::to_string(line_no) + ": PRED must be 0 or 1");
    t.is_predicate = pred == 1;
    t.head = parse_int(f[3], "HEAD", line_no);
    t.rel = f[4];
    if (t.rel.empty()) fatal("line " + std::to_string(line_no) + ": empty RELATION field");
    t.role = f[5];
    if (t.role.empty()) fatal("line " + std::to_string(line_no) + ": empty ROLE field");
    toks.push_back(std::move(t));
    tok_lines.push_back(line_no);
  }
  if (!toks.empty()) finish_sentence(toks, tok_lines, sent_start, out);
  return out;
}

std::vector<Sentence> load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) fatal("cannot open corpus file: " + path);
  return parse_corpus(in);
}

void serialize_corpus(const std::vector<Sentence>& corpus, std::ostream& out) {
  for (const Sentence& s : corpus) {
    for (const Token& t : s.tokens) {
      out << t.index << '\t' << t.form << '\t' << (t.is_predicate ? 1 : 0) << '\t' << t.head
          << '\t' << t.rel << '\t' << t.role << '\n';
    }
    out << '\n';
  }
}

Vocab::Vocab(std::string unk_form) {
  ids_.emplace(unk_form, 0);
  forms_.push_back(std::move(unk_form));
}

int Vocab::add(const std::string& form) {
  auto it = ids_.find(form);
  if (it != ids_.end()) return it->second;
  const int id = static_cast<int>(forms_.size());
  ids_.emplace(form, id);
  forms_.push_back(form);
  return id;
}

int Vocab::lookup(const std::string& form) const {
  auto it = ids_.find(form);
  return it == ids_.end() ? kUnk : it->second;
}

bool Vocab::contains(const std::string& form) const { return ids_.count(form) != 0; }

Vocab build_vocab(const std::vector<Sentence>& corpus) {
  Vocab v;
  for (const Sentence& s : corpus)
    for (const Token& t : s.tokens) v.add(t.form);
  return v;
}

RelTypeIndex build_rel_index(const std::vector<Sentence>& corpus) {
  RelTypeIndex r("<unk-rel>");
  for (const Sentence& s : corpus)
    for (const Token& t : s.tokens)
      if (t.head != 0) r.add(t.rel);  // root attachments carry no edge weight
  return r;
}

std::vector<std::string> collect_roles(const std::vector<Sentence>& corpus) {
  std::set<std::string> seen;
  for (const Sentence& s : corpus)
    for (const Token& t : s.tokens)
      if (t.role != "O") seen.insert(t.role);
  return {seen.begin(), seen.end()};
}

DependencyAdjacency build_adjacency(const Sentence& s, const RelTypeIndex& rels) {
  DependencyAdjacency adj;
  adj.neighbors.resize(s.size());
  for (const Token& t : s.tokens) {
    if (t.head == 0) continue;  // root attachment, no word-to-word edge
    const int a = t.index - 1;
    const int b = t.head - 1;
    const int rel = rels.lookup(t.rel);
    adj.neighbors[a].emplace_back(b, rel);
    adj.neighbors[b].emplace_back(a, rel);
  }
  for (auto& list : adj.neighbors) std::sort(list.begin(), list.end());
  return adj;
}

TagSet TagSet::from_roles(std::vector<std::string> roles_in) {
  TagSet ts;
  ts.roles = std::move(roles_in);
  ts.tags.push_back("O");
  ts.kind.push_back(kOutside);
  ts.role_of.push_back(-1);
  for (size_t k = 0; k < ts.roles.size(); ++k) {
    const std::string& r = ts.roles[k];
    ts.tags.push_back("B-" + r);
    ts.tags.push_back("I-" + r);
    ts.tags.push_back("E-" + r);
    ts.tags.push_back("S-" + r);
    ts.kind.insert(ts.kind.end(), {kBegin, kInside, kEnd, kSingle});
    ts.role_of.insert(ts.role_of.end(), 4, static_cast<int>(k));
  }
  const int n = ts.n4();
  ts.allowed_start.assign(n, 0);
  ts.allowed_end.assign(n, 0);
  ts.allowed_trans.assign(static_cast<size_t>(n) * n, 0);
  for (int t = 0; t < n; ++t) {
    ts.allowed_start[t] = ts.kind[t] == kOutside || ts.kind[t] == kBegin || ts.kind[t] == kSingle;
    ts.allowed_end[t] = ts.kind[t] == kOutside || ts.kind[t] == kEnd || ts.kind[t] == kSingle;
  }
  for (int from = 0; from < n; ++from) {
    for (int to = 0; to < n; ++to) {
      bool ok;
      if (ts.kind[from] == kBegin || ts.kind[from] == kInside) {
        // an open span continues or closes with the same role
        ok = (ts.kind[to] == kInside || ts.kind[to] == kEnd) && ts.role_of[to] == ts.role_of[from];
      } else {
        ok = ts.kind[to] == kOutside || ts.kind[to] == kBegin || ts.kind[to] == kSingle;
      }
      ts.allowed_trans[static_cast<size_t>(from) * n + to] = ok;
    }
  }
  return ts;
}

bool TagSet::path_valid(const std::vector<int>& path) const {
  if (path.empty()) return true;
  if (!allowed_start[path.front()]) return false;
  for (size_t i = 1; i < path.size(); ++i)
    if (!trans_ok(path[i - 1], path[i])) return false;
  return allowed_end[path.back()] != 0;
}

int TagSet::tag_id(const std::string& tag) const {
  for (size_t i = 0; i < tags.size(); ++i)
    if (tags[i] == tag) return static_cast<int>(i);
  fatal("unknown tag '" + tag + "'");
}

std::vector<int> iobes_encode(const std::vector<std::string>& roles, const TagSet& ts) {
  const int n = static_cast<int>(roles.size());
  std::vector<int> tags(n, 0);
  int i = 0;
  while (i < n) {
    if (roles[i] == "O") {
      tags[i] = 0;
      ++i;
      continue;
    }
    int role_idx = -1;
    for (size_t k = 0; k < ts.roles.size(); ++k)
      if (ts.roles[k] == roles[i]) role_idx = static_cast<int>(k);
    if (role_idx < 0) fatal("role '" + roles[i] + "' not in tag set");
    int j = i;
    while (j + 1 < n && roles[j + 1] == roles[i]) ++j;
    const int base = 4 * role_idx;
    if (i == j) {
      tags[i] = base + 4;  // S
    } else {
      tags[i] = base + 1;  // B
      for (int k = i + 1; k < j; ++k) tags[k] = base + 2;  // I
      tags[j] = base + 3;  // E
    }
    i = j + 1;
  }
  return tags;
}

std::vector<Span> iobes_decode(const std::vector<int>& tags, const TagSet& ts) {
  std::vector<Span> spans;
  int open_role = -1;
  int open_start = 0;
  auto close_open = [&](int end_pos) {
    if (open_role >= 0) {
      spans.push_back({open_start, end_pos, ts.roles[open_role]});
      open_role = -1;
    }
  };
  const int n = static_cast<int>(tags.size());
  for (int t = 0; t < n; ++t) {
    const int pos = t + 1;
    const int tag = tags[t];
    const int role = ts.role_of[tag];
    switch (ts.kind[tag]) {
      case TagSet::kOutside:
        close_open(pos - 1);
        break;
      case TagSet::kBegin:
        close_open(pos - 1);
        open_role = role;
        open_start = pos;
        break;
      case TagSet::kSingle:
        close_open(pos - 1);
        spans.push_back({pos, pos, ts.roles[role]});
        break;
      case TagSet::kInside:
        if (open_role != role) {  // stray I opens a span retroactively here
          close_open(pos - 1);
          open_role = role;
          open_start = pos;
        }
        break;
      case TagSet::kEnd:
        if (open_role == role) {
          spans.push_back({open_start, pos, ts.roles[role]});
          open_role = -1;
        } else {
          close_open(pos - 1);
          spans.push_back({pos, pos, ts.roles[role]});
        }
        break;
    }
  }
  close_open(n);
  return spans;
}

std::vector<std::string> roles_from_tags(const std::vector<int>& tags, const TagSet& ts) {
  std::vector<std::string> roles(tags.size(), "O");
  for (const Span& sp : iobes_decode(tags, ts))
    for (int p = sp.start; p <= sp.end; ++p) roles[p - 1] = sp.role;
  return roles;
}

std::vector<Span> spans_from_roles(const std::vector<std::string>& roles) {
  std::vector<Span> spans;
  const int n = static_cast<int>(roles.size());
  int i = 0;
  while (i < n) {
    if (roles[i] == "O") {
      ++i;
      continue;
    }
    int j = i;
    while (j + 1 < n && roles[j + 1] == roles[i]) ++j;
    spans.push_back({i + 1, j + 1, roles[i]});
    i = j + 1;
  }
  return spans;
}

EmbeddingLoad load_embeddings(std::istream& in, const Vocab& vocab, Mat64& word_emb) {
  EmbeddingLoad result;
  std::string header;
  if (!std::getline(in, header)) fatal("embedding file: missing header line");
  std::istringstream hs(header);
  long count = 0;
  int dim = 0;
  if (!(hs >> count >> dim)) fatal("embedding file: header must be 'count dim'");
  if (dim != word_emb.cols)
    fatal("embedding dimension " + std::to_string(dim) + " does not match configured word dim " +
          std::to_string(word_emb.cols));
  std::set<int> matched;
  std::string line;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    const int id = vocab.lookup(word);
    const bool known = vocab.contains(word);
    double value = 0.0;
    for (int c = 0; c < dim; ++c) {
      if (!(ls >> value))
        fatal("embedding file line " + std::to_string(line_no) + ": expected " +
              std::to_string(dim) + " values");
      if (known) word_emb.at(id, c) = value;
    }
    ++result.file_words;
    if (known) matched.insert(id);
  }
  result.matched = static_cast<int>(matched.size());
  const int denom = vocab.size() - 1;  // unk row is never file-backed
  result.coverage = denom > 0 ? static_cast<double>(result.matched) / denom : 0.0;
  return result;
}

}  // namespace salstm
