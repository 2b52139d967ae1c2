#pragma once

#include <compare>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

#include "salstm/numkit.hpp"

namespace salstm {

struct Token {
  int index = 0;  // 1-based position
  std::string form;
  bool is_predicate = false;
  int head = 0;  // 0 = root
  std::string rel;
  std::string role = "O";
};

struct Sentence {
  std::vector<Token> tokens;
  int predicate_index = 0;  // 1-based

  int size() const { return static_cast<int>(tokens.size()); }
  std::vector<std::string> roles() const;
};

// Column format, tab separated: INDEX FORM PRED(0|1) HEAD RELATION ROLE.
// Sentences are blank-line separated. Rejections name the offending line.
std::vector<Sentence> parse_corpus(std::istream& in);
std::vector<Sentence> load_corpus(const std::string& path);
void serialize_corpus(const std::vector<Sentence>& corpus, std::ostream& out);

// Interned string table with a reserved unknown id 0.
struct Vocab {
  static constexpr int kUnk = 0;

  explicit Vocab(std::string unk_form = "<unk>");
  int add(const std::string& form);          // returns existing id if present
  int lookup(const std::string& form) const;  // kUnk when missing
  bool contains(const std::string& form) const;
  const std::string& form(int id) const { return forms_[id]; }
  int size() const { return static_cast<int>(forms_.size()); }
  const std::vector<std::string>& forms() const { return forms_; }

 private:
  std::vector<std::string> forms_;
  std::unordered_map<std::string, int> ids_;
};

// Relation label -> id map; index m of the per-type weights.
using RelTypeIndex = Vocab;

Vocab build_vocab(const std::vector<Sentence>& corpus);
RelTypeIndex build_rel_index(const std::vector<Sentence>& corpus);
std::vector<std::string> collect_roles(const std::vector<Sentence>& corpus);  // sorted, no "O"

// Undirected dependency neighbor lists with relation-type ids.
// Root attachments (head = 0) contribute no edge.
struct DependencyAdjacency {
  // neighbors[t] = sorted list of (other 0-based index, rel type id)
  std::vector<std::vector<std::pair<int, int>>> neighbors;

  int size() const { return static_cast<int>(neighbors.size()); }
};

DependencyAdjacency build_adjacency(const Sentence& s, const RelTypeIndex& rels);

struct Span {
  int start = 0;  // 1-based, inclusive
  int end = 0;
  std::string role;

  auto operator<=>(const Span&) const = default;
};

// IOBES tag inventory over a role set, with the legality masks used by the
// globally normalized scorer. Tag 0 is "O"; role k owns tags
// B=4k+1, I=4k+2, E=4k+3, S=4k+4.
struct TagSet {
  enum Kind { kOutside, kBegin, kInside, kEnd, kSingle };

  std::vector<std::string> roles;
  std::vector<std::string> tags;
  std::vector<Kind> kind;       // per tag
  std::vector<int> role_of;     // per tag, -1 for "O"
  std::vector<char> allowed_start;
  std::vector<char> allowed_end;
  std::vector<char> allowed_trans;  // [from * n4 + to]

  static TagSet from_roles(std::vector<std::string> roles);

  int n4() const { return static_cast<int>(tags.size()); }
  bool trans_ok(int from, int to) const { return allowed_trans[from * n4() + to] != 0; }
  bool path_valid(const std::vector<int>& path) const;
  int tag_id(const std::string& tag) const;  // fatal when missing
};

// Encode gold role strings (contiguous runs per argument) as tag ids.
std::vector<int> iobes_encode(const std::vector<std::string>& roles, const TagSet& ts);

// Total decoder: ill-formed sequences are repaired by scanning left to
// right; a span opens at B/S or at a stray I/E and closes at the last
// position of its run.
std::vector<Span> iobes_decode(const std::vector<int>& tags, const TagSet& ts);

// Per-token role strings induced by the decoded spans.
std::vector<std::string> roles_from_tags(const std::vector<int>& tags, const TagSet& ts);

// Maximal non-"O" runs. Both gold and predicted spans are extracted this
// way, so scoring commutes with writing the ROLE column to disk.
std::vector<Span> spans_from_roles(const std::vector<std::string>& roles);

struct EmbeddingLoad {
  double coverage = 0.0;  // matched fraction of the non-unk vocabulary
  int matched = 0;
  int file_words = 0;
};

// Text format: header "count dim", then "word v1 ... vdim" per line.
// Matching vocab rows are overwritten; others keep their current values.
EmbeddingLoad load_embeddings(std::istream& in, const Vocab& vocab, Mat64& word_emb);

}  // namespace salstm
