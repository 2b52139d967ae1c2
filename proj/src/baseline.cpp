#include "salstm/baseline.hpp"

namespace salstm {

std::vector<int> previous_neighbors(const DependencyAdjacency& adj, int t) {
  std::vector<int> out;
  for (const auto& [i, rel] : adj.neighbors[t]) {
    (void)rel;
    if (i < t) out.push_back(i);
  }
  return out;
}

Vec64 dependency_feature(int t, const Mat64& base_feats, const DependencyAdjacency& adj) {
  Vec64 f(base_feats.cols, 0.0);
  const std::vector<int> nbrs = previous_neighbors(adj, t);
  if (nbrs.empty()) return f;
  for (int i : nbrs) {
    const double* row = base_feats.row(i);
    for (int c = 0; c < base_feats.cols; ++c) f[c] += row[c];
  }
  const double inv = 1.0 / static_cast<double>(nbrs.size());
  for (double& v : f) v *= inv;
  return f;
}

ForwardResult encode_baseline(const EncodedSentence& s, const ModelParams& p) {
  if (p.kind != ModelKind::kFeatureConcat)
    fatal("encode_baseline requires feature_concat parameters");
  return encode_sentence(s, p);
}

}  // namespace salstm
