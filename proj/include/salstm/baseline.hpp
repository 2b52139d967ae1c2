#pragma once

#include "salstm/corpus.hpp"
#include "salstm/encoder.hpp"
#include "salstm/numkit.hpp"

namespace salstm {

// Mean of the base features x_i over dependency neighbors of t with i < t
// (existence-only weighting); the empty neighborhood gives the zero vector.
Vec64 dependency_feature(int t, const Mat64& base_feats, const DependencyAdjacency& adj);

// Neighbors of t on the smaller-index side, as consumed by the averaged
// feature above.
std::vector<int> previous_neighbors(const DependencyAdjacency& adj, int t);

// Ordinary bidirectional encoding of x_t concatenated with the averaged
// dependency feature. Requires feature-concat parameters.
ForwardResult encode_baseline(const EncodedSentence& s, const ModelParams& p);

}  // namespace salstm
