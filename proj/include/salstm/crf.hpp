#pragma once

#include <vector>

#include "salstm/corpus.hpp"
#include "salstm/numkit.hpp"

namespace salstm {

struct PathDistribution {
  double log_partition = 0.0;
  Mat64 marginals;  // |tokens| x n4; rows sum to 1, exactly 0 on masked tags
};

// Sum of the selected emission scores; the model has no transition scores.
// The path must be legal under the tag set masks.
double path_score(const Emissions& e, const std::vector<int>& path, const TagSet& ts);

// Forward algorithm in log space over IOBES-legal paths, marginals by
// forward-backward. d(log_partition)/d(emissions) equals the marginals.
PathDistribution log_partition(const Emissions& e, const TagSet& ts);

// path_score(gold) - log_partition. When d_emissions is given it receives
// onehot(gold) - marginals, the gradient of the log likelihood.
double log_likelihood(const Emissions& e, const std::vector<int>& gold, const TagSet& ts,
                      Emissions* d_emissions = nullptr);

struct ViterbiResult {
  std::vector<int> path;
  double score = 0.0;
};

// Highest-scoring legal path; ties break toward the lower tag id at each
// backpointer choice. With enforce_mask = false every tag is reachable
// (diagnostic mode, reduces to the per-token argmax).
ViterbiResult viterbi(const Emissions& e, const TagSet& ts, bool enforce_mask = true);

}  // namespace salstm
