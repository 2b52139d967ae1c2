#include "salstm/crf.hpp"

#include <cmath>
#include <limits>

namespace salstm {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

double path_score(const Emissions& e, const std::vector<int>& path, const TagSet& ts) {
  if (static_cast<int>(path.size()) != e.rows) fatal("path_score: path length mismatch");
  if (!ts.path_valid(path)) fatal("path_score: path violates the tag grammar");
  double s = 0.0;
  for (int t = 0; t < e.rows; ++t) s += e.at(t, path[t]);
  return s;
}

PathDistribution log_partition(const Emissions& e, const TagSet& ts) {
  const int n = e.rows;
  const int k = e.cols;
  if (n == 0) fatal("log_partition: empty emissions");
  if (k != ts.n4()) fatal("log_partition: tag count mismatch");

  Mat64 fwd(n, k, kNegInf);
  for (int j = 0; j < k; ++j)
    if (ts.allowed_start[j]) fwd.at(0, j) = e.at(0, j);
  Vec64 acc(k);
  for (int t = 1; t < n; ++t) {
    for (int j = 0; j < k; ++j) {
      for (int i = 0; i < k; ++i)
        acc[i] = ts.trans_ok(i, j) ? fwd.at(t - 1, i) : kNegInf;
      const double lse = logsumexp(acc);
      fwd.at(t, j) = lse == kNegInf ? kNegInf : lse + e.at(t, j);
    }
  }
  for (int j = 0; j < k; ++j) acc[j] = ts.allowed_end[j] ? fwd.at(n - 1, j) : kNegInf;
  const double log_z = logsumexp(acc);
  if (log_z == kNegInf) fatal("log_partition: no valid path under the tag masks");

  Mat64 bwd(n, k, kNegInf);
  for (int j = 0; j < k; ++j)
    if (ts.allowed_end[j]) bwd.at(n - 1, j) = 0.0;
  for (int t = n - 2; t >= 0; --t) {
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j)
        acc[j] = ts.trans_ok(i, j) ? e.at(t + 1, j) + bwd.at(t + 1, j) : kNegInf;
      bwd.at(t, i) = logsumexp(acc);
    }
  }

  PathDistribution dist;
  dist.log_partition = log_z;
  dist.marginals = Mat64(n, k, 0.0);
  for (int t = 0; t < n; ++t)
    for (int j = 0; j < k; ++j)
      dist.marginals.at(t, j) = std::exp(fwd.at(t, j) + bwd.at(t, j) - log_z);
  return dist;
}

double log_likelihood(const Emissions& e, const std::vector<int>& gold, const TagSet& ts,
                      Emissions* d_emissions) {
  PathDistribution dist = log_partition(e, ts);
  const double score = path_score(e, gold, ts);
  if (d_emissions != nullptr) {
    *d_emissions = Mat64(e.rows, e.cols, 0.0);
    for (int t = 0; t < e.rows; ++t) {
      for (int j = 0; j < e.cols; ++j) d_emissions->at(t, j) = -dist.marginals.at(t, j);
      d_emissions->at(t, gold[t]) += 1.0;
    }
  }
  return score - dist.log_partition;
}

ViterbiResult viterbi(const Emissions& e, const TagSet& ts, bool enforce_mask) {
  const int n = e.rows;
  const int k = e.cols;
  if (n == 0) fatal("viterbi: empty emissions");
  if (k != ts.n4()) fatal("viterbi: tag count mismatch");

  Mat64 best(n, k, kNegInf);
  std::vector<int> back(static_cast<size_t>(n) * k, -1);
  for (int j = 0; j < k; ++j)
    if (!enforce_mask || ts.allowed_start[j]) best.at(0, j) = e.at(0, j);
  for (int t = 1; t < n; ++t) {
    for (int j = 0; j < k; ++j) {
      double b = kNegInf;
      int arg = -1;
      for (int i = 0; i < k; ++i) {
        if (enforce_mask && !ts.trans_ok(i, j)) continue;
        const double v = best.at(t - 1, i);
        if (v > b) {  // strict: ties keep the lower tag id
          b = v;
          arg = i;
        }
      }
      if (arg >= 0) {
        best.at(t, j) = b + e.at(t, j);
        back[static_cast<size_t>(t) * k + j] = arg;
      }
    }
  }
  double b = kNegInf;
  int arg = -1;
  for (int j = 0; j < k; ++j) {
    if (enforce_mask && !ts.allowed_end[j]) continue;
    if (best.at(n - 1, j) > b) {
      b = best.at(n - 1, j);
      arg = j;
    }
  }
  if (arg < 0) fatal("viterbi: no valid path under the tag masks");

  ViterbiResult res;
  res.score = b;
  res.path.assign(n, 0);
  res.path[n - 1] = arg;
  for (int t = n - 1; t > 0; --t) res.path[t - 1] = back[static_cast<size_t>(t) * k + res.path[t]];
  return res;
}

}  // namespace salstm
