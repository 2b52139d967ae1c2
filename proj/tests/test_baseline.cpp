#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "salstm/baseline.hpp"
#include "salstm/crf.hpp"
#include "salstm/rng.hpp"
#include "salstm/training.hpp"

using namespace salstm;

namespace {

DependencyAdjacency adj_from_edges(int n, const std::vector<std::tuple<int, int, int>>& edges) {
  DependencyAdjacency adj;
  adj.neighbors.resize(n);
  for (const auto& [a, b, rel] : edges) {
    adj.neighbors[a].emplace_back(b, rel);
    adj.neighbors[b].emplace_back(a, rel);
  }
  for (auto& list : adj.neighbors) std::sort(list.begin(), list.end());
  return adj;
}

}  // namespace

TEST_CASE("dependency_feature: empty neighborhood and arithmetic mean") {
  Mat64 x(3, 2);
  x.at(0, 0) = 1.0;
  x.at(0, 1) = 3.0;
  x.at(1, 0) = 3.0;
  x.at(1, 1) = 5.0;
  x.at(2, 0) = 9.0;
  x.at(2, 1) = 9.0;

  const DependencyAdjacency adj = adj_from_edges(3, {{0, 2, 1}, {1, 2, 2}});
  CHECK(dependency_feature(0, x, adj) == Vec64{0.0, 0.0});  // T = 0
  CHECK(dependency_feature(2, x, adj) == Vec64{2.0, 4.0});  // mean of rows 0 and 1
  // only earlier tokens count
  CHECK(dependency_feature(1, x, adj) == Vec64{0.0, 0.0});
}

TEST_CASE("dependency_feature matches a scalar accumulation oracle") {
  Rng rng(101);
  const TinyInstance inst = make_tiny_instance(ModelKind::kFeatureConcat, rng);
  const int n = inst.sent.size();
  Mat64 x(n, 3);
  for (double& v : x.a) v = rng.uniform(-1.0, 1.0);
  for (int t = 0; t < n; ++t) {
    Vec64 expect(3, 0.0);
    int count = 0;
    for (const auto& [i, rel] : inst.sent.adj.neighbors[t]) {
      (void)rel;
      if (i < t) {
        ++count;
        for (int c = 0; c < 3; ++c) expect[c] += x.at(i, c);
      }
    }
    if (count > 0)
      for (double& v : expect) v /= count;
    const Vec64 got = dependency_feature(t, x, inst.sent.adj);
    for (int c = 0; c < 3; ++c) CHECK(got[c] == doctest::Approx(expect[c]).epsilon(1e-14));
  }
}

TEST_CASE("dependency_feature is permutation-invariant over the neighbor set") {
  Rng rng(103);
  Mat64 x(5, 2);
  for (double& v : x.a) v = rng.uniform(-1.0, 1.0);
  DependencyAdjacency adj = adj_from_edges(5, {{0, 4, 1}, {1, 4, 2}, {2, 4, 1}, {3, 4, 3}});
  const Vec64 a = dependency_feature(4, x, adj);
  std::reverse(adj.neighbors[4].begin(), adj.neighbors[4].end());
  const Vec64 b = dependency_feature(4, x, adj);
  for (int c = 0; c < 2; ++c) CHECK(std::abs(a[c] - b[c]) <= 1e-12);
}

TEST_CASE("encode_baseline: no edges reduces to vanilla on padded features") {
  Rng rng(107);
  TinyInstance inst = make_tiny_instance(ModelKind::kFeatureConcat, rng);
  inst.sent.adj.neighbors.assign(inst.sent.word_ids.size(), {});
  const ForwardResult fr = encode_baseline(inst.sent, inst.params);
  // the F segment of every feature row is exactly zero
  const int n0 = inst.params.n0();
  for (int t = 0; t < fr.trace.feats.rows; ++t)
    for (int c = n0; c < 2 * n0; ++c) CHECK(fr.trace.feats.at(t, c) == 0.0);
  CHECK(fr.emissions.rows == inst.sent.size());
  CHECK(fr.emissions.cols == inst.tags.n4());

  const Mat64 ref = oracle::emissions_unrolled(inst.sent, inst.params);
  for (size_t i = 0; i < fr.emissions.a.size(); ++i)
    CHECK(std::abs(fr.emissions.a[i] - ref.a[i]) < 1e-12);
}

TEST_CASE("encode_baseline rejects non-concat parameters") {
  Rng rng(109);
  const TinyInstance inst = make_tiny_instance(ModelKind::kVanilla, rng);
  CHECK_THROWS_AS(encode_baseline(inst.sent, inst.params), std::runtime_error);
}

TEST_CASE("baseline never reads the syntax tensors") {
  Rng rng(113);
  const TinyInstance inst = make_tiny_instance(ModelKind::kFeatureConcat, rng);
  const ForwardResult fr = encode_baseline(inst.sent, inst.params);

  // perturbing alpha and the syntax gate leaves emissions bit-identical
  ModelParams mutated = inst.params;
  for (double& v : mutated.alpha) v += 2.0;
  for (double& v : mutated.fwd.W[kGateS].a) v += 2.0;
  for (double& v : mutated.bwd.U[kGateS].a) v += 2.0;
  const ForwardResult fr2 = encode_baseline(inst.sent, mutated);
  CHECK(fr.emissions.a == fr2.emissions.a);

  // and they receive no gradient
  Mat64 d_em(fr.emissions.rows, fr.emissions.cols, 0.0);
  for (double& v : d_em.a) v = rng.uniform(-1.0, 1.0);
  ModelParams g = backward(inst.params, fr.trace, d_em);
  for (double v : g.alpha) CHECK(v == 0.0);
  for (double v : g.fwd.W[kGateS].a) CHECK(v == 0.0);
  for (double v : g.bwd.W[kGateS].a) CHECK(v == 0.0);
}
