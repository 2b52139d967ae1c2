#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "oracles.hpp"
#include "salstm/crf.hpp"
#include "salstm/rng.hpp"

using namespace salstm;

namespace {

// k tags with no constraints at all
TagSet free_tagset(int k) {
  TagSet ts;
  for (int i = 0; i < k; ++i) {
    ts.tags.push_back("t" + std::to_string(i));
    ts.kind.push_back(TagSet::kOutside);
    ts.role_of.push_back(-1);
  }
  ts.allowed_start.assign(k, 1);
  ts.allowed_end.assign(k, 1);
  ts.allowed_trans.assign(static_cast<size_t>(k) * k, 1);
  return ts;
}

Mat64 random_emissions(int n, int k, Rng& rng) {
  Mat64 e(n, k);
  for (double& v : e.a) v = rng.uniform(-3.0, 3.0);
  return e;
}

Mat64 two_by_two() {
  Mat64 e(2, 2);
  e.at(0, 0) = 1.0;
  e.at(0, 1) = 2.0;
  e.at(1, 0) = 3.0;
  e.at(1, 1) = 4.0;
  return e;
}

}  // namespace

TEST_CASE("path_score: direct sums and validity") {
  const TagSet free2 = free_tagset(2);
  CHECK(path_score(two_by_two(), {0, 1}, free2) == 5.0);
  CHECK(path_score(Mat64(3, 2, 0.0), {0, 1, 0}, free2) == 0.0);

  const TagSet ts = TagSet::from_roles({"A0"});
  CHECK_THROWS_AS(path_score(Mat64(2, 5, 0.0), {ts.tag_id("I-A0"), ts.tag_id("O")}, ts),
                  std::runtime_error);

  Rng rng(31);
  const TagSet iobes = TagSet::from_roles({"A0", "A1"});
  for (int trial = 0; trial < 25; ++trial) {
    const Mat64 e = random_emissions(4, iobes.n4(), rng);
    const auto paths = oracle::enumerate_valid_paths(iobes, 4);
    const auto& y = paths[rng.below(paths.size())];
    CHECK(path_score(e, y, iobes) ==
          doctest::Approx(oracle::path_score_scalar(e, y)).epsilon(1e-12));
  }
}

TEST_CASE("log_partition: tiny closed forms") {
  const TagSet free2 = free_tagset(2);
  CHECK(log_partition(Mat64(1, 2, 0.0), free2).log_partition ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(log_partition(Mat64(2, 2, 0.0), free2).log_partition ==
        doctest::Approx(std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("log_partition and log_likelihood match brute-force enumeration") {
  Rng rng(41);
  const TagSet ts = TagSet::from_roles({"A0", "A1"});
  for (int trial = 0; trial < 40; ++trial) {
    const int n = rng.range(1, 4);
    const Mat64 e = random_emissions(n, ts.n4(), rng);
    const PathDistribution dist = log_partition(e, ts);
    CHECK(dist.log_partition ==
          doctest::Approx(oracle::log_partition_enum(e, ts)).epsilon(1e-10));

    const auto paths = oracle::enumerate_valid_paths(ts, n);
    const auto& gold = paths[rng.below(paths.size())];
    const double ll = log_likelihood(e, gold, ts);
    CHECK(ll <= 1e-12);
    CHECK(ll == doctest::Approx(oracle::path_score_scalar(e, gold) -
                                oracle::log_partition_enum(e, ts))
                    .epsilon(1e-10));

    const Mat64 marg = oracle::marginals_enum(e, ts);
    for (int t = 0; t < n; ++t) {
      double row = 0.0;
      for (int j = 0; j < ts.n4(); ++j) {
        CHECK(std::abs(dist.marginals.at(t, j) - marg.at(t, j)) < 1e-10);
        row += dist.marginals.at(t, j);
      }
      CHECK(std::abs(row - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("log_likelihood: certain and uniform cases") {
  TagSet one = free_tagset(1);
  CHECK(log_likelihood(Mat64(1, 1, 0.0), {0}, one) == doctest::Approx(0.0));

  const TagSet ts = TagSet::from_roles({"A0", "A1"});
  const int n = 3;
  const Mat64 zeros(n, ts.n4(), 0.0);
  const auto paths = oracle::enumerate_valid_paths(ts, n);
  CHECK(log_likelihood(zeros, paths[0], ts) ==
        doctest::Approx(-std::log(static_cast<double>(paths.size()))).epsilon(1e-12));
}

TEST_CASE("log_likelihood gradient is onehot minus marginals, and matches finite differences") {
  Rng rng(43);
  const TagSet ts = TagSet::from_roles({"A0"});
  const int n = 3;
  Mat64 e = random_emissions(n, ts.n4(), rng);
  const auto paths = oracle::enumerate_valid_paths(ts, n);
  const auto& gold = paths[rng.below(paths.size())];

  Mat64 grad;
  log_likelihood(e, gold, ts, &grad);
  const double eps = 1e-6;
  for (int t = 0; t < n; ++t) {
    for (int j = 0; j < ts.n4(); ++j) {
      const double saved = e.at(t, j);
      e.at(t, j) = saved + eps;
      const double up = log_likelihood(e, gold, ts);
      e.at(t, j) = saved - eps;
      const double down = log_likelihood(e, gold, ts);
      e.at(t, j) = saved;
      CHECK(std::abs(grad.at(t, j) - (up - down) / (2 * eps)) < 1e-6);
    }
  }
}

TEST_CASE("marginals are exactly zero on masked tags") {
  const TagSet ts = TagSet::from_roles({"A0"});
  const PathDistribution dist = log_partition(Mat64(2, ts.n4(), 1.0), ts);
  // I-A0 is unreachable at the first position of a 2-token sentence
  CHECK(dist.marginals.at(0, ts.tag_id("I-A0")) == 0.0);
  CHECK(dist.marginals.at(1, ts.tag_id("I-A0")) == 0.0);
}

TEST_CASE("viterbi: unconstrained argmax and constraint engagement") {
  const TagSet free2 = free_tagset(2);
  const ViterbiResult vr = viterbi(two_by_two(), free2);
  CHECK(vr.path == std::vector<int>{1, 1});
  CHECK(vr.score == 6.0);

  // lone I-A0 is maximal everywhere, so the constrained path must differ
  // from the per-token argmax
  const TagSet ts = TagSet::from_roles({"A0"});
  Mat64 e(2, ts.n4(), 0.0);
  e.at(0, ts.tag_id("I-A0")) = 5.0;
  e.at(1, ts.tag_id("I-A0")) = 5.0;
  const ViterbiResult cons = viterbi(e, ts);
  CHECK(ts.path_valid(cons.path));
  CHECK(cons.path != std::vector<int>{ts.tag_id("I-A0"), ts.tag_id("I-A0")});
  const ViterbiResult diag = viterbi(e, ts, /*enforce_mask=*/false);
  CHECK(diag.path == std::vector<int>{ts.tag_id("I-A0"), ts.tag_id("I-A0")});
}

TEST_CASE("viterbi matches brute-force argmax over valid paths") {
  Rng rng(47);
  const TagSet ts = TagSet::from_roles({"A0", "A1"});
  for (int trial = 0; trial < 30; ++trial) {
    const int n = rng.range(1, 5);
    const Mat64 e = random_emissions(n, ts.n4(), rng);
    const ViterbiResult vr = viterbi(e, ts);
    CHECK(vr.path == oracle::viterbi_enum(e, ts));
    CHECK(vr.score == doctest::Approx(oracle::path_score_scalar(e, vr.path)).epsilon(1e-12));
  }
  // deterministic tie-breaking on all-equal scores
  const ViterbiResult tie = viterbi(Mat64(3, ts.n4(), 0.0), ts);
  CHECK(tie.path == oracle::viterbi_enum(Mat64(3, ts.n4(), 0.0), ts));
}

TEST_CASE("viterbi path is optimal under log_likelihood") {
  Rng rng(53);
  const TagSet ts = TagSet::from_roles({"A0"});
  for (int trial = 0; trial < 10; ++trial) {
    const int n = rng.range(2, 4);
    const Mat64 e = random_emissions(n, ts.n4(), rng);
    const ViterbiResult vr = viterbi(e, ts);
    const double best = log_likelihood(e, vr.path, ts);
    for (const auto& y : oracle::enumerate_valid_paths(ts, n))
      CHECK(best >= log_likelihood(e, y, ts) - 1e-12);
  }
}

TEST_CASE("global normalization is invariant to per-token shifts") {
  Rng rng(59);
  const TagSet ts = TagSet::from_roles({"A0", "A1"});
  const int n = 4;
  const Mat64 e = random_emissions(n, ts.n4(), rng);
  Mat64 shifted = e;
  Vec64 shift(n);
  double total = 0.0;
  for (int t = 0; t < n; ++t) {
    shift[t] = rng.uniform(-5.0, 5.0);
    total += shift[t];
    for (int j = 0; j < ts.n4(); ++j) shifted.at(t, j) += shift[t];
  }
  const PathDistribution a = log_partition(e, ts);
  const PathDistribution b = log_partition(shifted, ts);
  CHECK(b.log_partition == doctest::Approx(a.log_partition + total).epsilon(1e-10));
  for (int t = 0; t < n; ++t)
    for (int j = 0; j < ts.n4(); ++j)
      CHECK(std::abs(a.marginals.at(t, j) - b.marginals.at(t, j)) < 1e-10);

  const auto gold = oracle::enumerate_valid_paths(ts, n)[0];
  CHECK(log_likelihood(e, gold, ts) ==
        doctest::Approx(log_likelihood(shifted, gold, ts)).epsilon(1e-10));
  CHECK(viterbi(e, ts).path == viterbi(shifted, ts).path);
}

TEST_CASE("log_partition rejects impossible inputs") {
  TagSet ts = free_tagset(2);
  ts.allowed_start.assign(2, 0);  // malformed: nothing may start
  CHECK_THROWS_AS(log_partition(Mat64(2, 2, 0.0), ts), std::runtime_error);
  CHECK_THROWS_AS(log_partition(Mat64(0, 2, 0.0), free_tagset(2)), std::runtime_error);
}
