#include <doctest.h>

#include <cmath>
#include <set>
#include <stdexcept>

#include "oracles.hpp"
#include "salstm/crf.hpp"
#include "salstm/encoder.hpp"
#include "salstm/rng.hpp"
#include "salstm/training.hpp"

using namespace salstm;

namespace {

double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// 1-dim cell with every weight w and zero biases
CellParams scalar_cell(double w) {
  CellParams p;
  for (int g = 0; g < kNumGates; ++g) {
    p.W[g] = Mat64(1, 1, w);
    p.U[g] = Mat64(1, 1, w);
    p.b[g] = Vec64(1, 0.0);
  }
  return p;
}

double max_param_diff(const ModelParams& a, const ModelParams& b) {
  double worst = 0.0;
  auto ta = const_cast<ModelParams&>(a).tensors();
  auto tb = const_cast<ModelParams&>(b).tensors();
  for (size_t i = 0; i < ta.size(); ++i)
    for (size_t j = 0; j < ta[i].data->size(); ++j)
      worst = std::max(worst, std::abs((*ta[i].data)[j] - (*tb[i].data)[j]));
  return worst;
}

double max_abs(const Vec64& v) {
  double worst = 0.0;
  for (double x : v) worst = std::max(worst, std::abs(x));
  return worst;
}

}  // namespace

TEST_CASE("lstm_step: zero-weight fixed points") {
  const CellParams p = scalar_cell(0.0);
  const StepOut a = lstm_step(p, {0.3}, {0.0}, {0.0});
  CHECK(a.gi[0] == 0.5);
  CHECK(a.gf[0] == 0.5);
  CHECK(a.go[0] == 0.5);
  CHECK(a.c[0] == 0.0);
  CHECK(a.h[0] == 0.0);

  const StepOut b = lstm_step(p, {0.3}, {0.1}, {0.8});
  CHECK(b.c[0] == doctest::Approx(0.4).epsilon(1e-15));  // forget gate at one half
}

TEST_CASE("lstm_step: scalar hand evaluation") {
  const CellParams p = scalar_cell(1.0);
  const StepOut o = lstm_step(p, {1.0}, {0.0}, {0.0});
  const double ct = sig(1.0) * std::tanh(1.0);
  const double ht = sig(1.0) * std::tanh(ct);
  CHECK(o.ctilde[0] == doctest::Approx(std::tanh(1.0)).epsilon(1e-15));
  CHECK(o.c[0] == doctest::Approx(ct).epsilon(1e-15));
  CHECK(o.h[0] == doctest::Approx(ht).epsilon(1e-15));
  CHECK(o.c[0] == doctest::Approx(0.5568).epsilon(1e-3));
  CHECK(o.h[0] == doctest::Approx(0.3694).epsilon(1e-3));
}

TEST_CASE("sa_lstm_step: reduction, gating, scalar case") {
  const CellParams zero = scalar_cell(0.0);
  const StepOut plain = lstm_step(zero, {0.4}, {0.2}, {0.1});
  const StepOut with_zero_s = sa_lstm_step(zero, {0.4}, {0.2}, {0.1}, {0.0});
  CHECK(with_zero_s.h[0] == plain.h[0]);

  const StepOut gated = sa_lstm_step(zero, {0.0}, {0.0}, {0.0}, {0.6});
  CHECK(gated.h[0] == doctest::Approx(0.3).epsilon(1e-15));  // sigma(0) * s

  const CellParams ones = scalar_cell(1.0);
  const StepOut o = sa_lstm_step(ones, {1.0}, {0.0}, {0.0}, {0.25});
  const double base = sig(1.0) * std::tanh(sig(1.0) * std::tanh(1.0));
  CHECK(o.h[0] == doctest::Approx(base + sig(1.0) * 0.25).epsilon(1e-15));
  CHECK(o.h[0] == doctest::Approx(0.5522).epsilon(1e-3));
}

TEST_CASE("syntax_context: empty, zero-weight, scalar") {
  CHECK(max_abs(syntax_context({}, {}, 4)) == 0.0);

  const Vec64 h{0.5};
  CHECK(syntax_context({&h}, {0.0}, 1)[0] == 0.0);
  CHECK(syntax_context({&h}, {1.0}, 1)[0] == doctest::Approx(0.4621171573).epsilon(1e-9));
}

TEST_CASE("embed: zero cases and the scalar tanh reference") {
  CHECK(max_abs(embed({0.7, -0.3}, Mat64(3, 2, 0.0))) == 0.0);
  CHECK(max_abs(embed({0.0, 0.0}, Mat64(3, 2, 0.55))) == 0.0);
  CHECK(embed({0.5}, Mat64(1, 1, 1.0))[0] == doctest::Approx(0.4621171573).epsilon(1e-9));
  CHECK_THROWS_AS(embed({0.5}, Mat64(1, 2, 1.0)), std::runtime_error);
}

TEST_CASE("encode_sentence: single-token shape") {
  Rng rng(61);
  TinyInstance inst = make_tiny_instance(ModelKind::kSaTyped, rng);
  inst.sent.word_ids = {1};
  inst.sent.pred_flag = {1};
  inst.sent.adj.neighbors.assign(1, {});
  inst.sent.gold_tags = {0};
  const ForwardResult fr = encode_sentence(inst.sent, inst.params);
  CHECK(fr.emissions.rows == 1);
  CHECK(fr.emissions.cols == inst.tags.n4());
}

TEST_CASE("encode_sentence matches the unrolled-equation oracle for every kind") {
  for (ModelKind kind : {ModelKind::kVanilla, ModelKind::kFeatureConcat, ModelKind::kSaBinary,
                         ModelKind::kSaTyped}) {
    Rng rng(100 + static_cast<int>(kind));
    for (int trial = 0; trial < 5; ++trial) {
      const TinyInstance inst = make_tiny_instance(kind, rng);
      const ForwardResult fr = encode_sentence(inst.sent, inst.params);
      const Mat64 ref = oracle::emissions_unrolled(inst.sent, inst.params);
      REQUIRE(fr.emissions.rows == ref.rows);
      for (size_t i = 0; i < fr.emissions.a.size(); ++i)
        CHECK(std::abs(fr.emissions.a[i] - ref.a[i]) < 1e-12);
    }
  }
}

TEST_CASE("reduction: SA modes equal vanilla on sentences without edges") {
  Rng rng(71);
  for (ModelKind kind : {ModelKind::kSaBinary, ModelKind::kSaTyped}) {
    TinyInstance inst = make_tiny_instance(kind, rng);
    inst.sent.adj.neighbors.assign(inst.sent.word_ids.size(), {});

    ModelParams vanilla = inst.params;
    vanilla.kind = ModelKind::kVanilla;

    const ForwardResult sa = encode_sentence(inst.sent, inst.params);
    const ForwardResult vn = encode_sentence(inst.sent, vanilla);
    for (size_t i = 0; i < sa.emissions.a.size(); ++i)
      CHECK(std::abs(sa.emissions.a[i] - vn.emissions.a[i]) <= 1e-12);

    Mat64 d_em;
    log_likelihood(sa.emissions, inst.sent.gold_tags, inst.tags, &d_em);
    ModelParams g_sa = backward(inst.params, sa.trace, d_em);
    ModelParams g_vn = backward(vanilla, vn.trace, d_em);
    g_sa.kind = g_vn.kind;  // compare tensors only
    CHECK(max_param_diff(g_sa, g_vn) <= 1e-12);

    // the syntax-only tensors see no gradient at all
    CHECK(max_abs(g_sa.alpha) == 0.0);
    for (int g = kGateS; g <= kGateS; ++g) {
      CHECK(max_abs(g_sa.fwd.W[g].a) == 0.0);
      CHECK(max_abs(g_sa.fwd.U[g].a) == 0.0);
      CHECK(max_abs(g_sa.fwd.b[g]) == 0.0);
      CHECK(max_abs(g_sa.bwd.W[g].a) == 0.0);
    }
  }
}

TEST_CASE("gate ranges stay inside their open intervals") {
  Rng rng(73);
  const TinyInstance inst = make_tiny_instance(ModelKind::kSaTyped, rng);
  const ForwardResult fr = encode_sentence(inst.sent, inst.params);
  for (const DirTrace* dir : {&fr.trace.fwd, &fr.trace.bwd}) {
    for (const StepOut& st : dir->steps) {
      for (const Vec64* gate : {&st.gi, &st.gf, &st.go, &st.gs})
        for (double v : *gate) {
          CHECK(v > 0.0);
          CHECK(v < 1.0);
        }
      for (const Vec64* squashed : {&st.ctilde, &st.tanh_c, &st.s})
        for (double v : *squashed) {
          CHECK(v > -1.0);
          CHECK(v < 1.0);
        }
    }
  }
}

TEST_CASE("each undirected edge enters one forward and one backward step") {
  Rng rng(79);
  const TinyInstance inst = make_tiny_instance(ModelKind::kSaBinary, rng, 6);
  const DependencyAdjacency& adj = inst.sent.adj;
  const int n = adj.size();

  std::multiset<std::pair<int, int>> edges;  // {min, max} per undirected edge
  for (int t = 0; t < n; ++t)
    for (const auto& [i, rel] : adj.neighbors[t]) {
      (void)rel;
      if (i < t) edges.insert({i, t});
    }

  for (bool forward : {true, false}) {
    std::multiset<std::pair<int, int>> seen;
    for (int t = 0; t < n; ++t)
      for (const auto& [i, rel] : dir_neighbors(adj, t, forward)) {
        (void)rel;
        seen.insert({std::min(i, t), std::max(i, t)});
        // consumed at the larger index going forward, smaller going backward
        CHECK((forward ? i < t : i > t));
      }
    CHECK(seen == edges);
  }
}

TEST_CASE("locality: weights of absent relation types do not affect emissions") {
  Rng rng(83);
  TinyInstance inst = make_tiny_instance(ModelKind::kSaTyped, rng);
  // restrict every edge to relation type 1
  for (auto& list : inst.sent.adj.neighbors)
    for (auto& [i, rel] : list) rel = 1;

  const ForwardResult before = encode_sentence(inst.sent, inst.params);
  inst.params.alpha[2] += 3.5;  // type 2 is absent from the sentence
  const ForwardResult after = encode_sentence(inst.sent, inst.params);
  CHECK(before.emissions.a == after.emissions.a);

  inst.params.alpha[1] += 3.5;  // the present type must matter
  const ForwardResult changed = encode_sentence(inst.sent, inst.params);
  double diff = 0.0;
  for (size_t i = 0; i < changed.emissions.a.size(); ++i)
    diff = std::max(diff, std::abs(changed.emissions.a[i] - before.emissions.a[i]));
  CHECK(diff > 0.0);
}

TEST_CASE("backward: zero upstream gradient gives zero everywhere") {
  Rng rng(89);
  const TinyInstance inst = make_tiny_instance(ModelKind::kSaTyped, rng);
  const ForwardResult fr = encode_sentence(inst.sent, inst.params);
  ModelParams g = backward(inst.params, fr.trace, Mat64(fr.emissions.rows, fr.emissions.cols, 0.0));
  for (const TensorRef& t : g.tensors()) CHECK(max_abs(*t.data) == 0.0);
}

TEST_CASE("backward: vanilla mode leaves syntax tensors untouched") {
  Rng rng(97);
  const TinyInstance inst = make_tiny_instance(ModelKind::kVanilla, rng);
  const ForwardResult fr = encode_sentence(inst.sent, inst.params);
  Mat64 d_em(fr.emissions.rows, fr.emissions.cols, 0.0);
  for (double& v : d_em.a) v = rng.uniform(-1.0, 1.0);
  ModelParams g = backward(inst.params, fr.trace, d_em);
  CHECK(max_abs(g.alpha) == 0.0);
  CHECK(max_abs(g.fwd.W[kGateS].a) == 0.0);
  CHECK(max_abs(g.fwd.U[kGateS].a) == 0.0);
  CHECK(max_abs(g.fwd.b[kGateS]) == 0.0);
  CHECK(max_abs(g.bwd.W[kGateS].a) == 0.0);
  CHECK(max_abs(g.bwd.U[kGateS].a) == 0.0);
  CHECK(max_abs(g.bwd.b[kGateS]) == 0.0);
}

TEST_CASE("analytic gradients match central finite differences") {
  const GradcheckReport report = gradcheck(12345);
  REQUIRE(report.models.size() == 4);
  for (const GradcheckModelReport& m : report.models) {
    INFO("model ", to_string(m.kind), " worst ", m.max_rel_err);
    CHECK(m.max_rel_err < 1e-4);
  }
}
