#include "salstm/encoder.hpp"

#include <algorithm>
#include <cmath>

#include "salstm/baseline.hpp"

namespace salstm {

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "vanilla") return ModelKind::kVanilla;
  if (s == "feature_concat") return ModelKind::kFeatureConcat;
  if (s == "sa_binary") return ModelKind::kSaBinary;
  if (s == "sa_typed") return ModelKind::kSaTyped;
  fatal("unknown model kind '" + s + "' (expected vanilla|feature_concat|sa_binary|sa_typed)");
}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kVanilla: return "vanilla";
    case ModelKind::kFeatureConcat: return "feature_concat";
    case ModelKind::kSaBinary: return "sa_binary";
    case ModelKind::kSaTyped: return "sa_typed";
  }
  fatal("bad model kind");
}

namespace {

void fill_uniform(Vec64& v, Rng& rng) {
  for (double& x : v) x = rng.uniform(-0.08, 0.08);
}

Vec64 row_vec(const Mat64& m, int r) {
  return Vec64(m.row(r), m.row(r) + m.cols);
}

// W z + U h + b
Vec64 affine(const Mat64& w, const Mat64& u, const Vec64& b, const Vec64& z, const Vec64& h) {
  Vec64 out = matvec(w, z);
  const Vec64 uh = matvec(u, h);
  for (size_t j = 0; j < out.size(); ++j) out[j] += uh[j] + b[j];
  return out;
}

}  // namespace

ModelParams ModelParams::init(ModelKind kind, int n0_word, int n0_flag, int n1, int nh, int n3,
                              int n4, int n_rels, int vocab_size, Rng& rng) {
  if (n0_word <= 0 || n0_flag <= 0 || n1 <= 0 || nh <= 0 || n3 <= 0 || n4 <= 0 || n_rels <= 0 ||
      vocab_size <= 0)
    fatal("ModelParams::init: all dimensions must be positive");
  ModelParams p;
  p.kind = kind;
  p.n0_word = n0_word;
  p.n0_flag = n0_flag;
  p.n1 = n1;
  p.nh = nh;
  p.n3 = n3;
  p.n4 = n4;
  p.word_emb = Mat64(vocab_size, n0_word);
  p.flag_emb = Mat64(2, n0_flag);
  p.W1 = Mat64(n1, p.feat_dim());
  for (CellParams* cp : {&p.fwd, &p.bwd}) {
    for (int g = 0; g < kNumGates; ++g) {
      cp->W[g] = Mat64(nh, n1);
      cp->U[g] = Mat64(nh, nh);
      cp->b[g] = Vec64(nh, 0.0);
    }
  }
  p.alpha = Vec64(n_rels, 1.0);
  p.W2 = Mat64(n3, 2 * nh);
  p.W3 = Mat64(n4, n3);

  fill_uniform(p.word_emb.a, rng);
  fill_uniform(p.flag_emb.a, rng);
  fill_uniform(p.W1.a, rng);
  for (CellParams* cp : {&p.fwd, &p.bwd}) {
    for (int g = 0; g < kNumGates; ++g) {
      fill_uniform(cp->W[g].a, rng);
      fill_uniform(cp->U[g].a, rng);
    }
  }
  fill_uniform(p.W2.a, rng);
  fill_uniform(p.W3.a, rng);
  return p;
}

std::vector<TensorRef> ModelParams::tensors() {
  static const char* kGateNames[kNumGates] = {"c", "i", "f", "o", "s"};
  std::vector<TensorRef> out;
  out.push_back({"word_emb", &word_emb.a});
  out.push_back({"flag_emb", &flag_emb.a});
  out.push_back({"w1", &W1.a});
  for (auto [dir, cp] : {std::pair<const char*, CellParams*>{"fwd", &fwd}, {"bwd", &bwd}}) {
    for (int g = 0; g < kNumGates; ++g)
      out.push_back({std::string(dir) + ".w_" + kGateNames[g], &cp->W[g].a});
    for (int g = 0; g < kNumGates; ++g)
      out.push_back({std::string(dir) + ".u_" + kGateNames[g], &cp->U[g].a});
    for (int g = 0; g < kNumGates; ++g)
      out.push_back({std::string(dir) + ".b_" + kGateNames[g], &cp->b[g]});
  }
  out.push_back({"alpha", &alpha});
  out.push_back({"w2", &W2.a});
  out.push_back({"w3", &W3.a});
  return out;
}

std::vector<TensorRef> ModelParams::tensors() const {
  return const_cast<ModelParams*>(this)->tensors();
}

ModelParams zeros_like(const ModelParams& p) {
  ModelParams g = p;
  for (TensorRef t : g.tensors()) std::fill(t.data->begin(), t.data->end(), 0.0);
  return g;
}

EncodedSentence encode_tokens(const Sentence& s, const Vocab& vocab, const RelTypeIndex& rels,
                              const TagSet* gold_tags, int* unk_count) {
  EncodedSentence e;
  e.word_ids.reserve(s.size());
  e.pred_flag.reserve(s.size());
  for (const Token& t : s.tokens) {
    e.word_ids.push_back(vocab.lookup(t.form));
    if (unk_count != nullptr && !vocab.contains(t.form)) ++*unk_count;
    e.pred_flag.push_back(t.is_predicate ? 1 : 0);
  }
  e.adj = build_adjacency(s, rels);
  if (gold_tags != nullptr) e.gold_tags = iobes_encode(s.roles(), *gold_tags);
  return e;
}

StepOut lstm_step(const CellParams& p, const Vec64& z, const Vec64& h_prev, const Vec64& c_prev) {
  StepOut o;
  o.ctilde = tanh_vec(affine(p.W[kGateC], p.U[kGateC], p.b[kGateC], z, h_prev));
  o.gi = sigmoid_vec(affine(p.W[kGateI], p.U[kGateI], p.b[kGateI], z, h_prev));
  o.gf = sigmoid_vec(affine(p.W[kGateF], p.U[kGateF], p.b[kGateF], z, h_prev));
  o.go = sigmoid_vec(affine(p.W[kGateO], p.U[kGateO], p.b[kGateO], z, h_prev));
  const size_t nh = o.ctilde.size();
  o.c.resize(nh);
  for (size_t j = 0; j < nh; ++j) o.c[j] = o.gi[j] * o.ctilde[j] + o.gf[j] * c_prev[j];
  o.tanh_c = tanh_vec(o.c);
  o.h.resize(nh);
  for (size_t j = 0; j < nh; ++j) o.h[j] = o.go[j] * o.tanh_c[j];
  return o;
}

StepOut sa_lstm_step(const CellParams& p, const Vec64& z, const Vec64& h_prev,
                     const Vec64& c_prev, const Vec64& s_t) {
  StepOut o = lstm_step(p, z, h_prev, c_prev);
  o.gs = sigmoid_vec(affine(p.W[kGateS], p.U[kGateS], p.b[kGateS], z, h_prev));
  o.s = s_t;
  // the syntax term joins the hidden vector, never the cell state
  for (size_t j = 0; j < o.h.size(); ++j) o.h[j] += o.gs[j] * s_t[j];
  return o;
}

Vec64 syntax_context(const std::vector<const Vec64*>& neighbor_h, const Vec64& weights, int nh) {
  Vec64 acc(nh, 0.0);
  for (size_t k = 0; k < neighbor_h.size(); ++k) axpy(weights[k], *neighbor_h[k], acc);
  return tanh_vec(acc);
}

std::vector<std::pair<int, int>> dir_neighbors(const DependencyAdjacency& adj, int t,
                                               bool forward) {
  std::vector<std::pair<int, int>> out;
  for (const auto& [i, rel] : adj.neighbors[t])
    if (forward ? i < t : i > t) out.emplace_back(i, rel);
  return out;
}

Vec64 embed(const Vec64& x_t, const Mat64& w1) { return tanh_vec(matvec(w1, x_t)); }

namespace {

Mat64 base_features(const EncodedSentence& s, const ModelParams& p) {
  Mat64 x(s.size(), p.n0());
  for (int t = 0; t < s.size(); ++t) {
    const int wid = s.word_ids[t];
    if (wid < 0 || wid >= p.word_emb.rows) fatal("encoder: word id outside embedding table");
    double* row = x.row(t);
    const double* w = p.word_emb.row(wid);
    for (int c = 0; c < p.n0_word; ++c) row[c] = w[c];
    const double* f = p.flag_emb.row(s.pred_flag[t] ? 1 : 0);
    for (int c = 0; c < p.n0_flag; ++c) row[p.n0_word + c] = f[c];
  }
  return x;
}

void run_direction(const EncodedSentence& s, const ModelParams& p, const Mat64& z, bool forward,
                   std::vector<StepOut>& steps) {
  const int n = s.size();
  const CellParams& cp = forward ? p.fwd : p.bwd;
  steps.resize(n);
  Vec64 h_prev(p.nh, 0.0);
  Vec64 c_prev(p.nh, 0.0);
  for (int k = 0; k < n; ++k) {
    const int t = forward ? k : n - 1 - k;
    const Vec64 zt = row_vec(z, t);
    if (p.syntax_mode()) {
      std::vector<const Vec64*> hs;
      Vec64 w;
      for (const auto& [i, rel] : dir_neighbors(s.adj, t, forward)) {
        hs.push_back(&steps[i].h);
        w.push_back(p.rel_weight(rel));
      }
      steps[t] = sa_lstm_step(cp, zt, h_prev, c_prev, syntax_context(hs, w, p.nh));
    } else {
      steps[t] = lstm_step(cp, zt, h_prev, c_prev);
    }
    h_prev = steps[t].h;
    c_prev = steps[t].c;
  }
}

}  // namespace

ForwardResult encode_sentence(const EncodedSentence& s, const ModelParams& p) {
  const int n = s.size();
  if (n == 0) fatal("encode_sentence: empty sentence");
  if (s.adj.size() != n) fatal("encode_sentence: adjacency size mismatch");

  ForwardResult res;
  StepTrace& tr = res.trace;
  tr.sent = s;

  const Mat64 x = base_features(s, p);
  if (p.kind == ModelKind::kFeatureConcat) {
    tr.feats = Mat64(n, 2 * p.n0());
    for (int t = 0; t < n; ++t) {
      double* row = tr.feats.row(t);
      for (int c = 0; c < p.n0(); ++c) row[c] = x.at(t, c);
      const Vec64 f = dependency_feature(t, x, s.adj);
      for (int c = 0; c < p.n0(); ++c) row[p.n0() + c] = f[c];
    }
  } else {
    tr.feats = x;
  }
  if (p.W1.cols != tr.feats.cols) fatal("encoder: W1 width does not match the feature width");

  tr.z = Mat64(n, p.n1);
  for (int t = 0; t < n; ++t) {
    const Vec64 zt = embed(row_vec(tr.feats, t), p.W1);
    std::copy(zt.begin(), zt.end(), tr.z.row(t));
  }

  run_direction(s, p, tr.z, true, tr.fwd.steps);
  run_direction(s, p, tr.z, false, tr.bwd.steps);

  res.emissions = Mat64(n, p.n4);
  tr.proj_r = Mat64(n, p.n3);
  Vec64 a(2 * p.nh);
  for (int t = 0; t < n; ++t) {
    const Vec64& hf = tr.fwd.steps[t].h;
    const Vec64& hb = tr.bwd.steps[t].h;
    std::copy(hf.begin(), hf.end(), a.begin());
    std::copy(hb.begin(), hb.end(), a.begin() + p.nh);
    const Vec64 r = tanh_vec(matvec(p.W2, a));
    std::copy(r.begin(), r.end(), tr.proj_r.row(t));
    const Vec64 o = matvec(p.W3, r);
    std::copy(o.begin(), o.end(), res.emissions.row(t));
  }
  return res;
}

namespace {

// d(sigma(x)) and d(tanh(x)) expressed through the cached activations
Vec64 sigmoid_back(const Vec64& d_g, const Vec64& g) {
  Vec64 out(d_g.size());
  for (size_t j = 0; j < d_g.size(); ++j) out[j] = d_g[j] * g[j] * (1.0 - g[j]);
  return out;
}

Vec64 tanh_back(const Vec64& d_v, const Vec64& v) {
  Vec64 out(d_v.size());
  for (size_t j = 0; j < d_v.size(); ++j) out[j] = d_v[j] * (1.0 - v[j] * v[j]);
  return out;
}

void backward_direction(const ModelParams& p, const StepTrace& tr, bool forward,
                        std::vector<Vec64>& dh, Mat64& d_z, ModelParams& g) {
  const int n = tr.sent.size();
  const int nh = p.nh;
  const CellParams& cp = forward ? p.fwd : p.bwd;
  CellParams& gc = forward ? g.fwd : g.bwd;
  const auto& steps = forward ? tr.fwd.steps : tr.bwd.steps;
  const bool typed = p.kind == ModelKind::kSaTyped;
  const Vec64 zero(nh, 0.0);

  Vec64 carry(nh, 0.0);
  for (int k = n - 1; k >= 0; --k) {
    const int t = forward ? k : n - 1 - k;
    const int prev_t = k > 0 ? (forward ? t - 1 : t + 1) : -1;
    const StepOut& st = steps[t];
    const Vec64& d_h = dh[t];
    const Vec64& h_prev = prev_t >= 0 ? steps[prev_t].h : zero;
    const Vec64& c_prev = prev_t >= 0 ? steps[prev_t].c : zero;

    Vec64 d_go(nh), d_c(nh);
    for (int j = 0; j < nh; ++j) {
      d_go[j] = d_h[j] * st.tanh_c[j];
      d_c[j] = d_h[j] * st.go[j] * (1.0 - st.tanh_c[j] * st.tanh_c[j]) + carry[j];
    }

    Vec64 d_ns;
    if (p.syntax_mode()) {
      Vec64 d_gs(nh), d_a(nh);
      for (int j = 0; j < nh; ++j) {
        d_gs[j] = d_h[j] * st.s[j];
        d_a[j] = d_h[j] * st.gs[j] * (1.0 - st.s[j] * st.s[j]);
      }
      for (const auto& [i, rel] : dir_neighbors(tr.sent.adj, t, forward)) {
        axpy(p.rel_weight(rel), d_a, dh[i]);
        if (typed) g.alpha[rel] += dot(d_a, steps[i].h);
      }
      d_ns = sigmoid_back(d_gs, st.gs);
    }

    Vec64 d_gi(nh), d_gf(nh), d_ctilde(nh);
    for (int j = 0; j < nh; ++j) {
      d_gi[j] = d_c[j] * st.ctilde[j];
      d_ctilde[j] = d_c[j] * st.gi[j];
      d_gf[j] = d_c[j] * c_prev[j];
      carry[j] = d_c[j] * st.gf[j];
    }

    const Vec64 zt = row_vec(tr.z, t);
    auto accumulate_gate = [&](int gate, const Vec64& d_n) {
      add_outer(gc.W[gate], d_n, zt);
      add_outer(gc.U[gate], d_n, h_prev);
      axpy(1.0, d_n, gc.b[gate]);
      const Vec64 dz = matvec_t(cp.W[gate], d_n);
      double* dzr = d_z.row(t);
      for (int c = 0; c < p.n1; ++c) dzr[c] += dz[c];
      if (prev_t >= 0) axpy(1.0, matvec_t(cp.U[gate], d_n), dh[prev_t]);
    };
    accumulate_gate(kGateC, tanh_back(d_ctilde, st.ctilde));
    accumulate_gate(kGateI, sigmoid_back(d_gi, st.gi));
    accumulate_gate(kGateF, sigmoid_back(d_gf, st.gf));
    accumulate_gate(kGateO, sigmoid_back(d_go, st.go));
    if (p.syntax_mode()) accumulate_gate(kGateS, d_ns);
  }
}

}  // namespace

ModelParams backward(const ModelParams& p, const StepTrace& tr, const Mat64& d_emissions) {
  const int n = tr.sent.size();
  if (d_emissions.rows != n || d_emissions.cols != p.n4)
    fatal("backward: emission gradient shape mismatch");
  if (tr.z.cols != p.n1 || tr.feats.cols != p.W1.cols)
    fatal("backward: trace does not match the parameters");

  ModelParams g = zeros_like(p);
  const int nh = p.nh;

  std::vector<Vec64> dh_f(n, Vec64(nh, 0.0));
  std::vector<Vec64> dh_b(n, Vec64(nh, 0.0));
  Mat64 d_z(n, p.n1, 0.0);

  Vec64 a(2 * nh);
  for (int t = 0; t < n; ++t) {
    const Vec64 d_o = row_vec(d_emissions, t);
    const Vec64 r = row_vec(tr.proj_r, t);
    add_outer(g.W3, d_o, r);
    const Vec64 d_q = tanh_back(matvec_t(p.W3, d_o), r);
    const Vec64& hf = tr.fwd.steps[t].h;
    const Vec64& hb = tr.bwd.steps[t].h;
    std::copy(hf.begin(), hf.end(), a.begin());
    std::copy(hb.begin(), hb.end(), a.begin() + nh);
    add_outer(g.W2, d_q, a);
    const Vec64 d_a = matvec_t(p.W2, d_q);
    for (int j = 0; j < nh; ++j) {
      dh_f[t][j] += d_a[j];
      dh_b[t][j] += d_a[nh + j];
    }
  }

  backward_direction(p, tr, true, dh_f, d_z, g);
  backward_direction(p, tr, false, dh_b, d_z, g);

  const int n0 = p.n0();
  std::vector<Vec64> d_x(n, Vec64(n0, 0.0));
  for (int t = 0; t < n; ++t) {
    const Vec64 d_p = tanh_back(row_vec(d_z, t), row_vec(tr.z, t));
    add_outer(g.W1, d_p, row_vec(tr.feats, t));
    const Vec64 d_feat = matvec_t(p.W1, d_p);
    if (p.kind == ModelKind::kFeatureConcat) {
      for (int c = 0; c < n0; ++c) d_x[t][c] += d_feat[c];
      const std::vector<int> nbrs = previous_neighbors(tr.sent.adj, t);
      if (!nbrs.empty()) {
        const double inv = 1.0 / static_cast<double>(nbrs.size());
        for (int i : nbrs)
          for (int c = 0; c < n0; ++c) d_x[i][c] += inv * d_feat[n0 + c];
      }
    } else {
      for (int c = 0; c < n0; ++c) d_x[t][c] += d_feat[c];
    }
  }

  for (int t = 0; t < n; ++t) {
    double* wrow = g.word_emb.row(tr.sent.word_ids[t]);
    for (int c = 0; c < p.n0_word; ++c) wrow[c] += d_x[t][c];
    double* frow = g.flag_emb.row(tr.sent.pred_flag[t] ? 1 : 0);
    for (int c = 0; c < p.n0_flag; ++c) frow[c] += d_x[t][p.n0_word + c];
  }
  return g;
}

}  // namespace salstm
