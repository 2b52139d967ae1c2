#include "salstm/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>

#include "salstm/crf.hpp"
#include "salstm/rng.hpp"

namespace salstm {

namespace {

Checkpoint make_checkpoint(const TrainConfig& cfg, const Vocab& vocab, const RelTypeIndex& rels,
                           const TagSet& tags, const ModelParams& params) {
  Checkpoint ck;
  ck.config = cfg;
  ck.vocab = vocab;
  ck.rels = rels;
  ck.tags = tags;
  ck.params = params;
  return ck;
}

double global_grad_norm(ModelParams& grads) {
  double sq = 0.0;
  for (const TensorRef& t : grads.tensors())
    for (double v : *t.data) sq += v * v;
  return std::sqrt(sq);
}

void scale_grads(ModelParams& grads, double factor) {
  for (const TensorRef& t : grads.tensors())
    for (double& v : *t.data) v *= factor;
}

}  // namespace

TrainResult train(const TrainConfig& cfg, const std::vector<Sentence>& train_corpus,
                  const std::vector<Sentence>& dev_corpus, std::ostream* log) {
  if (train_corpus.empty()) fatal("train: empty training corpus");

  const Vocab vocab = build_vocab(train_corpus);
  const RelTypeIndex rels = build_rel_index(train_corpus);
  const TagSet tags = TagSet::from_roles(collect_roles(train_corpus));

  Rng rng(cfg.seed);
  ModelParams params = ModelParams::init(cfg.model, cfg.n0_word, cfg.n0_flag, cfg.n1, cfg.nh,
                                         cfg.n3, tags.n4(), rels.size(), vocab.size(), rng);
  if (!cfg.embeddings_path.empty()) {
    std::ifstream in(cfg.embeddings_path);
    if (!in) fatal("cannot open embedding file: " + cfg.embeddings_path);
    const EmbeddingLoad res = load_embeddings(in, vocab, params.word_emb);
    if (log != nullptr)
      *log << "embeddings: matched " << res.matched << " of " << vocab.size() - 1
           << " vocabulary words (coverage " << res.coverage << ")\n";
  }

  std::vector<EncodedSentence> enc;
  enc.reserve(train_corpus.size());
  for (const Sentence& s : train_corpus) enc.push_back(encode_tokens(s, vocab, rels, &tags));

  const int n = static_cast<int>(enc.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  double best_f1 = -1.0;
  int since_improve = 0;
  bool have_best = false;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double total_neg = 0.0;
    for (int idx : order) {
      const EncodedSentence& s = enc[idx];
      const ForwardResult fr = encode_sentence(s, params);
      Mat64 d_em;
      const double ll = log_likelihood(fr.emissions, s.gold_tags, tags, &d_em);
      if (!std::isfinite(ll))
        fatal("training produced a non-finite log likelihood at epoch " +
              std::to_string(epoch) + "; lower the learning rate");
      total_neg += -ll;
      ModelParams grads = backward(params, fr.trace, d_em);
      if (cfg.clip_gradients) {
        const double norm = global_grad_norm(grads);
        if (norm > 5.0) scale_grads(grads, 5.0 / norm);
      }
      auto gt = grads.tensors();
      auto pt = params.tensors();
      for (size_t k = 0; k < gt.size(); ++k) axpy(cfg.learning_rate, *gt[k].data, *pt[k].data);
    }

    EpochLog el;
    el.epoch = epoch;
    el.mean_neg_logp = total_neg / n;
    if (!dev_corpus.empty()) {
      const Checkpoint snapshot = make_checkpoint(cfg, vocab, rels, tags, params);
      el.dev_f1 = evaluate(snapshot, dev_corpus).f1;
      if (el.dev_f1 > best_f1) {
        best_f1 = el.dev_f1;
        since_improve = 0;
      } else {
        ++since_improve;
      }
      if (el.dev_f1 >= best_f1) {  // later epochs win ties
        result.best = snapshot;
        have_best = true;
      }
    }
    result.log.push_back(el);
    if (log != nullptr) {
      *log << "epoch=" << epoch << " mean_neg_logp=" << el.mean_neg_logp;
      if (el.dev_f1 >= 0.0) *log << " dev_f1=" << el.dev_f1 << " best_dev_f1=" << best_f1;
      *log << '\n';
    }
    if (!dev_corpus.empty() && cfg.patience > 0 && since_improve >= cfg.patience) {
      if (log != nullptr)
        *log << "early stop after " << since_improve << " epochs without improvement\n";
      break;
    }
  }
  if (!have_best) result.best = make_checkpoint(cfg, vocab, rels, tags, params);
  return result;
}

TinyInstance make_tiny_instance(ModelKind kind, Rng& rng, int max_tokens, int nh) {
  TinyInstance inst;
  const int vocab_size = 9;  // unk + 8 forms
  const int n_rels = 4;      // unk + 3 types
  inst.tags = TagSet::from_roles({"A0", "A1"});
  inst.params = ModelParams::init(kind, /*n0_word=*/4, /*n0_flag=*/2, /*n1=*/5, nh,
                                  /*n3=*/4, inst.tags.n4(), n_rels, vocab_size, rng);

  const int len = rng.range(3, max_tokens);
  inst.sent.word_ids.resize(len);
  for (int t = 0; t < len; ++t) inst.sent.word_ids[t] = static_cast<int>(rng.below(vocab_size));
  inst.sent.pred_flag.assign(len, 0);
  inst.sent.pred_flag[rng.below(static_cast<uint64_t>(len))] = 1;

  inst.sent.adj.neighbors.resize(len);
  for (int t = 0; t < len; ++t) {
    if (rng.chance(0.3)) continue;  // root attachment, no edge
    int other = rng.range(0, len - 2);
    if (other >= t) ++other;
    const int rel = static_cast<int>(rng.below(n_rels));
    inst.sent.adj.neighbors[t].emplace_back(other, rel);
    inst.sent.adj.neighbors[other].emplace_back(t, rel);
  }
  for (auto& list : inst.sent.adj.neighbors) std::sort(list.begin(), list.end());

  std::vector<std::string> roles(len, "O");
  int t = 0;
  while (t < len) {
    if (rng.chance(0.5)) {
      const std::string role = rng.chance(0.5) ? "A0" : "A1";
      const int run = std::min(len - t, rng.range(1, 3));
      for (int j = 0; j < run; ++j) roles[t + j] = role;
      t += run;
      if (t < len) {
        roles[t] = "O";  // keep adjacent spans distinct
        ++t;
      }
    } else {
      ++t;
    }
  }
  inst.sent.gold_tags = iobes_encode(roles, inst.tags);
  return inst;
}

namespace {

double instance_log_likelihood(const TinyInstance& inst, const ModelParams& params) {
  const ForwardResult fr = encode_sentence(inst.sent, params);
  return log_likelihood(fr.emissions, inst.sent.gold_tags, inst.tags);
}

}  // namespace

bool GradcheckReport::ok() const {
  for (const GradcheckModelReport& m : models)
    if (m.max_rel_err >= threshold) return false;
  return !models.empty();
}

GradcheckReport gradcheck(uint64_t seed) {
  constexpr double kEps = 1e-5;
  GradcheckReport report;
  const ModelKind kinds[] = {ModelKind::kVanilla, ModelKind::kFeatureConcat,
                             ModelKind::kSaBinary, ModelKind::kSaTyped};
  for (size_t ki = 0; ki < 4; ++ki) {
    Rng rng(seed * 4 + ki + 1);
    const TinyInstance inst = make_tiny_instance(kinds[ki], rng);

    const ForwardResult fr = encode_sentence(inst.sent, inst.params);
    Mat64 d_em;
    log_likelihood(fr.emissions, inst.sent.gold_tags, inst.tags, &d_em);
    ModelParams analytic = backward(inst.params, fr.trace, d_em);

    GradcheckModelReport mr;
    mr.kind = kinds[ki];
    const auto grad_refs = analytic.tensors();
    const auto param_refs = const_cast<ModelParams&>(inst.params).tensors();
    for (size_t ti = 0; ti < param_refs.size(); ++ti) {
      const Vec64& g = *grad_refs[ti].data;
      const int count = static_cast<int>(g.size());
      Vec64 rel_err(count, 0.0);
#ifdef _OPENMP
#pragma omp parallel
#endif
      {
        ModelParams local = inst.params;
        Vec64& coords = *local.tensors()[ti].data;
#ifdef _OPENMP
#pragma omp for schedule(static)
#endif
        for (int j = 0; j < count; ++j) {
          const double saved = coords[j];
          coords[j] = saved + kEps;
          const double up = instance_log_likelihood(inst, local);
          coords[j] = saved - kEps;
          const double down = instance_log_likelihood(inst, local);
          coords[j] = saved;
          const double numeric = (up - down) / (2.0 * kEps);
          // the denominator floor sits above the cancellation noise of the
          // central difference (|loss| * eps_machine / kEps ~ 1e-10)
          rel_err[j] = std::abs(g[j] - numeric) /
                       std::max(1e-5, std::abs(g[j]) + std::abs(numeric));
        }
      }
      TensorCheck tc;
      tc.tensor = param_refs[ti].name;
      tc.max_rel_err = count > 0 ? *std::max_element(rel_err.begin(), rel_err.end()) : 0.0;
      mr.tensors.push_back(tc);
      mr.max_rel_err = std::max(mr.max_rel_err, tc.max_rel_err);
    }
    report.models.push_back(std::move(mr));
  }
  return report;
}

std::vector<std::pair<std::string, double>> relweight_rows(const Checkpoint& ckpt) {
  if (ckpt.params.kind != ModelKind::kSaTyped)
    fatal("relation weights exist only in sa_typed checkpoints; this model is " +
          to_string(ckpt.params.kind));
  std::vector<std::pair<std::string, double>> rows;
  for (int i = 0; i < ckpt.rels.size(); ++i) rows.emplace_back(ckpt.rels.form(i), ckpt.params.alpha[i]);
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return rows;
}

void export_relweights(const Checkpoint& ckpt, std::ostream& out) {
  out << "relation,alpha\n";
  for (const auto& [label, weight] : relweight_rows(ckpt))
    out << label << ',' << format_double(weight) << '\n';
}

}  // namespace salstm
