#include "salstm/synth.hpp"

#include <algorithm>
#include <sstream>
#include <vector>

#include "salstm/numkit.hpp"
#include "salstm/rng.hpp"

namespace salstm {

namespace {

struct DraftToken {
  std::string form;
  int head = -1;  // 0-based parent, -1 = root
  std::string rel;
  std::string role = "O";
};

// Random projective tree over [lo, hi]: pick a head, carve each side into
// consecutive chunks whose sub-heads attach to it.
void build_span(int lo, int hi, int parent, std::vector<int>& head, Rng& rng);

void carve(int lo, int hi, int parent, std::vector<int>& head, Rng& rng) {
  int a = lo;
  while (a <= hi) {
    const int e = rng.range(a, hi);
    build_span(a, e, parent, head, rng);
    a = e + 1;
  }
}

void build_span(int lo, int hi, int parent, std::vector<int>& head, Rng& rng) {
  if (lo > hi) return;
  const int h = rng.range(lo, hi);
  head[h] = parent;
  carve(lo, h - 1, h, head, rng);
  carve(h + 1, hi, h, head, rng);
}

struct ArgPlan {
  int head_tok;
  int cue_tok;
  int role;
  int span_lo, span_hi;
};

std::vector<int> undirected_neighbors(const std::vector<int>& head, int t) {
  std::vector<int> out;
  if (head[t] >= 0) out.push_back(head[t]);
  for (int i = 0; i < static_cast<int>(head.size()); ++i)
    if (head[i] == t) out.push_back(i);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> heads_of(const std::vector<DraftToken>& toks) {
  std::vector<int> out(toks.size());
  for (size_t i = 0; i < toks.size(); ++i) out[i] = toks[i].head;
  return out;
}

bool try_plan_sentence(int len, int root, const std::vector<int>& head, const SynthSpec& spec,
                       Rng& rng, std::vector<ArgPlan>& plans) {
  plans.clear();
  std::vector<char> reserved(len, 0);  // span cells, cues, root
  reserved[root] = 1;
  const int want = spec.max_args >= 2 && rng.chance(0.5) ? 2 : 1;

  std::vector<int> order(len);
  for (int i = 0; i < len; ++i) order[i] = i;
  rng.shuffle(order);

  auto span_blocked = [&](int lo, int hi) {
    for (int p = std::max(0, lo - 1); p <= std::min(len - 1, hi + 1); ++p)
      if (reserved[p]) return true;
    return false;
  };

  for (int cand : order) {
    if (static_cast<int>(plans.size()) == want) break;
    if (cand == root || span_blocked(cand, cand)) continue;

    std::vector<int> cues;
    for (int nb : undirected_neighbors(head, cand))
      if (nb != root && !reserved[nb] && nb != cand - 1 && nb != cand + 1) cues.push_back(nb);
    if (cues.empty()) {
      // fall back to a linearly adjacent neighbor when nothing better exists
      for (int nb : undirected_neighbors(head, cand))
        if (nb != root && !reserved[nb]) cues.push_back(nb);
    }
    if (cues.empty()) continue;
    const int cue = cues[rng.below(cues.size())];

    ArgPlan plan;
    plan.head_tok = cand;
    plan.cue_tok = cue;
    plan.role = static_cast<int>(rng.below(static_cast<uint64_t>(spec.n_roles)));
    plan.span_lo = plan.span_hi = cand;

    if (rng.chance(spec.span_ext_prob)) {
      // extend over an adjacent leaf child, keeping the cue outside the span
      std::vector<int> exts;
      for (int e : {cand - 1, cand + 1}) {
        if (e < 0 || e >= len || e == cue || reserved[e] || head[e] != cand) continue;
        bool leaf = true;
        for (int i = 0; i < len; ++i)
          if (head[i] == e) leaf = false;
        if (leaf && !span_blocked(std::min(e, cand), std::max(e, cand))) exts.push_back(e);
      }
      if (!exts.empty()) {
        const int e = exts[rng.below(exts.size())];
        plan.span_lo = std::min(cand, e);
        plan.span_hi = std::max(cand, e);
      }
    }

    for (int p = plan.span_lo; p <= plan.span_hi; ++p) reserved[p] = 1;
    reserved[cue] = 1;
    plans.push_back(plan);
  }
  return !plans.empty();
}

}  // namespace

std::string synth_generate(uint64_t seed, int n_sentences, const SynthSpec& spec) {
  if (spec.n_roles < 1) fatal("synth: need at least one role");
  if (1 + spec.n_distractor_rels < 3) fatal("synth: need at least 3 relation types");
  if (spec.n_fillers < 2 || spec.n_predicates < 2)
    fatal("synth: vocabulary sizes must be at least 2");
  if (spec.min_len < 5 || spec.max_len > 12 || spec.min_len > spec.max_len)
    fatal("synth: sentence length must stay within [5, 12]");
  if (n_sentences < 1) fatal("synth: need a positive sentence count");

  Rng rng(seed);
  std::vector<std::string> distractors;
  for (int i = 0; i < spec.n_distractor_rels; ++i)
    distractors.push_back("rel" + std::to_string(i));

  std::ostringstream out;
  for (int si = 0; si < n_sentences; ++si) {
    std::vector<DraftToken> toks;
    int root = -1;
    std::vector<ArgPlan> plans;
    for (int attempt = 0;; ++attempt) {
      if (attempt >= 100) fatal("synth: could not place arguments; spec too constrained");
      const int len = rng.range(spec.min_len, spec.max_len);
      std::vector<int> head(len, -1);
      build_span(0, len - 1, -1, head, rng);
      root = -1;
      for (int i = 0; i < len; ++i)
        if (head[i] == -1) root = i;
      if (!try_plan_sentence(len, root, head, spec, rng, plans)) continue;

      const int len_i = len;
      toks.assign(len_i, {});
      for (int i = 0; i < len_i; ++i) toks[i].head = head[i];

      // relation labels: cycle a shuffled distractor list, then pin the
      // signal edges
      std::vector<std::string> cycle = distractors;
      rng.shuffle(cycle);
      int next = 0;
      for (int i = 0; i < len_i; ++i) {
        if (head[i] < 0) {
          toks[i].rel = "root";
          continue;
        }
        toks[i].rel = cycle[next % cycle.size()];
        ++next;
      }
      for (const ArgPlan& p : plans) {
        // the signal edge is head_tok <-> cue_tok; pin whichever endpoint
        // carries it in the head-annotated encoding
        if (toks[p.cue_tok].head == p.head_tok)
          toks[p.cue_tok].rel = spec.signal_rel;
        else
          toks[p.head_tok].rel = spec.signal_rel;
      }
      break;
    }

    const int len = static_cast<int>(toks.size());
    std::vector<char> is_cue(len, 0), is_arg_head(len, 0);
    for (const ArgPlan& p : plans) {
      is_cue[p.cue_tok] = 1;
      is_arg_head[p.head_tok] = 1;
      for (int q = p.span_lo; q <= p.span_hi; ++q) toks[q].role = spec.role_name(p.role);
      toks[p.cue_tok].form = spec.cue_form(p.role);
    }
    toks[root].form = "v" + std::to_string(rng.below(static_cast<uint64_t>(spec.n_predicates)));
    for (int i = 0; i < len; ++i)
      if (toks[i].form.empty())
        toks[i].form = "w" + std::to_string(rng.below(static_cast<uint64_t>(spec.n_fillers)));

    // decoy cue forms confuse linear context only: keep them off argument
    // heads and off their tree neighborhoods, so the dependency signal
    // stays clean
    std::vector<char> near_signal(len, 0);
    for (const ArgPlan& p : plans) {
      near_signal[p.head_tok] = 1;
      for (int nb : undirected_neighbors(heads_of(toks), p.head_tok)) near_signal[nb] = 1;
    }
    int decoys = spec.max_decoys > 0 ? rng.range(1, spec.max_decoys) : 0;
    std::vector<int> decoy_slots;
    for (int i = 0; i < len; ++i)
      if (i != root && !is_cue[i] && !near_signal[i]) decoy_slots.push_back(i);
    rng.shuffle(decoy_slots);
    for (int d = 0; d < decoys && d < static_cast<int>(decoy_slots.size()); ++d) {
      const int slot = decoy_slots[d];
      toks[slot].form = spec.cue_form(static_cast<int>(rng.below(static_cast<uint64_t>(spec.n_roles))));
    }

    for (int i = 0; i < len; ++i) {
      out << (i + 1) << '\t' << toks[i].form << '\t' << (i == root ? 1 : 0) << '\t'
          << (toks[i].head + 1) << '\t' << toks[i].rel << '\t' << toks[i].role << '\n';
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace salstm
