// Times corpus decoding with the serial reference path against the
// OpenMP fan-out used by eval and the per-epoch dev scoring.

#include <chrono>
#include <functional>
#include <iostream>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>

#include "salstm/checkpoint.hpp"
#include "salstm/rng.hpp"
#include "salstm/synth.hpp"
#include "salstm/training.hpp"

using namespace salstm;

namespace {

double time_ms(const std::function<void()>& fn, int reps) {
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) fn();
  const auto stop = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(stop - start).count() / reps;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"decode benchmark: serial reference vs OpenMP"};
  int sentences = 2000;
  int reps = 3;
  uint64_t seed = 7;
  int nh = 32;
  app.add_option("--sentences", sentences, "corpus size");
  app.add_option("--reps", reps, "repetitions per measurement");
  app.add_option("--seed", seed, "rng seed");
  app.add_option("--nh", nh, "hidden dim");

  CLI11_PARSE(app, argc, argv);

  try {
    SynthSpec spec;
    std::istringstream corpus_text(synth_generate(seed, sentences, spec));
    const std::vector<Sentence> corpus = parse_corpus(corpus_text);

    TrainConfig cfg;
    cfg.model = ModelKind::kSaTyped;
    cfg.n0_word = 16;
    cfg.n0_flag = 4;
    cfg.n1 = 2 * nh;
    cfg.nh = nh;
    cfg.n3 = nh;
    cfg.seed = seed;

    Checkpoint ckpt;
    ckpt.config = cfg;
    ckpt.vocab = build_vocab(corpus);
    ckpt.rels = build_rel_index(corpus);
    ckpt.tags = TagSet::from_roles(collect_roles(corpus));
    Rng rng(seed);
    ckpt.params = ModelParams::init(cfg.model, cfg.n0_word, cfg.n0_flag, cfg.n1, cfg.nh, cfg.n3,
                                    ckpt.tags.n4(), ckpt.rels.size(), ckpt.vocab.size(), rng);

    // warm-up and cross-check
    const EvalResult serial_res = evaluate_serial(ckpt, corpus);
    const EvalResult parallel_res = evaluate(ckpt, corpus);
    if (serial_res.matched != parallel_res.matched || serial_res.predicted != parallel_res.predicted ||
        serial_res.gold != parallel_res.gold) {
      std::cerr << "error: parallel decode disagrees with the serial reference\n";
      return 1;
    }

    const double serial_ms = time_ms([&] { evaluate_serial(ckpt, corpus); }, reps);
    std::cout << "sentences=" << sentences << " nh=" << nh << '\n';
    std::cout << "serial    " << serial_ms << " ms\n";
#ifdef _OPENMP
    for (int threads : {1, 2, omp_get_max_threads()}) {
      const double par_ms = time_ms([&] { evaluate(ckpt, corpus, threads); }, reps);
      std::cout << "openmp x" << threads << " " << par_ms << " ms  (speedup "
                << serial_ms / par_ms << ")\n";
    }
#else
    std::cout << "built without OpenMP\n";
#endif
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
