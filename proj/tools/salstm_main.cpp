#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "salstm/checkpoint.hpp"
#include "salstm/corpus.hpp"
#include "salstm/synth.hpp"
#include "salstm/training.hpp"

namespace {

using namespace salstm;

struct TrainArgs {
  std::string config_path, train_path, dev_path, out_path;
  std::string model, embeddings;
  uint64_t seed = 0;
  int epochs = 0, n0_word = 0, n0_flag = 0, n1 = 0, nh = 0, n3 = 0, patience = -1;
  double learning_rate = 0.0;
  bool clip = false;
};

int run_train(const TrainArgs& a, const CLI::App* cmd) {
  TrainConfig cfg;
  if (!a.config_path.empty()) cfg = parse_config_file(a.config_path);
  // command-line flags override config file values
  if (cmd->count("--model")) cfg.model = model_kind_from_string(a.model);
  if (cmd->count("--seed")) cfg.seed = a.seed;
  if (cmd->count("--epochs")) cfg.epochs = a.epochs;
  if (cmd->count("--learning-rate")) cfg.learning_rate = a.learning_rate;
  if (cmd->count("--n0-word")) cfg.n0_word = a.n0_word;
  if (cmd->count("--n0-flag")) cfg.n0_flag = a.n0_flag;
  if (cmd->count("--n1")) cfg.n1 = a.n1;
  if (cmd->count("--nh")) cfg.nh = a.nh;
  if (cmd->count("--n3")) cfg.n3 = a.n3;
  if (cmd->count("--embeddings")) cfg.embeddings_path = a.embeddings;
  if (cmd->count("--patience")) cfg.patience = a.patience;
  if (cmd->count("--clip-gradients")) cfg.clip_gradients = a.clip;

  const std::vector<Sentence> train_corpus = load_corpus(a.train_path);
  std::vector<Sentence> dev_corpus;
  if (!a.dev_path.empty()) dev_corpus = load_corpus(a.dev_path);

  const TrainResult res = train(cfg, train_corpus, dev_corpus, &std::cout);
  save_checkpoint(res.best, a.out_path);
  std::cout << "saved " << a.out_path << '\n';
  return 0;
}

int run_eval(const std::string& model_path, const std::string& data_path, int threads) {
  const Checkpoint ckpt = load_checkpoint(model_path);
  const std::vector<Sentence> corpus = load_corpus(data_path);
  const EvalResult r = evaluate(ckpt, corpus, threads);
  if (r.unk_tokens > 0)
    std::cerr << "warning: " << r.unk_tokens << " out-of-vocabulary tokens mapped to <unk>\n";
  std::cout << "  spans     gold " << r.gold << ", predicted " << r.predicted << ", matched "
            << r.matched << '\n';
  std::cout << "  precision " << r.precision << '\n';
  std::cout << "  recall    " << r.recall << '\n';
  std::cout << "  F1        " << r.f1 << '\n';
  std::cout << "precision=" << r.precision << " recall=" << r.recall << " f1=" << r.f1
            << " unk_tokens=" << r.unk_tokens << '\n';
  return 0;
}

int run_tag(const std::string& model_path, const std::string& input_path,
            const std::string& output_path, bool unconstrained) {
  const Checkpoint ckpt = load_checkpoint(model_path);
  std::vector<Sentence> corpus = load_corpus(input_path);
  const auto roles = predict_roles(ckpt, corpus, !unconstrained);
  for (size_t i = 0; i < corpus.size(); ++i)
    for (size_t t = 0; t < corpus[i].tokens.size(); ++t)
      corpus[i].tokens[t].role = roles[i][t];
  std::ofstream out(output_path);
  if (!out) fatal("cannot write output file: " + output_path);
  serialize_corpus(corpus, out);
  return 0;
}

int run_synth(uint64_t seed, const std::string& out_path, int sentences, const SynthSpec& spec) {
  const std::string text = synth_generate(seed, sentences, spec);
  std::ofstream out(out_path);
  if (!out) fatal("cannot write output file: " + out_path);
  out << text;
  return 0;
}

int run_gradcheck(uint64_t seed) {
  const GradcheckReport report = gradcheck(seed);
  for (const GradcheckModelReport& m : report.models) {
    std::cout << to_string(m.kind) << '\n';
    for (const TensorCheck& t : m.tensors)
      std::cout << "  " << t.tensor << "  max_rel_err=" << t.max_rel_err << '\n';
    std::cout << "  worst=" << m.max_rel_err << (m.max_rel_err < report.threshold ? "  ok" : "  FAIL")
              << '\n';
  }
  if (!report.ok()) {
    std::cerr << "error: gradient check exceeded the " << report.threshold << " threshold\n";
    return 1;
  }
  std::cout << "gradcheck ok (threshold " << report.threshold << ")\n";
  return 0;
}

int run_export(const std::string& model_path, const std::string& out_path) {
  const Checkpoint ckpt = load_checkpoint(model_path);
  std::ostringstream csv;
  export_relweights(ckpt, csv);
  std::ofstream out(out_path);
  if (!out) fatal("cannot write output file: " + out_path);
  out << csv.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Syntax-aware LSTM sequence labeler"};
  app.require_subcommand(1);

  TrainArgs ta;
  CLI::App* train_cmd = app.add_subcommand("train", "train a model");
  train_cmd->add_option("--config", ta.config_path, "flat key = value config file");
  train_cmd->add_option("--train", ta.train_path, "training corpus")->required();
  train_cmd->add_option("--dev", ta.dev_path, "development corpus");
  train_cmd->add_option("--out", ta.out_path, "checkpoint output path")->required();
  train_cmd->add_option("--model", ta.model, "vanilla|feature_concat|sa_binary|sa_typed");
  train_cmd->add_option("--seed", ta.seed, "rng seed");
  train_cmd->add_option("--epochs", ta.epochs, "training epochs");
  train_cmd->add_option("--learning-rate", ta.learning_rate, "sgd step size");
  train_cmd->add_option("--n0-word", ta.n0_word, "word embedding dim");
  train_cmd->add_option("--n0-flag", ta.n0_flag, "predicate flag embedding dim");
  train_cmd->add_option("--n1", ta.n1, "feature embedding dim");
  train_cmd->add_option("--nh", ta.nh, "hidden dim");
  train_cmd->add_option("--n3", ta.n3, "projection dim");
  train_cmd->add_option("--embeddings", ta.embeddings, "pre-trained embedding file");
  train_cmd->add_option("--patience", ta.patience, "early-stop patience (0 = off)");
  train_cmd->add_flag("--clip-gradients", ta.clip, "clip gradient norm at 5.0");

  std::string eval_model, eval_data;
  int eval_threads = 0;
  CLI::App* eval_cmd = app.add_subcommand("eval", "score a corpus");
  eval_cmd->add_option("--model", eval_model, "checkpoint")->required();
  eval_cmd->add_option("--data", eval_data, "gold corpus")->required();
  eval_cmd->add_option("--threads", eval_threads, "decoder threads (0 = auto)");

  std::string tag_model, tag_input, tag_output;
  bool tag_unconstrained = false;
  CLI::App* tag_cmd = app.add_subcommand("tag", "label a corpus");
  tag_cmd->add_option("--model", tag_model, "checkpoint")->required();
  tag_cmd->add_option("--input", tag_input, "input corpus")->required();
  tag_cmd->add_option("--output", tag_output, "output corpus")->required();
  tag_cmd->add_flag("--unconstrained", tag_unconstrained,
                    "diagnostic per-token argmax (mask disabled)");

  uint64_t synth_seed = 1;
  std::string synth_out;
  int synth_sentences = 100;
  SynthSpec spec;
  CLI::App* synth_cmd = app.add_subcommand("synth", "generate a synthetic corpus");
  synth_cmd->add_option("--seed", synth_seed, "rng seed")->required();
  synth_cmd->add_option("--out", synth_out, "output path")->required();
  synth_cmd->add_option("--sentences", synth_sentences, "sentence count")->required();
  synth_cmd->add_option("--signal-rel", spec.signal_rel, "signal relation type");
  synth_cmd->add_option("--roles", spec.n_roles, "number of roles");
  synth_cmd->add_option("--rel-types", spec.n_distractor_rels, "distractor relation types");
  synth_cmd->add_option("--min-len", spec.min_len, "min sentence length");
  synth_cmd->add_option("--max-len", spec.max_len, "max sentence length");
  synth_cmd->add_option("--fillers", spec.n_fillers, "filler vocabulary size");
  synth_cmd->add_option("--predicates", spec.n_predicates, "predicate vocabulary size");
  synth_cmd->add_option("--max-args", spec.max_args, "max arguments per sentence");
  synth_cmd->add_option("--span-ext-prob", spec.span_ext_prob, "two-token span probability");
  synth_cmd->add_option("--decoys", spec.max_decoys, "max decoy cue forms per sentence");

  uint64_t gc_seed = 1;
  CLI::App* gc_cmd = app.add_subcommand("gradcheck", "finite-difference gradient check");
  gc_cmd->add_option("--seed", gc_seed, "rng seed");

  std::string ex_model, ex_out;
  CLI::App* ex_cmd = app.add_subcommand("export-relweights", "dump trained relation weights");
  ex_cmd->add_option("--model", ex_model, "sa_typed checkpoint")->required();
  ex_cmd->add_option("--out", ex_out, "CSV output path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (train_cmd->parsed()) return run_train(ta, train_cmd);
    if (eval_cmd->parsed()) return run_eval(eval_model, eval_data, eval_threads);
    if (tag_cmd->parsed()) return run_tag(tag_model, tag_input, tag_output, tag_unconstrained);
    if (synth_cmd->parsed()) return run_synth(synth_seed, synth_out, synth_sentences, spec);
    if (gc_cmd->parsed()) return run_gradcheck(gc_seed);
    if (ex_cmd->parsed()) return run_export(ex_model, ex_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
