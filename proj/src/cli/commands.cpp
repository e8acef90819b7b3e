// Copyright 2026 The DRLM Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>

#include "drlm/autodiff/gradcheck.hpp"
#include "drlm/checkpoint.hpp"
#include "drlm/cli.hpp"
#include "drlm/inference.hpp"
#include "drlm/metrics.hpp"

namespace drlm::cli {
namespace {

// Copies everything written to it into two streams.
class TeeBuf : public std::streambuf {
 public:
  TeeBuf(std::streambuf* a, std::streambuf* b) : a_(a), b_(b) {}

 protected:
  int overflow(int c) override {
    if (c == EOF) return !EOF;
    const int ra = a_->sputc(static_cast<char>(c));
    const int rb = b_->sputc(static_cast<char>(c));
    return ra == EOF || rb == EOF ? EOF : c;
  }
  int sync() override { return a_->pubsync() == 0 && b_->pubsync() == 0 ? 0 : -1; }

 private:
  std::streambuf* a_;
  std::streambuf* b_;
};

void require_path(const std::filesystem::path& p, const char* key) {
  if (p.empty()) throw UserError(std::string("missing required config key ") + key);
  if (!std::filesystem::exists(p)) throw UserError(std::string(key) + ": no such file " + p.string());
}

std::string fmt(double x) {
  std::ostringstream ss;
  ss << std::setprecision(10) << x;
  return ss.str();
}

// Relation variants read their labels from the label table; the others see a
// single relation and ignore labels.
LabelTable labels_for(const RunConfig& config) {
  if (!has_relations(config.variant)) return LabelTable({"none"});
  require_path(config.labels_path, "data.labels");
  return LabelTable::load(config.labels_path);
}

std::vector<Document> load_documents(const std::filesystem::path& path, const Vocabulary& vocab,
                                     const LabelTable& labels, bool keep_labels) {
  std::vector<RawDocument> raw = read_corpus(path);
  if (!keep_labels) {
    for (auto& d : raw) d = strip_labels(d);
  }
  try {
    return encode(raw, vocab, labels);
  } catch (const std::invalid_argument& e) {
    throw UserError(path.string() + ": " + e.what());
  }
}

// `labels` is null when relations are marginalized and the label table is not needed.
void check_dims(const DrlmParams& params, const Vocabulary& vocab, const LabelTable* labels,
                const RunConfig& config) {
  if (params.dims.V != vocab.size()) {
    throw UserError("checkpoint has V=" + std::to_string(params.dims.V) + " but vocabulary " +
                    config.vocab_file().string() + " has " + std::to_string(vocab.size()) + " entries");
  }
  if (labels != nullptr && has_relations(params.variant) && params.dims.Z != labels->size()) {
    throw UserError("checkpoint has Z=" + std::to_string(params.dims.Z) + " but label table " +
                    config.labels_path.string() + " has " + std::to_string(labels->size()) + " labels");
  }
}

DrlmParams load_model(const RunConfig& config) {
  require_path(config.checkpoint_path, "checkpoint");
  DrlmParams params = load_checkpoint(config.checkpoint_path);
  if (params.variant != config.variant) {
    throw UserError("checkpoint variant is " + std::string(variant_name(params.variant)) +
                    " but the config asks for " + std::string(variant_name(config.variant)));
  }
  return params;
}

struct TrainOutcome {
  FitResult result;
  std::size_t vocab_size = 0;
};

TrainOutcome train_model(const RunConfig& config, std::ostream& out) {
  require_path(config.train_path, "data.train");
  require_path(config.dev_path, "data.dev");
  if (!has_relations(config.variant) && config.train.objective == Objective::kConditional) {
    throw UserError("the conditional objective needs a relation variant (drlm or drlm-model2)");
  }
  const LabelTable labels = labels_for(config);
  const bool keep = has_relations(config.variant);
  const Vocabulary vocab = Vocabulary::build(read_corpus(config.train_path), config.vocab_cap);
  const auto train = load_documents(config.train_path, vocab, labels, keep);
  const auto dev = load_documents(config.dev_path, vocab, labels, keep);

  ModelDims dims{vocab.size(), config.K, config.H, has_relations(config.variant) ? labels.size() : 1};
  DrlmParams params = init_params(dims, config.variant, config.seed);

  std::ofstream log(config.log_file(), std::ios::trunc);
  if (!log) throw UserError("cannot open log " + config.log_file().string());
  TeeBuf tee(out.rdbuf(), log.rdbuf());
  std::ostream both(&tee);
  FitResult result = fit(train, dev, std::move(params), config.train, &both);
  both.flush();

  vocab.save(config.vocab_file());
  save_checkpoint(config.checkpoint_path, result.params);
  return {std::move(result), vocab.size()};
}

bool better(double candidate, double incumbent, const std::string& metric) {
  return metric == "dev_ppl" ? candidate < incumbent : candidate > incumbent;
}

// Strips a trailing ".<index>" so per-relation tensors report as one group.
std::string group_of(const std::string& name) {
  const auto dot = name.rfind('.');
  if (dot == std::string::npos || dot + 1 == name.size()) return name;
  const bool numeric = std::all_of(name.begin() + static_cast<std::ptrdiff_t>(dot) + 1, name.end(),
                                   [](char c) { return c >= '0' && c <= '9'; });
  return numeric ? name.substr(0, dot) : name;
}

struct CorruptionGuard {
  explicit CorruptionGuard(std::optional<autodiff::Op> op) { autodiff::testing::corrupt_backward(op); }
  ~CorruptionGuard() { autodiff::testing::corrupt_backward(std::nullopt); }
  CorruptionGuard(const CorruptionGuard&) = delete;
  CorruptionGuard& operator=(const CorruptionGuard&) = delete;
};

}  // namespace

int cmd_train(const RunConfig& config, std::ostream& out) {
  const TrainOutcome outcome = train_model(config, out);
  const FitResult& r = outcome.result;
  const double best = r.history.at(static_cast<std::size_t>(r.best_epoch - 1)).dev_metric;
  out << "train variant=" << variant_name(config.variant)
      << " objective=" << objective_name(config.train.objective) << " V=" << outcome.vocab_size
      << " K=" << config.K << " H=" << config.H << " best_epoch=" << r.best_epoch << ' '
      << r.metric_name << '=' << fmt(best) << " checkpoint=" << config.checkpoint_path.string() << '\n';
  return kExitOk;
}

int cmd_eval_lm(const RunConfig& config, std::ostream& out) {
  require_path(config.test_path, "data.test");
  const DrlmParams params = load_model(config);
  const Vocabulary vocab = Vocabulary::load(config.vocab_file());
  const LabelTable labels({"none"});
  check_dims(params, vocab, nullptr, config);
  // Labels in the test file are ignored: relations are marginalized out.
  const auto docs = load_documents(config.test_path, vocab, labels, false);
  double total = 0.0;
  std::size_t tokens = 0;
  for (const auto& doc : docs) {
    check_document(doc, params.dims);
    total += marginal_log_likelihood(params, doc);
    tokens += doc.token_count();
  }
  out << "eval-lm variant=" << variant_name(params.variant) << " documents=" << docs.size()
      << " tokens=" << tokens << " total_nats=" << fmt(-total)
      << " perplexity=" << fmt(perplexity(total, tokens)) << '\n';
  return kExitOk;
}

int cmd_tag(const RunConfig& config, std::ostream& out) {
  require_path(config.test_path, "data.test");
  if (!has_relations(config.variant)) {
    throw UserError("tagging needs a relation variant (drlm or drlm-model2)");
  }
  const DrlmParams params = load_model(config);
  const Vocabulary vocab = Vocabulary::load(config.vocab_file());
  const LabelTable labels = labels_for(config);
  check_dims(params, vocab, &labels, config);

  const auto raw = read_corpus(config.test_path);
  std::vector<std::string> missing;
  for (std::size_t d = 0; d < raw.size(); ++d) {
    for (std::size_t t = 0; t < raw[d].relations.size(); ++t) {
      if (!raw[d].relations[t]) missing.push_back(std::to_string(d) + ":" + std::to_string(t));
    }
  }
  if (!missing.empty()) {
    std::string list;
    for (std::size_t i = 0; i < missing.size() && i < 20; ++i) list += (i ? " " : "") + missing[i];
    if (missing.size() > 20) list += " ...";
    throw UserError(std::to_string(missing.size()) + " slots lack gold labels (doc:slot): " + list);
  }
  std::vector<Document> docs;
  try {
    docs = encode(raw, vocab, labels);
  } catch (const std::invalid_argument& e) {
    throw UserError(config.test_path.string() + ": " + e.what());
  }

  std::vector<PredictionRecord> records;
  std::vector<int> gold, predicted;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    check_document(docs[d], params.dims);
    const std::vector<int> tags = tag_document(params, docs[d]);
    for (std::size_t t = 0; t < tags.size(); ++t) {
      const int g = docs[d].relations[t];
      if (!config.tag_include_dummy && g == kDummyLabel) continue;
      gold.push_back(g);
      predicted.push_back(tags[t]);
      records.push_back({d, t, labels.name(g), labels.name(tags[t])});
    }
  }
  {
    std::ofstream file(config.predictions_file(), std::ios::trunc);
    if (!file) throw UserError("cannot open " + config.predictions_file().string());
    write_predictions(file, records);
  }
  const auto counts = ConfusionCounts::from_labels(gold, predicted, labels.size());
  std::vector<int> classes;
  for (int z = config.tag_include_dummy ? 0 : 1; z < static_cast<int>(labels.size()); ++z) classes.push_back(z);
  out << "tag variant=" << variant_name(params.variant) << " scored=" << gold.size()
      << " accuracy=" << fmt(gold.empty() ? 0.0 : accuracy(gold, predicted))
      << " macro_f1=" << fmt(gold.empty() ? 0.0 : macro_f1(counts, classes))
      << " predictions=" << config.predictions_file().string() << '\n';

  if (!config.compare_path.empty()) {
    require_path(config.compare_path, "tag.compare");
    std::ifstream in(config.compare_path);
    const auto other = read_predictions(in);
    if (other.size() != records.size()) {
      throw UserError("tag.compare has " + std::to_string(other.size()) + " predictions, expected " +
                      std::to_string(records.size()));
    }
    std::vector<int> predicted_b;
    for (std::size_t i = 0; i < other.size(); ++i) {
      if (other[i].document != records[i].document || other[i].slot != records[i].slot ||
          other[i].gold != records[i].gold) {
        throw UserError("tag.compare line " + std::to_string(i + 1) + " does not pair with this run");
      }
      predicted_b.push_back(labels.id(other[i].predicted));
    }
    const PairedOutcome paired = paired_outcome(gold, predicted, predicted_b);
    out << "sign_test wins_this=" << paired.wins_a << " wins_other=" << paired.wins_b
        << " trials=" << paired.trials
        << " p_value=" << fmt(binomial_test(paired.wins_a, paired.wins_b, paired.trials)) << '\n';
  }
  return kExitOk;
}

int cmd_gradcheck(const RunConfig& config, std::ostream& out) {
  if (config.gc_V > 20 || config.gc_K > 8 || config.gc_H > 8 || config.gc_T > 3) {
    throw UserError("gradcheck needs tiny dimensions: V <= 20, K, H <= 8, T <= 3");
  }
  if (config.gc_V <= static_cast<std::size_t>(kReservedTokens) || config.gc_Z < 2 || config.gc_T < 1 ||
      config.gc_K == 0 || config.gc_H == 0) {
    throw UserError("gradcheck needs V > 4, Z >= 2, T >= 1 and positive K, H");
  }
  std::optional<autodiff::Op> corrupt;
  if (!config.gc_corrupt.empty() && config.gc_corrupt != "none") {
    corrupt = autodiff::op_from_name(config.gc_corrupt);
    if (!corrupt) throw UserError("gradcheck.corrupt: unknown op '" + config.gc_corrupt + "'");
  }
  CorruptionGuard guard(corrupt);

  std::mt19937_64 rng(config.seed);
  std::uniform_int_distribution<int> word(kReservedTokens, static_cast<int>(config.gc_V) - 1);
  std::uniform_int_distribution<int> rel(0, static_cast<int>(config.gc_Z) - 1);
  Document doc;
  for (std::size_t t = 0; t < config.gc_T; ++t) {
    doc.sentences.push_back({word(rng), word(rng), kEosId});
    doc.relations.push_back(rel(rng));
    doc.observed.push_back(true);
  }
  const ModelDims dims{config.gc_V, config.gc_K, config.gc_H, config.gc_Z};

  bool pass = true;
  double worst = 0.0;
  std::string worst_where;
  for (Variant variant : {Variant::kDrlm, Variant::kModel2}) {
    for (Objective objective : {Objective::kJoint, Objective::kConditional}) {
      DrlmParams params = init_params(dims, variant, config.seed);
      if (config.gc_init_scale > 0.0) {
        std::mt19937_64 prng(config.seed + 1);
        std::uniform_real_distribution<double> u(-config.gc_init_scale, config.gc_init_scale);
        for (Parameter* p : params.all()) {
          for (double& x : p->value.values()) x = u(prng);
        }
      }
      TrainConfig tc = config.train;
      tc.objective = objective;
      const auto build = [&](Tape& tape) {
        ModelGraph graph(tape, params);
        return drlm::objective(graph, doc, nullptr, tc);
      };
      const auto all = params.all();
      const auto report = autodiff::finite_difference_check(build, all, config.gc_step, config.gc_stencil);
      std::map<std::string, double> groups;
      for (const auto& check : report.per_parameter) {
        double& g = groups[group_of(check.name)];
        g = std::max(g, check.max_rel_error);
      }
      const std::string where =
          std::string(variant_name(variant)) + "/" + std::string(objective_name(objective));
      for (const auto& [group, err] : groups) {
        out << "gradcheck model=" << where << " group=" << group << " max_rel_error=" << fmt(err) << '\n';
      }
      const bool ok = report.max_rel_error < config.gc_threshold;
      const auto worst_check =
          std::find_if(report.per_parameter.begin(), report.per_parameter.end(),
                       [&](const auto& c) { return c.name == report.worst_parameter; });
      out << "gradcheck model=" << where << " worst=" << report.worst_parameter;
      if (worst_check != report.per_parameter.end()) {
        out << '[' << worst_check->worst_index << "] analytic=" << fmt(worst_check->analytic)
            << " numeric=" << fmt(worst_check->numeric);
      }
      out << " max_rel_error=" << fmt(report.max_rel_error) << " status=" << (ok ? "pass" : "fail") << '\n';
      pass = pass && ok;
      if (report.max_rel_error >= worst) {
        worst = report.max_rel_error;
        worst_where = where + "/" + report.worst_parameter;
      }
    }
  }
  out << "gradcheck status=" << (pass ? "pass" : "fail") << " max_rel_error=" << fmt(worst)
      << " worst=" << worst_where << " threshold=" << fmt(config.gc_threshold) << '\n';
  return pass ? kExitOk : kExitInternal;
}

int cmd_synth(const RunConfig& config, std::ostream& out) {
  const SynthCorpus corpus = generate_synthetic(config.synth);
  std::filesystem::create_directories(config.synth_dir);
  const auto dir = config.synth_dir;
  save_corpus(dir / "train.jsonl", corpus.train);
  save_corpus(dir / "dev.jsonl", corpus.dev);
  save_corpus(dir / "test.jsonl", corpus.test);
  LabelTable(corpus.label_names).save(dir / "labels.txt");
  {
    std::ofstream manifest(dir / "manifest.json", std::ios::trunc);
    if (!manifest) throw UserError("cannot write " + (dir / "manifest.json").string());
    manifest << corpus.manifest_json() << '\n';
  }
  out << "synth dir=" << dir.string() << " train=" << corpus.train.size() << " dev=" << corpus.dev.size()
      << " test=" << corpus.test.size() << " relations=" << corpus.label_names.size()
      << " seed=" << config.synth.seed << '\n';
  return kExitOk;
}

int cmd_grid(const RunConfig& config, std::ostream& out) {
  std::filesystem::create_directories(config.grid_dir);
  std::optional<double> best;
  std::filesystem::path best_ckpt, best_vocab;
  std::size_t best_K = 0, best_H = 0;
  std::string metric;
  for (std::size_t K : config.grid_K) {
    for (std::size_t H : config.grid_H) {
      RunConfig cell = config;
      cell.K = K;
      cell.H = H;
      const std::string stem = "K" + std::to_string(K) + "_H" + std::to_string(H);
      cell.checkpoint_path = config.grid_dir / (stem + ".ckpt");
      cell.vocab_path = config.grid_dir / (stem + ".ckpt.vocab");
      cell.log_path = config.grid_dir / (stem + ".log");
      std::ostringstream sink;
      const TrainOutcome outcome = train_model(cell, sink);
      const FitResult& r = outcome.result;
      metric = r.metric_name;
      const double value = r.history.at(static_cast<std::size_t>(r.best_epoch - 1)).dev_metric;
      out << "grid K=" << K << " H=" << H << ' ' << metric << '=' << fmt(value)
          << " best_epoch=" << r.best_epoch << '\n';
      if (!best || better(value, *best, metric)) {
        best = value;
        best_K = K;
        best_H = H;
        best_ckpt = cell.checkpoint_path;
        best_vocab = cell.vocab_path;
      }
    }
  }
  std::filesystem::copy_file(best_ckpt, config.checkpoint_path,
                             std::filesystem::copy_options::overwrite_existing);
  std::filesystem::copy_file(best_vocab, config.vocab_file(),
                             std::filesystem::copy_options::overwrite_existing);
  out << "grid best K=" << best_K << " H=" << best_H << ' ' << metric << '=' << fmt(*best)
      << " checkpoint=" << config.checkpoint_path.string() << '\n';
  return kExitOk;
}

}  // namespace drlm::cli
