// Copyright 2026 The kbembed Authors.
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

#pragma once

// Subcommand implementations for the kbembed binary. Kept in a header so the
// test suite can drive the CLI in-process.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kbembed/kbembed.hpp"

namespace kbembed::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kNumericalAbort = 3 };

class UsageError : public Error {
 public:
  using Error::Error;
};

enum class Command { Train, EvalEntity, EvalRelation, EvalClassify, Complete, Info, MakeClassify };

struct RunConfig {
  Command command = Command::Info;
  std::string train_path;
  std::string valid_path;
  std::string test_path;
  std::string model_path;
  std::string report_path;
  std::string trace_path;
  std::string input_path;
  std::string output_path;
  DatasetFormat format = DatasetFormat::Triplet;
  ModelConfig model_config;
  TrainConfig train_config;
  bool filter_all_splits = false;
  bool use_mentions = true;
  bool quiet = false;
  std::size_t topn = 10;
  std::vector<std::string> query;

  std::uint64_t seed() const { return train_config.seed; }
  std::size_t workers() const { return train_config.parallel_workers; }
};

inline const char* format_name(DatasetFormat f) {
  return f == DatasetFormat::Triplet ? "triplet" : "weighted";
}

// Echo of the settings that affect this command, so a run can be reproduced
// from its output. Evaluation commands report the loaded model's shape.
inline void echo_config(std::ostream& err, const RunConfig& run, const std::string& command,
                        const EmbeddingModel* model = nullptr) {
  const auto& m = run.model_config;
  const auto& t = run.train_config;
  err << "# kbembed " << command << " format=" << format_name(run.format);
  if (command == "train") {
    err << " dim=" << m.dim << " init_scale=" << m.init_scale
        << " norm=" << (m.norm == NormKind::L1 ? "l1" : "l2") << " k=" << t.negatives_k
        << " lr=" << t.learning_rate << " epochs=" << t.epochs << " objective="
        << (t.objective == Objective::MaxLikelihood ? "maxlik" : "confidence")
        << " seed=" << t.seed << " shuffle=" << (t.shuffle ? 1 : 0);
  } else if (command == "make-classify") {
    err << " seed=" << t.seed;
  }
  if (model != nullptr) {
    err << " model=" << run.model_path << " dim=" << model->dim()
        << " norm=" << (model->norm() == NormKind::L1 ? "l1" : "l2");
  }
  if (command == "eval-entity") {
    err << " filter_splits=" << (run.filter_all_splits ? "train+valid+test" : "train");
  } else if (command == "eval-relation") {
    err << " mentions=" << (run.use_mentions ? 1 : 0);
  }
  err << " workers=" << t.parallel_workers << '\n';
}

namespace detail {

inline void require(const std::string& value, const char* flag, const char* command) {
  if (value.empty()) throw UsageError(std::string(command) + " requires " + flag);
}

// Splits are read against the model's (frozen) vocabulary; unknown symbols
// are a vocabulary mismatch.
inline BeliefSet load_split(const EmbeddingModel& model, const std::string& path,
                            DatasetFormat format, bool labeled = false) {
  Vocabulary vocab = model.vocabulary();
  vocab.freeze();
  return load_beliefs(path, vocab, format, labeled);
}

inline std::string default_report_path(const RunConfig& run, const char* task) {
  return run.report_path.empty() ? run.model_path + "." + task + ".txt" : run.report_path;
}

inline void emit_report(const RunConfig& run, const EvalReport& report, const char* task,
                        std::ostream& out) {
  write_report_table(out, report);
  const auto path = default_report_path(run, task);
  std::ofstream kv(path);
  if (!kv) throw Error("cannot open report file '" + path + "'");
  write_report_key_values(kv, report);
  out << "report written to " << path << '\n';
}

template <class Id>
Id lookup(const SymbolTable<Id>& table, const std::string& symbol, const char* kind) {
  if (auto id = table.find(symbol)) return *id;
  std::string msg = std::string("unknown ") + kind + " '" + symbol + "'";
  for (std::size_t len = symbol.size(); len > 0; --len) {
    auto near = table.with_prefix(std::string_view(symbol).substr(0, len), 5);
    if (near.empty()) continue;
    msg += "; known symbols with prefix '" + symbol.substr(0, len) + "':";
    for (const auto& s : near) msg += " " + s;
    break;
  }
  throw VocabularyError(msg);
}

}  // namespace detail

inline int cmd_train(const RunConfig& run, std::ostream& out, std::ostream& err) {
  detail::require(run.train_path, "--train", "train");
  detail::require(run.model_path, "--model", "train");
  run.model_config.validate();
  run.train_config.validate();
  echo_config(err, run, "train");

  Vocabulary vocab;
  BeliefSet train_set = load_beliefs(run.train_path, vocab, run.format);
  if (run.train_config.objective == Objective::ConfidenceRegression &&
      run.format != DatasetFormat::Weighted) {
    throw UsageError("--objective confidence needs --format weighted");
  }
  out << "loaded " << train_set.size() << " beliefs: " << vocab.entities().size()
      << " entities, " << vocab.relations().size() << " relations, " << vocab.words().size()
      << " words\n";

  EmbeddingModel model(std::move(vocab), run.model_config);
  Rng init = make_rng(run.seed(), streams::kInit);
  model.initialize(init);

  LossTrace trace = train(model, train_set, run.train_config, run.quiet ? nullptr : &err);
  save_model(run.model_path, model);
  if (!run.trace_path.empty()) {
    std::ofstream tf(run.trace_path);
    if (!tf) throw Error("cannot open trace file '" + run.trace_path + "'");
    trace.write(tf);
  }
  if (trace.epochs() > 0) out << "final loss " << trace.mean_loss.back() << '\n';
  out << "model written to " << run.model_path << '\n';
  return kOk;
}

inline int cmd_eval_entity(const RunConfig& run, std::ostream& out, std::ostream& err) {
  detail::require(run.model_path, "--model", "eval-entity");
  detail::require(run.test_path, "--test", "eval-entity");
  detail::require(run.train_path, "--train", "eval-entity");
  const EmbeddingModel model = load_model(run.model_path);
  echo_config(err, run, "eval-entity", &model);
  BeliefSet test = detail::load_split(model, run.test_path, run.format);
  KnownTriplets known = detail::load_split(model, run.train_path, run.format).known;
  if (run.filter_all_splits) {
    if (!run.valid_path.empty()) {
      known.merge(detail::load_split(model, run.valid_path, run.format).known);
    }
    known.merge(test.known);
  }
  auto report = entity_inference_eval(model, test, known, run.workers());
  detail::emit_report(run, report, "eval-entity", out);
  return kOk;
}

inline int cmd_eval_relation(const RunConfig& run, std::ostream& out, std::ostream& err) {
  detail::require(run.model_path, "--model", "eval-relation");
  detail::require(run.test_path, "--test", "eval-relation");
  const EmbeddingModel model = load_model(run.model_path);
  echo_config(err, run, "eval-relation", &model);
  BeliefSet test = detail::load_split(model, run.test_path, run.format);
  auto report = relation_prediction_eval(model, test, {run.use_mentions, run.workers()});
  detail::emit_report(run, report, "eval-relation", out);
  return kOk;
}

inline int cmd_eval_classify(const RunConfig& run, std::ostream& out, std::ostream& err) {
  detail::require(run.model_path, "--model", "eval-classify");
  detail::require(run.valid_path, "--valid", "eval-classify");
  detail::require(run.test_path, "--test", "eval-classify");
  const EmbeddingModel model = load_model(run.model_path);
  echo_config(err, run, "eval-classify", &model);
  BeliefSet valid = detail::load_split(model, run.valid_path, run.format, true);
  BeliefSet test = detail::load_split(model, run.test_path, run.format, true);
  auto thresholds = search_thresholds(model, valid, run.workers());
  auto report = triplet_classification_eval(model, thresholds, test, run.workers());
  out << "validation accuracy (global threshold) "
      << kbembed::detail::percent(thresholds.fallback_accuracy) << '\n';
  detail::emit_report(run, report, "eval-classify", out);
  return kOk;
}

inline int cmd_complete(const RunConfig& run, std::ostream& out, std::ostream& err) {
  detail::require(run.model_path, "--model", "complete");
  const auto& q = run.query;
  if (q.size() < 3) throw UsageError("query must be 'h r ?', '? r t' or 'h ? t [mention...]'");
  const EmbeddingModel model = load_model(run.model_path);
  const auto& vocab = model.vocabulary();

  struct Row {
    std::string symbol;
    double log_prob;
  };
  std::vector<Row> rows;

  auto rank_entities = [&](std::span<const EntityId> candidates, auto&& score) {
    std::vector<double> s;
    s.reserve(candidates.size());
    for (auto e : candidates) s.push_back(score(e));
    const double z = log_sum_exp(s);
    std::vector<std::size_t> idx(candidates.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      if (s[a] != s[b]) return s[a] > s[b];
      return candidates[a] < candidates[b];
    });
    for (auto i : idx) rows.push_back({vocab.entities().symbol(candidates[i]), s[i] - z});
  };

  if (q.size() == 3 && q[2] == "?" && q[0] != "?" && q[1] != "?") {
    const auto h = detail::lookup(vocab.entities(), q[0], "entity");
    const auto r = detail::lookup(vocab.relations(), q[1], "relation");
    rank_entities(vocab.tail_occurrence().members(),
                  [&](EntityId t) { return score_triplet(model, h, r, t); });
  } else if (q.size() == 3 && q[0] == "?" && q[1] != "?" && q[2] != "?") {
    const auto r = detail::lookup(vocab.relations(), q[1], "relation");
    const auto t = detail::lookup(vocab.entities(), q[2], "entity");
    rank_entities(vocab.head_occurrence().members(),
                  [&](EntityId h) { return score_triplet(model, h, r, t); });
  } else if (q[1] == "?" && q[0] != "?" && q[2] != "?") {
    const auto h = detail::lookup(vocab.entities(), q[0], "entity");
    const auto t = detail::lookup(vocab.entities(), q[2], "entity");
    std::string text;
    for (std::size_t i = 3; i < q.size(); ++i) text += (i > 3 ? " " : "") + q[i];
    const Mention mention = tokenize_mention(text, vocab);
    const auto relations = vocab.relation_universe();
    const Mention* m = run.use_mentions && !mention.empty() ? &mention : nullptr;
    for (const auto& s : rank_relations(model, h, t, m, relations)) {
      rows.push_back({vocab.relations().symbol(s.relation), s.score});
    }
  } else {
    throw UsageError("query must be 'h r ?', '? r t' or 'h ? t [mention...]'");
  }

  const std::size_t n = std::min(run.topn, rows.size());
  for (std::size_t i = 0; i < n; ++i) {
    out << (i + 1) << '\t' << rows[i].symbol << '\t' << kbembed::detail::fmt("%.6f", rows[i].log_prob)
        << '\n';
  }
  (void)err;
  return kOk;
}

inline int cmd_info(const RunConfig& run, std::ostream& out, std::ostream&) {
  detail::require(run.model_path, "--model", "info");
  const EmbeddingModel model = load_model(run.model_path);
  const auto& v = model.vocabulary();
  out << "format_version=" << kModelFormatVersion << '\n'
      << "dim=" << model.dim() << '\n'
      << "norm=" << (model.norm() == NormKind::L1 ? "l1" : "l2") << '\n'
      << "entities=" << v.entities().size() << '\n'
      << "relations=" << v.relations().size() << '\n'
      << "words=" << v.words().size() << '\n'
      << "head_occurrence=" << v.head_occurrence().size() << '\n'
      << "tail_occurrence=" << v.tail_occurrence().size() << '\n'
      << "alpha=" << model.alpha << '\n'
      << "beta=" << model.beta << '\n'
      << "epsilon=" << model.epsilon << '\n'
      << "eta=" << model.eta << '\n';
  return kOk;
}

// Writes a labeled classification split: every positive of --input followed
// by one positionally constrained corruption that is not a known triplet.
inline int cmd_make_classify(const RunConfig& run, std::ostream& out, std::ostream& err) {
  detail::require(run.train_path, "--train", "make-classify");
  detail::require(run.input_path, "--input", "make-classify");
  detail::require(run.output_path, "--output", "make-classify");
  echo_config(err, run, "make-classify");
  Vocabulary vocab;
  BeliefSet train_set = load_beliefs(run.train_path, vocab, run.format);
  vocab.freeze();
  BeliefSet positives = load_beliefs(run.input_path, vocab, run.format);
  KnownTriplets known = train_set.known;
  known.merge(positives.known);
  Rng rng = make_rng(run.seed(), streams::kDataset);
  BeliefSet labeled = build_classification_split(positives, vocab, known, rng);
  std::ofstream f(run.output_path);
  if (!f) throw Error("cannot open '" + run.output_path + "' for writing");
  write_beliefs(f, labeled, vocab, run.format, true);
  out << "wrote " << labeled.size() << " labeled examples to " << run.output_path << '\n';
  return kOk;
}

// Parses argv and dispatches. Returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Joint embeddings of entities, relations and mention words for knowledge completion"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key-value config file; command-line flags take precedence");
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  RunConfig run;
  std::string format = "triplet", objective = "maxlik", norm = "l1";
  bool no_shuffle = false;
  bool no_mentions = false;

  auto data_opts = [&](CLI::App* sub) {
    sub->add_option("--format", format, "dataset format")
        ->check(CLI::IsMember({"triplet", "weighted"}))
        ->capture_default_str();
    sub->add_option("--workers", run.train_config.parallel_workers,
                    "worker threads (0 = sequential, deterministic)")
        ->capture_default_str();
  };

  auto* train_cmd = app.add_subcommand("train", "train a model and write it to --model");
  train_cmd->add_option("--train", run.train_path, "training file")->required();
  train_cmd->add_option("--model", run.model_path, "output model file")->required();
  train_cmd->add_option("--dim", run.model_config.dim)->capture_default_str();
  train_cmd->add_option("--init-scale", run.model_config.init_scale)->capture_default_str();
  train_cmd->add_option("--norm", norm)->check(CLI::IsMember({"l1", "l2"}))->capture_default_str();
  train_cmd->add_option("--k", run.train_config.negatives_k, "negatives per positive")
      ->capture_default_str();
  train_cmd->add_option("--lr", run.train_config.learning_rate)->capture_default_str();
  train_cmd->add_option("--epochs", run.train_config.epochs)->capture_default_str();
  train_cmd->add_option("--objective", objective)
      ->check(CLI::IsMember({"maxlik", "confidence"}))
      ->capture_default_str();
  train_cmd->add_option("--seed", run.train_config.seed)->capture_default_str();
  train_cmd->add_flag("--no-shuffle", no_shuffle);
  train_cmd->add_option("--trace", run.trace_path, "write epoch/loss columns here");
  train_cmd->add_flag("--quiet", run.quiet, "suppress per-epoch progress");
  data_opts(train_cmd);

  auto* ent_cmd = app.add_subcommand("eval-entity", "entity inference: mean rank and hit@10");
  ent_cmd->add_option("--model", run.model_path)->required();
  ent_cmd->add_option("--test", run.test_path)->required();
  ent_cmd->add_option("--train", run.train_path, "training split (filter set)")->required();
  ent_cmd->add_option("--valid", run.valid_path);
  ent_cmd->add_flag("--filter-splits", run.filter_all_splits,
                    "filter with train+valid+test instead of train only");
  ent_cmd->add_option("--report", run.report_path);
  data_opts(ent_cmd);

  auto* rel_cmd = app.add_subcommand("eval-relation", "relation prediction: avg rank, hit@10, hit@1");
  rel_cmd->add_option("--model", run.model_path)->required();
  rel_cmd->add_option("--test", run.test_path)->required();
  rel_cmd->add_flag("--no-mentions", no_mentions, "ignore relation mentions");
  rel_cmd->add_option("--report", run.report_path);
  data_opts(rel_cmd);

  auto* cls_cmd = app.add_subcommand("eval-classify", "triplet classification accuracy");
  cls_cmd->add_option("--model", run.model_path)->required();
  cls_cmd->add_option("--valid", run.valid_path, "labeled validation split");
  cls_cmd->add_option("--test", run.test_path, "labeled test split")->required();
  cls_cmd->add_option("--report", run.report_path);
  data_opts(cls_cmd);

  auto* cmp_cmd = app.add_subcommand("complete", "complete 'h r ?', '? r t' or 'h ? t mention...'");
  cmp_cmd->add_option("--model", run.model_path)->required();
  cmp_cmd->add_option("--topn", run.topn)->capture_default_str();
  cmp_cmd->add_flag("--no-mentions", no_mentions);
  cmp_cmd->add_option("query", run.query, "query tokens")->required();

  auto* info_cmd = app.add_subcommand("info", "print model header");
  info_cmd->add_option("--model", run.model_path)->required();

  auto* mk_cmd = app.add_subcommand("make-classify", "build a labeled classification split");
  mk_cmd->add_option("--train", run.train_path)->required();
  mk_cmd->add_option("--input", run.input_path, "positive beliefs")->required();
  mk_cmd->add_option("--output", run.output_path)->required();
  mk_cmd->add_option("--seed", run.train_config.seed)->capture_default_str();
  data_opts(mk_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  run.format = format == "weighted" ? DatasetFormat::Weighted : DatasetFormat::Triplet;
  run.train_config.objective =
      objective == "confidence" ? Objective::ConfidenceRegression : Objective::MaxLikelihood;
  run.model_config.norm = norm == "l2" ? NormKind::L2 : NormKind::L1;
  run.train_config.shuffle = !no_shuffle;
  run.use_mentions = !no_mentions;

  try {
    if (*train_cmd) return cmd_train(run, out, err);
    if (*ent_cmd) return cmd_eval_entity(run, out, err);
    if (*rel_cmd) return cmd_eval_relation(run, out, err);
    if (*cls_cmd) return cmd_eval_classify(run, out, err);
    if (*cmp_cmd) return cmd_complete(run, out, err);
    if (*info_cmd) return cmd_info(run, out, err);
    if (*mk_cmd) return cmd_make_classify(run, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kUsage;
  } catch (const NumericalError& e) {
    err << "numerical abort: " << e.what() << '\n';
    return kNumericalAbort;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kUsage;
}

}  // namespace kbembed::cli
