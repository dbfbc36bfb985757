#include "commands.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

#include <spdlog/spdlog.h>

#include "config.hpp"
#include "io.hpp"
#include "maskguard/error.hpp"
#include "maskguard/seeding.hpp"

namespace maskguard::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kDatasetCsv = "dataset.csv";
constexpr const char* kModelFile = "model.bin";

struct Context {
  LoadedConfig loaded;
  std::uint64_t seed = 1;
};

Context open_config(const CommandOptions& o, const std::string& subcommand) {
  Context ctx;
  ctx.loaded = load_config(o.config);
  if (!ctx.loaded.manifest_subcommand.empty() && ctx.loaded.manifest_subcommand != subcommand) {
    throw InvalidConfig("manifest was written by '" + ctx.loaded.manifest_subcommand +
                        "', not '" + subcommand + "'");
  }
  if (o.seed) ctx.seed = *o.seed;
  else if (ctx.loaded.manifest_seed) ctx.seed = *ctx.loaded.manifest_seed;
  else ctx.seed = config_seed(ctx.loaded.config).value_or(1);
  return ctx;
}

// Flag, then manifest input, then config value.
std::optional<fs::path> pick_input(const std::optional<fs::path>& flag, const Context& ctx,
                                   const char* key, const std::optional<fs::path>& from_config) {
  if (flag) return fs::absolute(*flag);
  if (ctx.loaded.manifest_inputs.contains(key)) {
    return fs::path(ctx.loaded.manifest_inputs.at(key).get<std::string>());
  }
  if (from_config) return fs::absolute(*from_config);
  return std::nullopt;
}

void write_manifest(const CommandOptions& o, const std::string& subcommand, const Context& ctx,
                    const json& inputs, const json& outputs) {
  const std::string canonical = ctx.loaded.config.dump();
  json m;
  m["manifest_version"] = 1;
  m["tool"] = "maskguard";
  m["tool_version"] = kToolVersion;
  m["subcommand"] = subcommand;
  m["config_path"] = o.config.string();
  m["config_dir"] = fs::absolute(ctx.loaded.base_dir).lexically_normal().string();
  m["config_digest"] = "fnv1a64:" + hex64(fnv1a64(canonical));
  m["root_seed"] = ctx.seed;
  m["output_dir"] = o.out.string();
  m["inputs"] = inputs;
  m["outputs"] = outputs;
  m["config"] = ctx.loaded.config;
  write_atomic(o.out / "manifest.json", m.dump(2) + "\n");
}

std::shared_ptr<const MlpModel> load_model(const std::optional<fs::path>& path) {
  if (!path) throw InvalidConfig("no model given (config \"model\" or --model)");
  std::ifstream in(*path, std::ios::binary);
  if (!in) throw MissingArtifact("model file not found: " + path->string());
  return std::make_shared<const MlpModel>(MlpModel::load(in));
}

std::string phase_letters(const std::array<bool, 3>& p) {
  std::string s;
  for (std::size_t k = 0; k < 3; ++k) {
    if (p[k]) s += static_cast<char>('A' + k);
  }
  return s;
}

std::string stream_csv(const Stream& s) {
  std::vector<std::string> header = {"t"};
  for (const char* ch : {"v1", "i1", "i2_true", "i2"}) {
    for (const char* ph : {"a", "b", "c"}) {
      header.push_back(std::string(ch) + "_" + ph + "_re");
      header.push_back(std::string(ch) + "_" + ph + "_im");
    }
  }
  header.insert(header.end(), {"fault_active", "internal", "attacked"});
  CsvWriter w(header);
  for (const auto& fr : s) {
    w.field(fr.t);
    for (const ThreePhaseSet* set : {&fr.v1, &fr.i1, &fr.i2_true, &fr.i2}) {
      for (std::size_t p = 0; p < 3; ++p) w.field((*set)[p].re()).field((*set)[p].im());
    }
    w.field(fr.flags.fault_active).field(fr.flags.internal).field(fr.flags.attacked);
    w.end_row();
  }
  return w.str();
}

std::string trace_csv(const std::vector<MiTraceRow>& trace) {
  CsvWriter w({"t", "active", "p_norm", "m", "l_u", "o"});
  for (const auto& r : trace) {
    w.field(r.t).field(r.active).field(r.p_norm).field(r.m).field(r.l_u).field(r.o);
    w.end_row();
  }
  return w.str();
}

std::string events_jsonl(const std::vector<DetectionEvent>& events) {
  std::string out;
  for (const auto& e : events) {
    json j;
    j["time"] = iso_timestamp(e.t);
    j["t_s"] = e.t;
    j["frame"] = e.frame;
    j["event"] = std::string(to_string(e.kind));
    if (e.kind == EventKind::RelayTrip) j["phases"] = phase_letters(e.phases);
    if (std::isfinite(e.probability)) j["p_internal"] = e.probability;
    out += j.dump() + "\n";
  }
  return out;
}

struct Prepared {
  ExperimentConfig ex;
  std::vector<ScenarioCase> cases;
  SplitResult parts;
};

Prepared prepare(const Context& ctx) {
  Prepared p;
  p.ex = parse_experiment(ctx.loaded.config, ctx.loaded.base_dir, ctx.seed);
  p.cases = generate_sweep(p.ex.sweep, ctx.seed);
  std::vector<int> labels;
  labels.reserve(p.cases.size());
  for (const auto& c : p.cases) labels.push_back(c.label);
  p.parts = split(labels, p.ex.split_ratio, ctx.seed);
  return p;
}

std::vector<ScenarioCase> suite_cases(const Prepared& p, std::uint64_t seed) {
  const auto pick = draw_suite(p.cases, p.parts.test, p.ex.suite_positives,
                               p.ex.suite_negatives, derive_seed(seed, SeedStream::Suite, 0));
  std::vector<ScenarioCase> out;
  out.reserve(pick.size());
  for (auto i : pick) out.push_back(p.cases[i]);
  return out;
}

double budget_s(const PipelineConfig& cfg) { return kAlarmBudgetCycles / cfg.system_frequency_hz; }

void metrics_row(CsvWriter& w, const std::string& stage, const ConfusionCounts& c) {
  const MetricReport m = compute_metrics(c);
  w.field(stage).field(c.tp).field(c.tn).field(c.fp).field(c.fn);
  w.field(m.accuracy).field(m.precision).field(m.recall).field(m.fp_rate).field(m.fn_rate);
  w.end_row();
}

json metrics_json(const ConfusionCounts& c) {
  const MetricReport m = compute_metrics(c);
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  return {{"tp", c.tp},          {"tn", c.tn},
          {"fp", c.fp},          {"fn", c.fn},
          {"accuracy", opt(m.accuracy)},  {"precision", opt(m.precision)},
          {"recall", opt(m.recall)},      {"fp_rate", opt(m.fp_rate)},
          {"fn_rate", opt(m.fn_rate)}};
}

double parse_number(const std::string& s, const std::string& what) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw FormatError("bad number '" + s + "' in " + what);
  }
  return v;
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const InvalidConfig*>(&e) || dynamic_cast<const InvalidScenario*>(&e) ||
      dynamic_cast<const InvalidAttackParams*>(&e) || dynamic_cast<const UnsupportedFault*>(&e)) {
    return 2;
  }
  return 3;
}

void cmd_simulate(const CommandOptions& o) {
  const Context ctx = open_config(o, "simulate");
  SimulateConfig sim = parse_simulate(ctx.loaded.config, ctx.loaded.base_dir, ctx.seed);
  const auto model_path = pick_input(o.model, ctx, "model", sim.model_path);
  json inputs = json::object();
  if (model_path) {
    sim.pipeline.model = load_model(model_path);
    inputs["model"] = model_path->string();
  }
  spdlog::info("simulate: {} frames", sim.scenario_case.scenario.frame_count());
  const Stream s = realize(sim.scenario_case);
  const PipelineResult r = run_pipeline(s, sim.pipeline);
  write_atomic(o.out / "stream.csv", stream_csv(s));
  write_atomic(o.out / "mi_trace.csv", trace_csv(r.trace));
  write_atomic(o.out / "events.jsonl", events_jsonl(r.events));
  write_manifest(o, "simulate", ctx, inputs,
                 {{"stream.csv", "maskguard.stream/1"},
                  {"mi_trace.csv", "maskguard.mi_trace/1"},
                  {"events.jsonl", "maskguard.events/1"}});
  spdlog::info("simulate: {} events", r.events.size());
}

void cmd_dataset(const CommandOptions& o) {
  const Context ctx = open_config(o, "dataset");
  const Prepared p = prepare(ctx);
  spdlog::info("dataset: {} scenarios", p.cases.size());
  const auto rows = build_dataset(p.cases, p.ex.pipeline, o.jobs);

  std::vector<char> in_train(p.cases.size(), 0);
  for (auto i : p.parts.train) in_train[i] = 1;
  std::vector<std::string> header = {"id",        "category",      "label",
                                     "split",     "triggered",     "trigger_index",
                                     "degenerate_entries"};
  for (auto& name : feature_names()) header.push_back(name);
  CsvWriter w(header);
  json failed = json::array();
  std::array<std::size_t, 2> triggered{}, total{};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (!r.error.empty()) {
      failed.push_back({{"id", r.id}, {"error", r.error}});
      continue;
    }
    const auto lbl = static_cast<std::size_t>(r.label);
    ++total[lbl];
    triggered[lbl] += r.triggered ? 1 : 0;
    w.field(r.id).field(r.category).field(r.label);
    w.field(in_train[i] ? "train" : "test");
    w.field(r.triggered).field(r.trigger_index).field(r.degenerate_entries);
    for (double v : r.features) w.field(v);
    w.end_row();
  }
  write_atomic(o.out / kDatasetCsv, w.str());
  json summary = {{"scenarios", p.cases.size()},
                  {"positives", total[1]},
                  {"negatives", total[0]},
                  {"train", p.parts.train.size()},
                  {"test", p.parts.test.size()},
                  {"mi_triggered_positives", triggered[1]},
                  {"mi_triggered_negatives", triggered[0]},
                  {"failed", failed}};
  write_atomic(o.out / "summary.json", summary.dump(2) + "\n");
  write_manifest(o, "dataset", ctx, json::object(),
                 {{kDatasetCsv, "maskguard.dataset/1"}, {"summary.json", "maskguard.summary/1"}});
  if (!failed.empty()) spdlog::warn("dataset: {} scenarios failed", failed.size());
}

void cmd_train(const CommandOptions& o) {
  const Context ctx = open_config(o, "train");
  const ExperimentConfig ex = parse_experiment(ctx.loaded.config, ctx.loaded.base_dir, ctx.seed);
  const auto dir = pick_input(o.dataset, ctx, "dataset", ex.dataset_dir);
  if (!dir) throw InvalidConfig("no dataset given (config \"dataset\" or --dataset)");
  const fs::path csv = *dir / kDatasetCsv;
  if (!fs::exists(csv)) throw MissingArtifact("dataset not found: " + csv.string());
  const CsvTable table = read_csv(csv);

  const std::size_t c_label = table.column("label");
  const std::size_t c_split = table.column("split");
  const std::size_t c_first = table.column(feature_names().front());
  std::array<std::vector<std::size_t>, 2> parts;  // train, test
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    parts[table.rows[r][c_split] == "train" ? 0 : 1].push_back(r);
  }
  auto make = [&](const std::vector<std::size_t>& pick) {
    Dataset d;
    d.x.resize(static_cast<Eigen::Index>(pick.size()), static_cast<Eigen::Index>(kFeatureCount));
    for (std::size_t i = 0; i < pick.size(); ++i) {
      const auto& row = table.rows[pick[i]];
      for (std::size_t j = 0; j < kFeatureCount; ++j) {
        d.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            parse_number(row[c_first + j], csv.string());
      }
      d.y.push_back(row[c_label] == "1" ? 1 : 0);
    }
    return d;
  };
  const Dataset train_set = make(parts[0]);
  const Dataset test_set = make(parts[1]);
  spdlog::info("train: {} training rows, {} test rows", train_set.size(), test_set.size());

  const TrainResult tr = train(train_set, ex.train);
  {
    std::ostringstream buf(std::ios::binary);
    tr.model.save(buf);
    write_atomic(o.out / kModelFile, buf.str());
  }
  CsvWriter log({"epoch", "train_loss", "validation_loss", "validation_error"});
  for (const auto& h : tr.history) {
    log.field(h.epoch).field(h.train_loss).field(h.validation_loss).field(h.validation_error);
    log.end_row();
  }
  write_atomic(o.out / "training_log.csv", log.str());
  json outputs = {{kModelFile, "maskguard.mlp/1"},
                  {"training_log.csv", "maskguard.training_log/1"},
                  {"summary.json", "maskguard.summary/1"}};
  json summary = {{"best_epoch", tr.best_epoch},
                  {"train_rows", train_set.size()},
                  {"test_rows", test_set.size()},
                  {"train_accuracy", accuracy(tr.model, train_set)},
                  {"test_accuracy", test_set.size() ? json(accuracy(tr.model, test_set))
                                                    : json(nullptr)}};
  if (ex.kfold) {
    const KFoldReport k = kfold_evaluate(train_set, ex.train);
    CsvWriter kw({"fold", "size", "accuracy"});
    for (std::size_t f = 0; f < k.fold_accuracy.size(); ++f) {
      kw.field(f).field(k.fold_size[f]).field(k.fold_accuracy[f]);
      kw.end_row();
    }
    write_atomic(o.out / "kfold.csv", kw.str());
    outputs["kfold.csv"] = "maskguard.kfold/1";
    summary["kfold_mean_accuracy"] = k.mean_accuracy;
    summary["kfold_std_accuracy"] = k.std_accuracy;
  }
  write_atomic(o.out / "summary.json", summary.dump(2) + "\n");
  write_manifest(o, "train", ctx, {{"dataset", dir->string()}}, outputs);
  spdlog::info("train: best epoch {}", tr.best_epoch);
}

void cmd_eval(const CommandOptions& o) {
  const Context ctx = open_config(o, "eval");
  const Prepared p = prepare(ctx);
  const auto model_path = pick_input(o.model, ctx, "model", p.ex.model_path);
  PipelineConfig cfg = p.ex.pipeline;
  cfg.model = load_model(model_path);
  const auto suite = suite_cases(p, ctx.seed);
  spdlog::info("eval: {} scenarios", suite.size());
  const auto rows = batch_run(suite, cfg, o.jobs);

  CsvWriter w({"id", "category", "label", "relay_trip", "mi_trigger", "zcc_internal",
               "zcc_external", "fma_alarm", "mi_latency_s", "alarm_latency_s",
               "zcc_probability", "failed"});
  std::size_t failed = 0;
  for (const auto& r : rows) {
    w.field(r.id).field(r.category).field(r.label).field(r.relay_trip).field(r.mi_trigger);
    w.field(r.zcc_internal).field(r.zcc_external).field(r.fma_alarm);
    w.field(r.mi_latency_s).field(r.alarm_latency_s).field(r.zcc_probability);
    w.field(!r.error.empty());
    w.end_row();
    if (!r.error.empty()) {
      ++failed;
      spdlog::warn("eval: {} failed: {}", r.id, r.error);
    }
  }
  write_atomic(o.out / "results.csv", w.str());

  const double budget = budget_s(cfg);
  const ConfusionCounts mi = confusion(rows, Stage::MIOnly, budget);
  const ConfusionCounts full = confusion(rows, Stage::Full, budget);
  CsvWriter mw({"stage", "tp", "tn", "fp", "fn", "accuracy", "precision", "recall", "fp_rate",
                "fn_rate"});
  metrics_row(mw, "mi_only", mi);
  metrics_row(mw, "mi_zcc", full);
  write_atomic(o.out / "metrics.csv", mw.str());
  json summary = {{"scenarios", rows.size()},
                  {"failed", failed},
                  {"latency_budget_s", budget},
                  {"mi_only", metrics_json(mi)},
                  {"mi_zcc", metrics_json(full)}};
  write_atomic(o.out / "summary.json", summary.dump(2) + "\n");
  write_manifest(o, "eval", ctx, {{"model", model_path->string()}},
                 {{"results.csv", "maskguard.results/1"},
                  {"metrics.csv", "maskguard.metrics/1"},
                  {"summary.json", "maskguard.summary/1"}});
  spdlog::info("eval: MI+ZCC tp={} fp={} fn={} tn={}", full.tp, full.fp, full.fn, full.tn);
}

void cmd_roc(const CommandOptions& o) {
  const Context ctx = open_config(o, "roc");
  const Prepared p = prepare(ctx);
  const auto model_path = pick_input(o.model, ctx, "model", p.ex.model_path);
  PipelineConfig cfg = p.ex.pipeline;
  cfg.model = load_model(model_path);
  const auto suite = suite_cases(p, ctx.seed);
  const double budget = budget_s(cfg);

  struct Point {
    double f, fpr, tpr;
  };
  std::vector<Point> mi_pts, full_pts;
  for (double f : p.ex.roc_f) {
    cfg.mi.f = f;
    spdlog::info("roc: f = {}", f);
    const auto rows = batch_run(suite, cfg, o.jobs);
    for (auto [stage, pts] : {std::pair{Stage::MIOnly, &mi_pts}, std::pair{Stage::Full, &full_pts}}) {
      const MetricReport m = compute_metrics(confusion(rows, stage, budget));
      pts->push_back({f, m.fp_rate.value_or(0.0), m.recall.value_or(0.0)});
    }
  }
  json aucs = json::object();
  CsvWriter aw({"curve", "auc"});
  json outputs = {{"auc.csv", "maskguard.auc/1"}};
  for (auto [name, pts] : {std::pair{"mi_only", &mi_pts}, std::pair{"mi_zcc", &full_pts}}) {
    std::stable_sort(pts->begin(), pts->end(), [](const Point& a, const Point& b) {
      return a.fpr < b.fpr || (a.fpr == b.fpr && a.tpr < b.tpr);
    });
    CsvWriter w({"f", "fp_rate", "tp_rate"});
    std::vector<RocPoint> rp;
    for (const auto& q : *pts) {
      w.field(q.f).field(q.fpr).field(q.tpr);
      w.end_row();
      rp.push_back({q.fpr, q.tpr});
    }
    const std::string file = std::string("roc_") + name + ".csv";
    write_atomic(o.out / file, w.str());
    outputs[file] = "maskguard.roc/1";
    std::optional<double> auc;
    try {
      auc = roc_auc(rp).auc;
    } catch (const DegenerateCurve& e) {
      spdlog::warn("roc: {}: {}", name, e.what());
    }
    aw.field(name).field(auc);
    aw.end_row();
    aucs[name] = auc ? json(*auc) : json(nullptr);
  }
  write_atomic(o.out / "auc.csv", aw.str());
  write_manifest(o, "roc", ctx, {{"model", model_path->string()}}, outputs);
  spdlog::info("roc: AUC mi_only={} mi_zcc={}", aucs["mi_only"].dump(), aucs["mi_zcc"].dump());
}

}  // namespace maskguard::cli
