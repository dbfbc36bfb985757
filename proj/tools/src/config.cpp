#include "config.hpp"

#include <fstream>

#include "maskguard/calibration.hpp"
#include "maskguard/error.hpp"
#include "maskguard/seeding.hpp"

namespace maskguard::cli {

namespace fs = std::filesystem;

Section::Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
  if (!j_.is_object()) throw InvalidConfig(path_ + " must be an object");
}

bool Section::has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }

bool Section::is_null(const char* key) {
  if (!j_.contains(key)) return false;
  used_.insert(key);
  return j_.at(key).is_null();
}

const json& Section::raw(const char* key) {
  used_.insert(key);
  if (!j_.contains(key)) fail(key, "is required");
  return j_.at(key);
}

Section Section::child(const char* key) { return Section(raw(key), where(key)); }

void Section::finish() const {
  for (const auto& [key, value] : j_.items()) {
    if (!used_.count(key)) throw InvalidConfig("unknown key " + path_ + "." + key);
  }
}

void Section::fail(const char* key, const std::string& what) const {
  throw InvalidConfig(where(key) + " " + what);
}

LoadedConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("cannot open config " + path.string());
  LoadedConfig out;
  try {
    out.config = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidConfig(path.string() + ": " + e.what());
  }
  out.path = path;
  out.base_dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  if (out.config.is_object() && out.config.contains("manifest_version")) {
    const json m = out.config;
    if (!m.contains("config") || !m.contains("root_seed") || !m.contains("subcommand")) {
      throw InvalidConfig(path.string() + ": incomplete run manifest");
    }
    out.config = m.at("config");
    out.manifest_seed = m.at("root_seed").get<std::uint64_t>();
    out.manifest_subcommand = m.at("subcommand").get<std::string>();
    if (m.contains("inputs")) out.manifest_inputs = m.at("inputs");
    if (m.contains("config_dir")) out.base_dir = m.at("config_dir").get<std::string>();
  }
  return out;
}

std::optional<std::uint64_t> config_seed(const json& j) {
  if (j.is_object() && j.contains("seed") && !j.at("seed").is_null()) {
    try {
      return j.at("seed").get<std::uint64_t>();
    } catch (const json::exception&) {
      throw InvalidConfig("config.seed must be a non-negative integer");
    }
  }
  return std::nullopt;
}

namespace {

Complex complex_from(Section& s, const char* key, Complex fallback) {
  if (!s.has(key)) return fallback;
  const auto v = s.get<std::vector<double>>(key, {});
  if (v.size() != 2) s.fail(key, "must be [re, im]");
  return {v[0], v[1]};
}

Phasor polar_from(Section s) {
  const double mag = s.require<double>("magnitude");
  const double ang = s.get<double>("angle_deg", 0.0);
  s.finish();
  return Phasor::polar(mag, deg_to_rad(ang));
}

Network parse_network(Section& parent) {
  if (!parent.has("network")) {
    parent.is_null("network");
    return default_network();
  }
  Section s = parent.child("network");
  CalibrationOptions o;
  o.z_th1 = complex_from(s, "z_th1", o.z_th1);
  o.z_th2 = complex_from(s, "z_th2", o.z_th2);
  o.adjacent_scale = s.get("adjacent_scale", o.adjacent_scale);
  o.line_zero_series_ratio = s.get("line_zero_series_ratio", o.line_zero_series_ratio);
  o.line_zero_shunt_ratio = s.get("line_zero_shunt_ratio", o.line_zero_shunt_ratio);
  o.source_zero_ratio = s.get("source_zero_ratio", o.source_zero_ratio);
  o.length_km = s.get("length_km", o.length_km);
  s.finish();
  return calibrate_network(reference_operating_point(), o);
}

Terminal parse_terminal(Section& s, const char* key, Terminal fallback) {
  if (!s.has(key)) return fallback;
  const int t = s.get<int>(key, 0);
  if (t == 1) return Terminal::One;
  if (t == 2) return Terminal::Two;
  s.fail(key, "must be 1 or 2");
}

FaultKind kind_from(Section& s, const char* key) {
  try {
    return parse_fault_kind(s.require<std::string>(key));
  } catch (const UnsupportedFault& e) {
    throw InvalidConfig(s.where(key) + ": " + e.what());
  }
}

void fault_fields(Section& s, FaultSpec& f) {
  f.kind = kind_from(s, "kind");
  f.x = s.get("x", f.x);
  f.r_f = s.get("r_f", f.r_f);
  f.t_inception = s.get("t_inception", f.t_inception);
  if (s.has("t_clear")) f.t_clear = s.get<double>("t_clear", 0.0);
}

Event parse_event(Section s, const Network& net) {
  Event ev;
  ev.t = s.require<double>("t");
  const auto type = s.require<std::string>("type");
  if (type == "shunt_switch") {
    ShuntSwitch sw;
    sw.at = parse_terminal(s, "terminal", Terminal::Two);
    if (s.has("mvar")) {
      const auto h = solve_healthy(net);
      const Phasor v = sw.at == Terminal::One ? h.terminals.v1.a : h.terminals.v2.a;
      sw = ShuntSwitch::capacitor(sw.at, s.get<double>("mvar", 0.0), v.magnitude());
    } else {
      sw.admittance = complex_from(s, "admittance_s", {});
    }
    ev.action = sw;
  } else if (type == "source_step") {
    SourceStep st;
    st.at = parse_terminal(s, "terminal", Terminal::Two);
    st.magnitude_factor = s.get("magnitude_factor", 1.0);
    st.angle_shift_rad = deg_to_rad(s.get("angle_shift_deg", 0.0));
    ev.action = st;
  } else if (type == "load_scale") {
    ev.action = LoadScale{s.require<double>("factor")};
  } else {
    s.fail("type", "must be shunt_switch, source_step or load_scale");
  }
  s.finish();
  return ev;
}

LineScenario parse_scenario(Section s, const Network& net) {
  LineScenario sc;
  sc.network = net;
  sc.duration_s = s.get("duration_s", sc.duration_s);
  sc.sample_rate_hz = s.get("sample_rate_hz", sc.sample_rate_hz);
  sc.system_frequency_hz = s.get("system_frequency_hz", sc.system_frequency_hz);
  if (s.has("fault")) {
    Section f = s.child("fault");
    FaultSpec spec;
    fault_fields(f, spec);
    f.finish();
    sc.fault = spec;
  }
  if (s.has("external_fault")) {
    Section f = s.child("external_fault");
    ExternalFault ext;
    ext.side = parse_terminal(f, "side", Terminal::Two);
    fault_fields(f, ext.fault);
    f.finish();
    sc.external_fault = ext;
  }
  if (s.has("events")) {
    const json& arr = s.raw("events");
    if (!arr.is_array()) s.fail("events", "must be an array");
    for (std::size_t k = 0; k < arr.size(); ++k) {
      sc.events.push_back(parse_event(Section(arr[k], s.where("events") + "[" +
                                                          std::to_string(k) + "]"),
                                      net));
    }
  }
  s.finish();
  try {
    sc.validate();
  } catch (const Error& e) {
    throw InvalidConfig(std::string("scenario: ") + e.what());
  }
  return sc;
}

AttackSpec parse_attack(Section s, const Network& net, double default_start) {
  AttackSpec a;
  const auto mode = s.get<std::string>("mode", "none");
  a.t_start = s.get("t_start", default_start);
  if (mode == "none") {
    a.mode = NoAttack{};
  } else if (mode == "basic") {
    const bool named = !s.has("c_a") || s.raw("c_a").is_string();
    const std::string name = !s.has("c_a") ? "healthy" : named ? s.raw("c_a").get<std::string>() : "";
    s.is_null("c_a");
    if (named && name == "healthy") {
      a.mode = std::get<BasicFma>(healthy_masking_attack(net, a.t_start).mode);
    } else if (named && name == "zero") {
      a.mode = BasicFma{};
    } else if (named) {
      s.fail("c_a", "must be \"healthy\", \"zero\" or {magnitude, angle_deg}");
    } else {
      a.mode = BasicFma{ThreePhaseSet::uniform(polar_from(s.child("c_a")))};
    }
  } else if (mode == "stealthy") {
    a.mode = StealthyFma{s.require<double>("x"), s.get("r_f", 0.0)};
  } else {
    s.fail("mode", "must be none, basic or stealthy");
  }
  s.finish();
  return a;
}

DistortionSpec parse_distortion(Section s) {
  DistortionSpec d;
  if (s.has("snr_db")) d.snr_db = s.get<double>("snr_db", 0.0);
  s.is_null("snr_db");
  if (s.has("ct_saturation")) {
    Section c = s.child("ct_saturation");
    CtSaturation ct;
    ct.mag_scale = c.get("mag_scale", ct.mag_scale);
    ct.angle_advance_rad = deg_to_rad(c.get("angle_advance_deg", 0.0));
    ct.knee_ka = c.get("knee_ka", ct.knee_ka);
    c.finish();
    d.ct_saturation = ct;
  }
  s.finish();
  return d;
}

PipelineConfig parse_pipeline_parts(Section& root, const Network& net, bool allow_model,
                                    const fs::path& base_dir,
                                    std::optional<fs::path>* model_path) {
  PipelineConfig cfg = make_pipeline_config(net);
  if (root.has("relay")) {
    Section r = root.child("relay");
    cfg.relay.i_d0 = r.get("i_d0", cfg.relay.i_d0);
    cfg.relay.i_b = r.get("i_b", cfg.relay.i_b);
    cfg.relay.k1 = r.get("k1", cfg.relay.k1);
    cfg.relay.k2 = r.get("k2", cfg.relay.k2);
    r.finish();
  }
  if (root.has("mi")) {
    Section m = root.child("mi");
    cfg.mi.f = m.get("f", cfg.mi.f);
    cfg.mi.t1 = m.get("t1", cfg.mi.t1);
    cfg.mi.t2 = m.get("t2", cfg.mi.t2);
    if (m.has("i_d_n") && !m.raw("i_d_n").is_string()) {
      cfg.mi.i_d_n = polar_from(m.child("i_d_n"));
    } else if (m.has("i_d_n") && m.raw("i_d_n") != "healthy") {
      m.fail("i_d_n", "must be \"healthy\" or {magnitude, angle_deg}");
    }
    cfg.mi.eps_ang = m.get("eps_ang", cfg.mi.eps_ang);
    cfg.mi.eps_mag = m.get("eps_mag", cfg.mi.eps_mag);
    m.finish();
  }
  if (root.has("pipeline")) {
    Section p = root.child("pipeline");
    const auto action = p.get<std::string>("alarm_action", "trip_direct");
    if (action == "trip_direct") cfg.action = AlarmAction::TripDirect;
    else if (action == "alarm_only") cfg.action = AlarmAction::AlarmOnly;
    else p.fail("alarm_action", "must be trip_direct or alarm_only");
    cfg.zcc_threshold = p.get("zcc_threshold", cfg.zcc_threshold);
    cfg.hold_off_samples = p.get("hold_off_samples", cfg.hold_off_samples);
    cfg.snapshot_frames = p.get("snapshot_frames", cfg.snapshot_frames);
    cfg.degenerate_burst_limit = p.get("degenerate_burst_limit", cfg.degenerate_burst_limit);
    if (allow_model && p.has("model")) {
      *model_path = base_dir / p.get<std::string>("model", "");
    } else if (allow_model) {
      p.is_null("model");
    }
    p.finish();
  }
  return cfg;
}

std::vector<double> number_list(Section& s, const char* key, std::vector<double> fallback) {
  return s.get(key, std::move(fallback));
}

std::vector<FaultKind> kind_list(Section& s, const char* key, std::vector<FaultKind> fallback) {
  if (!s.has(key)) return fallback;
  std::vector<FaultKind> out;
  for (const auto& name : s.get<std::vector<std::string>>(key, {})) {
    try {
      out.push_back(parse_fault_kind(name));
    } catch (const UnsupportedFault& e) {
      throw InvalidConfig(s.where(key) + ": " + e.what());
    }
  }
  return out;
}

SweepSpec parse_sweep(Section s, const Network& net) {
  SweepSpec sp;
  sp.network = net;
  sp.kinds = kind_list(s, "kinds", sp.kinds);
  sp.locations = number_list(s, "locations", sp.locations);
  sp.resistances = number_list(s, "resistances", sp.resistances);
  sp.per_cell = s.get("per_cell", sp.per_cell);
  sp.both_directions = s.get("both_directions", sp.both_directions);
  sp.external_kinds = kind_list(s, "external_kinds", sp.external_kinds);
  sp.external_locations = number_list(s, "external_locations", sp.external_locations);
  sp.external_resistances = number_list(s, "external_resistances", sp.external_resistances);
  sp.external_count = s.get("external_count", sp.external_count);
  sp.external_per_cell = s.get("external_per_cell", sp.external_per_cell);
  if (s.has("event_kinds")) {
    sp.event_kinds.clear();
    for (const auto& name : s.get<std::vector<std::string>>("event_kinds", {})) {
      sp.event_kinds.push_back(parse_disturbance_kind(name));
    }
  }
  sp.event_count = s.get("event_count", sp.event_count);
  if (s.has("snr_db")) {
    const auto r = s.get<std::vector<double>>("snr_db", {});
    if (r.size() != 2) s.fail("snr_db", "must be [low, high] or null");
    sp.snr_db = std::pair{r[0], r[1]};
  } else if (s.is_null("snr_db")) {
    sp.snr_db.reset();
  }
  sp.duration_s = s.get("duration_s", sp.duration_s);
  sp.t_inception = s.get("t_inception", sp.t_inception);
  s.finish();
  sp.validate();
  return sp;
}

TrainConfig parse_train(Section s, std::uint64_t root_seed) {
  TrainConfig t;
  t.hidden = s.get("hidden", t.hidden);
  t.l2_lambda = s.get("l2_lambda", t.l2_lambda);
  t.epochs = s.get("epochs", t.epochs);
  t.batch_size = s.get("batch_size", t.batch_size);
  t.learning_rate = s.get("learning_rate", t.learning_rate);
  t.lr_decay = s.get("lr_decay", t.lr_decay);
  t.beta1 = s.get("beta1", t.beta1);
  t.beta2 = s.get("beta2", t.beta2);
  t.adam_eps = s.get("adam_eps", t.adam_eps);
  if (s.has("class_weight")) {
    const auto w = s.get<std::vector<double>>("class_weight", {});
    if (w.size() != 2) s.fail("class_weight", "must be [negative, positive]");
    t.class_weight = {w[0], w[1]};
  }
  t.validation_fraction = s.get("validation_fraction", t.validation_fraction);
  t.k_folds = s.get("k_folds", t.k_folds);
  const auto sel = s.get<std::string>("selection", "weighted_error");
  if (sel == "weighted_error") t.selection = TrainConfig::Selection::WeightedError;
  else if (sel == "loss") t.selection = TrainConfig::Selection::Loss;
  else s.fail("selection", "must be weighted_error or loss");
  t.seed = derive_seed(root_seed, SeedStream::Training, 0);
  s.finish();
  t.validate();
  return t;
}

}  // namespace

SimulateConfig parse_simulate(const json& j, const fs::path& base_dir, std::uint64_t root_seed) {
  Section root(j, "config");
  root.is_null("seed");
  SimulateConfig out;
  const Network net = parse_network(root);
  ScenarioCase& c = out.scenario_case;
  c.id = "simulate";
  c.category = "simulate";
  c.scenario = parse_scenario(root.child("scenario"), net);
  const double t0 = c.scenario.first_disturbance().value_or(0.0);
  if (root.has("attack")) c.attack = parse_attack(root.child("attack"), net, t0);
  if (root.has("distortion")) c.distortion = parse_distortion(root.child("distortion"));
  c.label = c.scenario.fault && !std::holds_alternative<NoAttack>(c.attack.mode) ? 1 : 0;
  c.seed = derive_seed(root_seed, SeedStream::Noise, 0);
  out.pipeline = parse_pipeline_parts(root, net, true, base_dir, &out.model_path);
  out.pipeline.sample_rate_hz = c.scenario.sample_rate_hz;
  out.pipeline.system_frequency_hz = c.scenario.system_frequency_hz;
  root.finish();
  out.pipeline.validate();
  return out;
}

ExperimentConfig parse_experiment(const json& j, const fs::path& base_dir,
                                  std::uint64_t root_seed) {
  Section root(j, "config");
  root.is_null("seed");
  ExperimentConfig out;
  const Network net = parse_network(root);
  out.sweep = root.has("sweep") ? parse_sweep(root.child("sweep"), net) : SweepSpec{};
  out.sweep.network = net;
  out.split_ratio = root.get("split_ratio", out.split_ratio);
  if (!(out.split_ratio > 0.0 && out.split_ratio < 1.0)) {
    root.fail("split_ratio", "must lie in (0, 1)");
  }
  out.train = root.has("train") ? parse_train(root.child("train"), root_seed) : [&] {
    TrainConfig t;
    t.seed = derive_seed(root_seed, SeedStream::Training, 0);
    return t;
  }();
  out.kfold = root.get("kfold", out.kfold);
  out.pipeline = parse_pipeline_parts(root, net, false, base_dir, nullptr);
  if (root.has("suite")) {
    Section s = root.child("suite");
    out.suite_positives = s.get("positives", out.suite_positives);
    out.suite_negatives = s.get("negatives", out.suite_negatives);
    s.finish();
  }
  if (root.has("roc")) {
    Section s = root.child("roc");
    out.roc_f = s.get("f_values", out.roc_f);
    s.finish();
    if (out.roc_f.empty()) throw InvalidConfig("config.roc.f_values is empty");
  }
  if (root.has("dataset")) out.dataset_dir = base_dir / root.get<std::string>("dataset", "");
  if (root.has("model")) out.model_path = base_dir / root.get<std::string>("model", "");
  root.finish();
  out.pipeline.validate();
  return out;
}

}  // namespace maskguard::cli
