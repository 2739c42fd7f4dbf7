#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "minexp/cli.hpp"

namespace minexp {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw std::runtime_error("scenario: " + path + ": " + what);
}

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
}

void reject_unknown_keys(const json& obj, const std::string& path,
                         std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    bool ok = false;
    for (const char* k : allowed) {
      if (item.key() == k) {
        ok = true;
        break;
      }
    }
    if (!ok) fail(path + "." + item.key(), "unknown key");
  }
}

double get_number(const json& obj, const std::string& path,
                  const std::string& key) {
  if (!obj.contains(key)) fail(path + "." + key, "missing required number");
  if (!obj[key].is_number()) fail(path + "." + key, "expected a number");
  return obj[key].get<double>();
}

double get_number_or(const json& obj, const std::string& path,
                     const std::string& key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) fail(path + "." + key, "expected a number");
  return obj[key].get<double>();
}

std::array<double, 2> get_vec2(const json& obj, const std::string& path,
                               const std::string& key) {
  const std::string p = path + "." + key;
  if (!obj.contains(key)) fail(p, "missing required [x1, x2] pair");
  const json& v = obj[key];
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() ||
      !v[1].is_number()) {
    fail(p, "expected an array of two numbers");
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

int get_int(const json& obj, const std::string& path, const std::string& key) {
  if (!obj[key].is_number_integer()) fail(path + "." + key, "expected an integer");
  return obj[key].get<int>();
}

}  // namespace

void ScenarioFile::apply(TrainConfig& config) const {
  if (train.collocation) config.collocation = *train.collocation;
  if (train.max_epochs) config.max_epochs = *train.max_epochs;
  if (train.learning_rate) config.learning_rate = *train.learning_rate;
  if (train.lr_decay_factor) config.lr_decay_factor = *train.lr_decay_factor;
  if (train.lr_decay_epoch) config.lr_decay_epoch = *train.lr_decay_epoch;
  if (train.anneal_alpha) config.anneal_alpha = *train.anneal_alpha;
  if (train.anneal_every) config.anneal_every = *train.anneal_every;
  if (train.anneal_start) config.anneal_start = *train.anneal_start;
  if (train.stop_threshold) config.stop_thresholds.fill(*train.stop_threshold);
  if (train.use_stop_criteria) config.use_stop_criteria = *train.use_stop_criteria;
  if (train.conditioned_initial_states) {
    config.conditioned_initial_states = *train.conditioned_initial_states;
  }
}

ScenarioFile parse_scenario_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("scenario: invalid JSON: ") +
                             e.what());
  }
  require_object(root, "$");
  reject_unknown_keys(root, "$",
                      {"workspace_half_width", "speed", "lambda", "start",
                       "goal", "seed", "field", "train"});

  ScenarioFile file;
  Scenario& s = file.scenario;
  s.workspace_half_width = get_number_or(root, "$", "workspace_half_width", 15.0);
  s.speed = get_number_or(root, "$", "speed", 10.0);
  s.lambda_bolza = get_number_or(root, "$", "lambda", 0.0);
  s.start = get_vec2(root, "$", "start");
  s.goal = get_vec2(root, "$", "goal");

  if (root.contains("seed")) {
    if (!root["seed"].is_number_unsigned()) {
      fail("$.seed", "expected a non-negative integer");
    }
    file.seed = root["seed"].get<std::uint64_t>();
  }

  if (!root.contains("field")) fail("$.field", "missing required object");
  const json& jf = root["field"];
  require_object(jf, "$.field");
  reject_unknown_keys(jf, "$.field", {"amplitude", "offset", "mode", "bases"});
  const double amplitude = get_number_or(jf, "$.field", "amplitude", 5.0);
  const double offset = get_number_or(jf, "$.field", "offset", 1.0);

  TemporalMode mode = TemporalMode::kStatic;
  if (jf.contains("mode")) {
    if (!jf["mode"].is_string()) fail("$.field.mode", "expected a string");
    const std::string m = jf["mode"].get<std::string>();
    if (m == "static") {
      mode = TemporalMode::kStatic;
    } else if (m == "cosine") {
      mode = TemporalMode::kCosine;
    } else {
      fail("$.field.mode", "expected \"static\" or \"cosine\", got \"" + m + "\"");
    }
  }

  if (!jf.contains("bases") || !jf["bases"].is_array() || jf["bases"].empty()) {
    fail("$.field.bases", "expected a non-empty array");
  }
  std::vector<RadialBasis> bases;
  int i = 0;
  for (const json& jb : jf["bases"]) {
    const std::string bp = "$.field.bases[" + std::to_string(i++) + "]";
    require_object(jb, bp);
    reject_unknown_keys(jb, bp, {"peak", "center", "shape"});
    RadialBasis b;
    b.peak = get_number(jb, bp, "peak");
    if (!(b.peak > 0.0)) fail(bp + ".peak", "must be positive");
    b.center = get_vec2(jb, bp, "center");
    if (!jb.contains("shape") || !jb["shape"].is_array() ||
        jb["shape"].size() != 3 || !jb["shape"][0].is_number() ||
        !jb["shape"][1].is_number() || !jb["shape"][2].is_number()) {
      fail(bp + ".shape", "expected [lam11, lam12, lam22]");
    }
    b.lam11 = jb["shape"][0].get<double>();
    b.lam12 = jb["shape"][1].get<double>();
    b.lam22 = jb["shape"][2].get<double>();
    bases.push_back(b);
  }

  try {
    s.field = ThreatField(std::move(bases), amplitude, offset, mode,
                          s.workspace_half_width);
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("scenario: ") + e.what());
  }

  if (root.contains("train")) {
    const json& jt = root["train"];
    require_object(jt, "$.train");
    reject_unknown_keys(
        jt, "$.train",
        {"collocation", "max_epochs", "learning_rate", "lr_decay_factor",
         "lr_decay_epoch", "anneal_alpha", "anneal_every", "anneal_start",
         "stop_threshold", "use_stop_criteria", "conditioned_initial_states"});
    ScenarioFile::TrainOverrides& o = file.train;
    if (jt.contains("collocation")) o.collocation = get_int(jt, "$.train", "collocation");
    if (jt.contains("max_epochs")) o.max_epochs = get_int(jt, "$.train", "max_epochs");
    if (jt.contains("learning_rate")) {
      o.learning_rate = get_number(jt, "$.train", "learning_rate");
    }
    if (jt.contains("lr_decay_factor")) {
      o.lr_decay_factor = get_number(jt, "$.train", "lr_decay_factor");
    }
    if (jt.contains("lr_decay_epoch")) {
      o.lr_decay_epoch = get_int(jt, "$.train", "lr_decay_epoch");
    }
    if (jt.contains("anneal_alpha")) {
      o.anneal_alpha = get_number(jt, "$.train", "anneal_alpha");
    }
    if (jt.contains("anneal_every")) {
      o.anneal_every = get_int(jt, "$.train", "anneal_every");
    }
    if (jt.contains("anneal_start")) {
      o.anneal_start = get_int(jt, "$.train", "anneal_start");
    }
    if (jt.contains("stop_threshold")) {
      o.stop_threshold = get_number(jt, "$.train", "stop_threshold");
    }
    if (jt.contains("use_stop_criteria")) {
      if (!jt["use_stop_criteria"].is_boolean()) {
        fail("$.train.use_stop_criteria", "expected a boolean");
      }
      o.use_stop_criteria = jt["use_stop_criteria"].get<bool>();
    }
    if (jt.contains("conditioned_initial_states")) {
      o.conditioned_initial_states =
          get_int(jt, "$.train", "conditioned_initial_states");
    }
  }
  return file;
}

ScenarioFile load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("scenario: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario_json(ss.str());
}

}  // namespace minexp
