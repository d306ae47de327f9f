#include "mdplab/cli.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "mdplab/array_models.hpp"
#include "mdplab/conditions.hpp"
#include "mdplab/dependence.hpp"
#include "mdplab/json_util.hpp"
#include "mdplab/mc_engine.hpp"
#include "mdplab/parallel.hpp"
#include "mdplab/paths_rates.hpp"
#include "mdplab/rng.hpp"
#include "mdplab/speed.hpp"

namespace mdplab {

using nlohmann::json;
namespace fs = std::filesystem;

Task parse_task(const std::string& tag) {
  if (tag == "check") return Task::check;
  if (tag == "simulate") return Task::simulate;
  if (tag == "blocks") return Task::blocks;
  if (tag == "rate") return Task::rate;
  throw std::invalid_argument("unknown task '" + tag + "'");
}

std::string to_string(Task t) {
  switch (t) {
    case Task::check: return "check";
    case Task::simulate: return "simulate";
    case Task::blocks: return "blocks";
    case Task::rate: return "rate";
  }
  return "?";
}

namespace {

std::string describe(const std::vector<ConfigViolation>& v) {
  std::string s = "invalid config:";
  for (const auto& x : v) s += "\n  " + (x.pointer.empty() ? std::string("/") : x.pointer) + ": " + x.message;
  return s;
}

std::string hex64(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

// Parses with a callback that records keys repeated within one object.
// nlohmann keeps the last occurrence.
json parse_tracking_duplicates(const std::string& text, std::vector<std::string>& warnings) {
  std::vector<std::set<std::string>> seen;
  auto cb = [&](int depth, json::parse_event_t event, json& parsed) {
    switch (event) {
      case json::parse_event_t::object_start: seen.emplace_back(); break;
      case json::parse_event_t::object_end:
        if (!seen.empty()) seen.pop_back();
        break;
      case json::parse_event_t::key: {
        const std::string key = parsed.get<std::string>();
        if (!seen.empty() && !seen.back().insert(key).second)
          warnings.push_back("duplicate key '" + key + "' at depth " + std::to_string(depth) +
                             "; the last occurrence wins");
        break;
      }
      default: break;
    }
    return true;
  };
  return json::parse(text, cb);
}

bool is_positive_int_array(const json& j) {
  if (!j.is_array() || j.empty()) return false;
  for (const auto& x : j)
    if (!x.is_number_integer() || x.get<long long>() < 1) return false;
  return true;
}

template <class F>
void attempt(std::vector<ConfigViolation>& v, const std::string& pointer, F&& f) {
  try {
    f();
  } catch (const std::exception& e) {
    v.push_back({pointer, e.what()});
  }
}

void validate_check_section(const json& section, std::vector<ConfigViolation>& v) {
  if (!section.contains("conditions")) return;
  const json& list = section.at("conditions");
  if (!list.is_array()) {
    v.push_back({"/check/conditions", "must be an array"});
    return;
  }
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string ptr = "/check/conditions/" + std::to_string(i);
    const json& c = list[i];
    if (!c.is_object() || !c.contains("kind") || !c.at("kind").is_string()) {
      v.push_back({ptr, "each condition needs a string \"kind\""});
      continue;
    }
    const std::string kind = c.at("kind").get<std::string>();
    if (kind == "sufficient") {
      attempt(v, ptr + "/route", [&] { parse_route(c.value("route", std::string("moment_envelope"))); });
    } else if (kind == "necessity") {
      if (!c.contains("t") || !c.at("t").is_number()) v.push_back({ptr + "/t", "required number"});
    } else if (kind == "equivalence") {
      if (c.contains("beta") && !(c.at("beta").is_number() && c.at("beta").get<double>() > 0.0))
        v.push_back({ptr + "/beta", "must be a positive number"});
    } else if (kind != "onecondm") {
      attempt(v, ptr, [&] { CoreSpec::from_json(c); });
    }
  }
}

void validate_simulate_section(const json& s, std::vector<ConfigViolation>& v) {
  if (!s.contains("t_grid") || !s.at("t_grid").is_array() || s.at("t_grid").empty()) {
    v.push_back({"/simulate/t_grid", "required nonempty array of numbers"});
  } else {
    for (std::size_t i = 0; i < s.at("t_grid").size(); ++i)
      if (!s.at("t_grid")[i].is_number()) v.push_back({"/simulate/t_grid/" + std::to_string(i), "must be a number"});
  }
  if (s.contains("method")) attempt(v, "/simulate/method", [&] { parse_curve_method(s.at("method").get<std::string>()); });
  if (s.contains("event")) {
    const json& e = s.at("event");
    attempt(v, "/simulate/event", [&] {
      const auto kind = PathEvent::parse_kind(e.at("kind").get<std::string>());
      if (kind == PathEvent::Kind::increment) {
        const double t1 = e.at("t1").get<double>(), t2 = e.at("t2").get<double>();
        if (!(t1 >= 0.0 && t1 < t2 && t2 <= 1.0)) throw std::invalid_argument("need 0 <= t1 < t2 <= 1");
      }
    });
  }
  if (s.contains("mc")) attempt(v, "/simulate/mc", [&] { MCConfig::from_json(s.at("mc"), 0); });
}

json chain_spec_of(const ExperimentConfig& cfg) {
  if (cfg.params.contains("chain")) return cfg.params.at("chain");
  if (cfg.model.is_object() && cfg.model.contains("params") && cfg.model.at("params").contains("chain"))
    return cfg.model.at("params").at("chain");
  return nullptr;
}

FiniteMarkovChain chain_from(const json& c) {
  auto values = c.at("values").get<std::vector<double>>();
  auto transition = c.at("transition").get<std::vector<std::vector<double>>>();
  if (c.value("center", false)) return FiniteMarkovChain::centered(std::move(values), std::move(transition));
  return {std::move(values), std::move(transition)};
}

ExperimentConfig validate(json doc, std::vector<std::string> warnings, std::optional<Task> task_override,
                          std::optional<std::uint64_t> seed_override, const fs::path& base) {
  std::vector<ConfigViolation> v;
  ExperimentConfig cfg;
  cfg.warnings = std::move(warnings);
  if (!doc.is_object()) throw ConfigError(std::vector<ConfigViolation>{{"", "config must be a JSON object"}});

  // A bare path document for the rate task.
  if (doc.contains("knots") && (!task_override || *task_override == Task::rate)) {
    cfg.task = Task::rate;
    cfg.params = {{"path", doc}};
    cfg.seed = seed_override.value_or(doc.value("seed", 0ULL));
    cfg.document = doc;
    attempt(v, "", [&] { PiecewisePath::from_json(doc); });
    if (!v.empty()) throw ConfigError(v);
    return cfg;
  }

  std::optional<Task> doc_task;
  if (doc.contains("task")) {
    if (!doc.at("task").is_string()) v.push_back({"/task", "must be a string"});
    else attempt(v, "/task", [&] { doc_task = parse_task(doc.at("task").get<std::string>()); });
  }
  if (task_override && doc_task && *task_override != *doc_task)
    v.push_back({"/task", "config is for '" + to_string(*doc_task) + "' but the command is '" +
                              to_string(*task_override) + "'"});
  if (task_override) cfg.task = *task_override;
  else if (doc_task) cfg.task = *doc_task;
  else v.push_back({"/task", "required (or give it as the subcommand)"});

  if (seed_override) {
    cfg.seed = *seed_override;
  } else if (!doc.contains("seed")) {
    v.push_back({"/seed", "required; runs are never seeded from the clock"});
  } else if (!doc.at("seed").is_number_unsigned()) {
    v.push_back({"/seed", "must be a nonnegative integer"});
  } else {
    cfg.seed = doc.at("seed").get<std::uint64_t>();
  }

  if (doc.contains("output")) {
    if (doc.at("output").is_string()) cfg.output = doc.at("output").get<std::string>();
    else v.push_back({"/output", "must be a string"});
  }

  const std::string section = to_string(cfg.task);
  if (doc.contains(section)) {
    if (doc.at(section).is_object()) cfg.params = doc.at(section);
    else v.push_back({"/" + section, "must be an object"});
  }

  const bool needs_model = cfg.task == Task::check || cfg.task == Task::simulate;
  const bool needs_grid = cfg.task != Task::rate;

  if (doc.contains("model")) {
    if (!doc.at("model").is_object()) v.push_back({"/model", "must be an object"});
    else if (!doc.at("model").contains("family") || !doc.at("model").at("family").is_string())
      v.push_back({"/model/family", "required string"});
    else cfg.model = doc.at("model");
  } else if (needs_model) {
    v.push_back({"/model", "required"});
  }

  if (doc.contains("speed")) {
    if (doc.at("speed").is_object()) {
      cfg.speed = doc.at("speed");
      attempt(v, "/speed", [&] { SpeedSequence::from_json(cfg.speed); });
    } else {
      v.push_back({"/speed", "must be an object"});
    }
  } else if (needs_grid) {
    v.push_back({"/speed", "required"});
  }

  if (doc.contains("n_grid")) {
    if (is_positive_int_array(doc.at("n_grid"))) cfg.n_grid = doc.at("n_grid").get<std::vector<long long>>();
    else v.push_back({"/n_grid", "must be a nonempty array of positive integers"});
  } else if (needs_grid) {
    v.push_back({"/n_grid", "required"});
  }

  switch (cfg.task) {
    case Task::check: validate_check_section(cfg.params, v); break;
    case Task::simulate: validate_simulate_section(cfg.params, v); break;
    case Task::blocks: {
      const json chain = chain_spec_of(cfg);
      if (chain.is_null()) v.push_back({"/blocks/chain", "required unless the model carries a chain"});
      else attempt(v, cfg.params.contains("chain") ? "/blocks/chain" : "/model/params/chain", [&] { chain_from(chain); });
      if (cfg.params.contains("epsilon") && !cfg.params.at("epsilon").is_number())
        v.push_back({"/blocks/epsilon", "must be a number"});
      if (cfg.params.contains("replicas") && !(cfg.params.at("replicas").is_number_integer() &&
                                               cfg.params.at("replicas").get<long long>() >= 2))
        v.push_back({"/blocks/replicas", "must be an integer >= 2"});
      break;
    }
    case Task::rate: {
      json path = cfg.params.value("path", doc.value("path", json()));
      if (path.is_string()) {
        const fs::path file = base / path.get<std::string>();
        std::ifstream in(file);
        if (!in) {
          v.push_back({"/path", "cannot read " + file.string()});
          break;
        }
        std::stringstream ss;
        ss << in.rdbuf();
        attempt(v, "/path", [&] { path = json::parse(ss.str()); });
      }
      if (path.is_null()) v.push_back({"/path", "required (object or file name)"});
      else attempt(v, "/path", [&] { PiecewisePath::from_json(path); });
      cfg.params["path"] = path;
      break;
    }
  }

  if (v.empty() && !cfg.model.is_null()) {
    cfg.model["speed"] = cfg.speed;
    cfg.model["n_grid"] = cfg.n_grid;
    attempt(v, "/model", [&] {
      const TriangularArrayModel m = build_model(cfg.model);
      cfg.model = m.spec();
    });
  }
  if (v.empty() && !cfg.speed.is_null())
    attempt(v, "/speed", [&] { SpeedSequence::from_json(cfg.speed).validate(cfg.n_grid); });

  if (!v.empty()) throw ConfigError(v);
  cfg.document = std::move(doc);
  return cfg;
}

}  // namespace

ConfigError::ConfigError(std::vector<ConfigViolation> v) : std::runtime_error(describe(v)), violations_(std::move(v)) {}

std::string ExperimentConfig::digest() const { return hex64(fnv1a(document.dump())); }

ExperimentConfig parse_config(const std::string& text, std::optional<Task> task, std::optional<std::uint64_t> seed) {
  std::vector<std::string> warnings;
  json doc;
  try {
    doc = parse_tracking_duplicates(text, warnings);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::vector<ConfigViolation>{{"", std::string("not valid JSON: ") + e.what()}});
  }
  return validate(std::move(doc), std::move(warnings), task, seed, fs::current_path());
}

ExperimentConfig load_config(const fs::path& path, std::optional<Task> task, std::optional<std::uint64_t> seed) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  std::vector<std::string> warnings;
  json doc;
  try {
    doc = parse_tracking_duplicates(ss.str(), warnings);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::vector<ConfigViolation>{{"", std::string("not valid JSON: ") + e.what()}});
  }
  return validate(std::move(doc), std::move(warnings), task, seed, path.parent_path());
}

// ------------------------------------------------------------------ tasks

namespace {

json header(const ExperimentConfig& cfg) {
  return {{"task", to_string(cfg.task)},
          {"version", kVersion},
          {"seed", cfg.seed},
          {"config_digest", cfg.digest()}};
}

void add_condition_rows(const ConditionReport& r, TaskResult& out) {
  for (std::size_t i = 0; i < r.n_grid.size(); ++i)
    out.csv_rows.push_back({r.condition_id, std::to_string(r.n_grid[i]), format_real(r.diagnostics[i]),
                            to_string(r.verdict)});
  for (const auto& part : r.parts) add_condition_rows(part, out);
}

void note_failure(const ConditionReport& r, TaskResult& out) {
  if (r.verdict != Verdict::fail) return;
  out.failed = true;
  out.failures.push_back(json{{"condition", r.condition_id}, {"verdict", "fail"}, {"reason", r.reason}}.dump());
}

TaskResult run_check(const ExperimentConfig& cfg) {
  TaskResult out;
  out.csv_header = "condition,n,diagnostic,verdict";
  const TriangularArrayModel model = build_model(cfg.model);
  const SpeedSequence a = SpeedSequence::from_json(cfg.speed);
  json conditions = cfg.params.value("conditions", json::array({{{"kind", "lindeberg"}, {"epsilon", 1.0}}}));
  json results = json::array();
  for (const json& c : conditions) {
    const std::string kind = c.at("kind").get<std::string>();
    if (kind == "sufficient") {
      std::optional<double> bound;
      if (c.contains("c")) bound = c.at("c").get<double>();
      const auto r = check_sufficient(model, a, parse_route(c.value("route", std::string("moment_envelope"))), bound);
      results.push_back(r.to_json());
      add_condition_rows(r, out);
      note_failure(r, out);
    } else if (kind == "onecondm") {
      const auto r = check_onecondm(model, a, build_regularity(model, a));
      results.push_back(r.to_json());
      add_condition_rows(r, out);
      note_failure(r, out);
    } else if (kind == "necessity") {
      const auto r = exp_counterexample_necessity(model, a, c.at("t").get<double>());
      json j = r.to_json();
      j["condition_id"] = "necessity";
      results.push_back(j);
      for (std::size_t i = 0; i < r.n_grid.size(); ++i)
        out.csv_rows.push_back({"necessity", std::to_string(r.n_grid[i]), format_real(r.values[i]),
                                r.necessity_violated ? "flagged" : "clear"});
    } else if (kind == "equivalence") {
      const double beta = c.value("beta", 1.0);
      const auto r = comment1_equivalence(model, a, beta);
      results.push_back({{"condition_id", "comment1_equivalence"},
                         {"beta", beta},
                         {"n_grid", r.n_grid},
                         {"log_c1_grid", json_reals(r.log_c1_grid)},
                         {"log_c1_upper", json_reals(r.log_c1_upper)},
                         {"log_banded", json_reals(r.log_banded)},
                         {"log_banded_half", json_reals(r.log_banded_half)},
                         {"forward", r.forward},
                         {"backward", r.backward}});
      const std::string verdict = r.forward && r.backward ? "consistent" : "inconsistent";
      for (std::size_t i = 0; i < r.n_grid.size(); ++i)
        out.csv_rows.push_back({"comment1_equivalence", std::to_string(r.n_grid[i]), format_real(r.log_c1_grid[i]),
                                verdict});
      if (!(r.forward && r.backward)) {
        out.failed = true;
        out.failures.push_back(
            json{{"condition", "comment1_equivalence"}, {"verdict", "fail"}, {"reason", "directions disagree"}}.dump());
      }
    } else {
      const auto r = check_core(model, a, CoreSpec::from_json(c));
      results.push_back(r.to_json());
      add_condition_rows(r, out);
      note_failure(r, out);
    }
  }
  out.report = header(cfg);
  out.report["model"] = model.spec();
  out.report["results"] = results;
  return out;
}

TaskResult run_simulate(const ExperimentConfig& cfg) {
  TaskResult out;
  out.csv_header = "n,a_n,t,method,p_hat,se,log_scaled,rate,gap";
  const TriangularArrayModel model = build_model(cfg.model);
  const SpeedSequence a = SpeedSequence::from_json(cfg.speed);
  const auto t_grid = cfg.params.at("t_grid").get<std::vector<double>>();
  const MCConfig mc = MCConfig::from_json(cfg.params.value("mc", json::object()), cfg.seed);
  const CurveMethod method = parse_curve_method(cfg.params.value("method", std::string("auto")));
  PathEvent::Kind kind = PathEvent::Kind::endpoint;
  double t1 = 0.0, t2 = 1.0;
  if (cfg.params.contains("event")) {
    const json& e = cfg.params.at("event");
    kind = PathEvent::parse_kind(e.at("kind").get<std::string>());
    t1 = e.value("t1", 0.0);
    t2 = e.value("t2", 1.0);
  }
  const auto rows = mdp_curve(model, a, t_grid, model.n_grid(), mc, method, kind, t1, t2);
  json table = json::array();
  for (const auto& r : rows) {
    table.push_back({{"n", r.n},
                     {"a_n", json_real(r.a_n)},
                     {"t", json_real(r.t)},
                     {"estimate", r.estimate.to_json()},
                     {"rate", json_real(r.rate)},
                     {"gap", json_real(r.gap)}});
    out.csv_rows.push_back({std::to_string(r.n), format_real(r.a_n), format_real(r.t), to_string(r.estimate.method),
                            format_real(r.estimate.p_hat), format_real(r.estimate.se),
                            format_real(r.estimate.log_scaled), format_real(r.rate), format_real(r.gap)});
  }
  out.report = header(cfg);
  out.report["model"] = model.spec();
  out.report["mc"] = {{"per_batch", mc.per_batch}, {"batches", mc.batches}, {"z", mc.z}};
  out.report["event"] = {{"kind", kind == PathEvent::Kind::endpoint ? "endpoint"
                                  : kind == PathEvent::Kind::sup    ? "sup"
                                                                    : "increment"},
                         {"t1", t1},
                         {"t2", t2}};
  out.report["rows"] = table;
  return out;
}

TaskResult run_blocks(const ExperimentConfig& cfg) {
  TaskResult out;
  out.csv_header = "n,a_n,p,q,k,epsilon,max_abs_remainder,mean_abs_diff,se_abs_diff,bound,max_abs_corr";
  const FiniteMarkovChain chain = chain_from(chain_spec_of(cfg));
  const SpeedSequence a = SpeedSequence::from_json(cfg.speed);
  std::optional<double> eps;
  if (cfg.params.contains("epsilon")) eps = cfg.params.at("epsilon").get<double>();
  const long long replicas = cfg.params.value("replicas", 200LL);
  const auto t_grid = cfg.params.value("t_grid", std::vector<double>{0.25, 0.5, 0.75, 1.0});
  json rows = json::array();
  for (long long n : cfg.n_grid) {
    const double an = a(n);
    const BlockScheme scheme = plan_blocks(n, an, eps);
    const auto series = sample_chain(chain, n, derive_key(cfg.seed, {static_cast<std::uint64_t>(n), 0}));
    const BlockSums sums = block_sums(series, scheme, t_grid);
    double max_rem = 0.0;
    for (double r : sums.remainder) max_rem = std::max(max_rem, std::abs(r));
    const CouplingReport cr =
        couple_blocks(chain, scheme, replicas, derive_key(cfg.seed, {static_cast<std::uint64_t>(n), 1}));
    rows.push_back({{"n", n},
                    {"a_n", json_real(an)},
                    {"p", scheme.p},
                    {"q", scheme.q},
                    {"k", scheme.k},
                    {"epsilon", json_real(scheme.epsilon)},
                    {"constraints",
                     {{"epsilon", json_real(scheme.constraint_eps)},
                      {"growth", json_real(scheme.constraint_growth)},
                      {"log", json_real(scheme.constraint_log)}}},
                    {"t_grid", t_grid},
                    {"remainder", json_reals(sums.remainder)},
                    {"coupling",
                     {{"replicas", cr.replicas},
                      {"mean_abs_diff", json_real(cr.mean_abs_diff)},
                      {"se_abs_diff", json_real(cr.se_abs_diff)},
                      {"coupled_fraction", json_real(cr.coupled_fraction)},
                      {"rho_hat", json_real(cr.rho_hat)},
                      {"bound", json_real(cr.bound)},
                      {"bound_exact", json_real(cr.bound_exact)},
                      {"max_abs_corr", json_real(cr.max_abs_corr)},
                      {"corr_threshold", json_real(cr.corr_threshold)}}}});
    out.csv_rows.push_back({std::to_string(n), format_real(an), std::to_string(scheme.p), std::to_string(scheme.q),
                            std::to_string(scheme.k), format_real(scheme.epsilon), format_real(max_rem),
                            format_real(cr.mean_abs_diff), format_real(cr.se_abs_diff), format_real(cr.bound),
                            format_real(cr.max_abs_corr)});
  }
  out.report = header(cfg);
  out.report["chain"] = {{"values", std::vector<double>(chain.values().begin(), chain.values().end())},
                         {"transition", chain.transition()}};
  out.report["rows"] = rows;
  return out;
}

TaskResult run_rate(const ExperimentConfig& cfg) {
  TaskResult out;
  out.csv_header = "quantity,value";
  const PiecewisePath path = PiecewisePath::from_json(cfg.params.at("path"));
  const double rate = rate_I(path);
  out.report = header(cfg);
  out.report["path"] = path.to_json();
  out.report["rate"] = json_real(rate);
  out.csv_rows.push_back({"rate_I", format_real(rate)});
  out.stdout_text = format_real(rate) + "\n";
  if (cfg.params.contains("events")) {
    const int grid = cfg.params.value("grid_size", 256);
    json events = json::array();
    for (const json& e : cfg.params.at("events")) {
      const EventInfimum inf = rate_event_infimum(PathEvent::from_json(e), grid);
      events.push_back({{"event", e}, {"closed_form", json_real(inf.closed_form)}, {"grid_value", json_real(inf.grid_value)}});
      out.csv_rows.push_back({"inf_" + e.at("kind").get<std::string>(), format_real(inf.closed_form)});
    }
    out.report["events"] = events;
  }
  return out;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << text;
  f.close();
  if (!f) throw std::runtime_error("write failed for " + p.string());
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

}  // namespace

TaskResult run_task(const ExperimentConfig& cfg) {
  switch (cfg.task) {
    case Task::check: return run_check(cfg);
    case Task::simulate: return run_simulate(cfg);
    case Task::blocks: return run_blocks(cfg);
    case Task::rate: return run_rate(cfg);
  }
  throw std::logic_error("unreachable");
}

json RunManifest::to_json() const {
  return {{"config_digest", config_digest}, {"version", version}, {"seed", seed},
          {"started", started},             {"finished", finished}, {"outputs", outputs}};
}

std::vector<fs::path> write_report(const TaskResult& result, RunManifest manifest, const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create " + out_dir.string() + ": " + ec.message());
  const fs::path report = out_dir / "report.json";
  const fs::path csv = out_dir / "report.csv";
  const fs::path man = out_dir / "manifest.json";
  write_file(report, result.report.dump(2) + "\n");
  std::string table = result.csv_header + "\n";
  for (const auto& row : result.csv_rows) {
    for (std::size_t i = 0; i < row.size(); ++i) table += (i ? "," : "") + csv_cell(row[i]);
    table += "\n";
  }
  write_file(csv, table);
  manifest.outputs = {report.filename().string(), csv.filename().string()};
  if (manifest.finished.empty()) manifest.finished = utc_now();
  write_file(man, manifest.to_json().dump(2) + "\n");
  return {report, csv, man};
}

// ------------------------------------------------------------------ argv

int run_command(const std::vector<std::string>& args) {
  CLI::App app{"mdplab: moderate deviations for triangular arrays", "mdplab"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  std::uint64_t seed_value = 0;
  int thread_value = 0;
  for (const char* name : {"check", "simulate", "blocks", "rate"}) {
    CLI::App* sub = app.add_subcommand(name, std::string("run the ") + name + " task");
    sub->add_option("--config", config_path, "experiment config (JSON)")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed_value, "master seed (overrides the config)");
    sub->add_option("--threads", thread_value, "worker threads (default: $MDPLAB_THREADS)")->check(CLI::PositiveNumber);
  }
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n" << app.help();
    return 2;
  }
  const CLI::App* sub = app.get_subcommands().front();
  const Task task = parse_task(sub->get_name());
  std::optional<std::uint64_t> seed;
  if (sub->count("--seed") > 0) seed = seed_value;
  std::optional<int> threads_opt;
  if (sub->count("--threads") > 0) threads_opt = thread_value;

  try {
    if (threads_opt) {
      set_threads(*threads_opt);
    } else if (const char* env = std::getenv("MDPLAB_THREADS"); env && *env) {
      int n = 0;
      try {
        std::size_t used = 0;
        n = std::stoi(env, &used);
        if (used != std::string(env).size()) n = 0;
      } catch (const std::exception&) {
        n = 0;
      }
      if (n < 1) {
        std::cerr << "error: MDPLAB_THREADS must be a positive integer\n";
        return 2;
      }
      set_threads(n);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  ExperimentConfig cfg;
  try {
    cfg = load_config(config_path, task, seed);
  } catch (const ConfigError& e) {
    for (const auto& v : e.violations())
      std::cerr << "error: " << (v.pointer.empty() ? "/" : v.pointer) << ": " << v.message << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  for (const auto& w : cfg.warnings) std::cerr << "warning: " << w << "\n";

  RunManifest manifest;
  manifest.config_digest = cfg.digest();
  manifest.seed = cfg.seed;
  manifest.started = utc_now();
  try {
    const TaskResult result = run_task(cfg);
    std::cout << result.stdout_text;
    fs::path dir = !out_dir.empty() ? fs::path(out_dir) : cfg.output;
    if (dir.empty() && task != Task::rate) dir = "mdplab-out";
    if (!dir.empty()) write_report(result, manifest, dir);
    for (const auto& f : result.failures) std::cerr << f << "\n";
    return result.failed ? 1 : 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

int run_command(int argc, const char* const* argv) {
  return run_command(std::vector<std::string>(argv, argv + argc));
}

}  // namespace mdplab
