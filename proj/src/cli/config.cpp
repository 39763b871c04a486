#include "catpool/cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "catpool/errors.hpp"

namespace catpool::cli {
namespace {

using nlohmann::json;

void reject_unknown(const json& node, const std::string& where, std::initializer_list<const char*> keys) {
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [key, _] : node.items()) {
    if (!allowed.count(key)) throw ConfigError(where.empty() ? key : where + "." + key, "unknown key");
  }
}

const json& require_object(const json& node, const std::string& field) {
  if (!node.is_object()) throw ConfigError(field, "expected an object");
  return node;
}

double as_number(const json& node, const std::string& field) {
  if (!node.is_number()) throw ConfigError(field, "expected a number");
  return node.get<double>();
}

std::size_t as_count(const json& node, const std::string& field) {
  if (!node.is_number_integer() || node.get<long long>() < 0)
    throw ConfigError(field, "expected a nonnegative integer");
  return node.get<std::size_t>();
}

std::string as_string(const json& node, const std::string& field) {
  if (!node.is_string()) throw ConfigError(field, "expected a string");
  return node.get<std::string>();
}

bool as_bool(const json& node, const std::string& field) {
  if (!node.is_boolean()) throw ConfigError(field, "expected true or false");
  return node.get<bool>();
}

std::vector<double> as_numbers(const json& node, const std::string& field) {
  if (!node.is_array()) throw ConfigError(field, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < node.size(); ++i) out.push_back(as_number(node[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<std::string> as_strings(const json& node, const std::string& field) {
  if (!node.is_array()) throw ConfigError(field, "expected an array of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < node.size(); ++i) out.push_back(as_string(node[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

// Either an explicit array or {"from", "to", "step"}.
std::vector<double> as_grid(const json& node, const std::string& field) {
  if (node.is_array()) return as_numbers(node, field);
  require_object(node, field);
  reject_unknown(node, field, {"from", "to", "step"});
  if (!node.contains("from") || !node.contains("to") || !node.contains("step"))
    throw ConfigError(field, "grid object needs from, to and step");
  const double from = as_number(node["from"], field + ".from");
  const double to = as_number(node["to"], field + ".to");
  const double step = as_number(node["step"], field + ".step");
  if (!(step > 0.0) || !(to >= from)) throw ConfigError(field, "grid needs step > 0 and to >= from");
  return arithmetic_grid(from, to, step);
}

YearMonth as_year_month(const json& node, const std::string& field) {
  const std::string text = as_string(node, field);
  int y = 0, mo = 0;
  char dash = 0;
  std::istringstream in(text);
  if (!(in >> y >> dash >> mo) || dash != '-' || mo < 1 || mo > 12 || !in.eof())
    throw ConfigError(field, "expected YYYY-MM");
  return {y, mo};
}

void parse_model(const json& node, ModelConfig& model) {
  require_object(node, "model");
  reject_unknown(node, "model", {"laws", "alphas", "thetas"});
  model = {};
  if (node.contains("laws")) {
    const json& laws = node["laws"];
    if (!laws.is_array()) throw ConfigError("model.laws", "expected an array");
    for (std::size_t i = 0; i < laws.size(); ++i) {
      const std::string f = "model.laws[" + std::to_string(i) + "]";
      require_object(laws[i], f);
      reject_unknown(laws[i], f, {"alpha", "scale"});
      if (!laws[i].contains("alpha") || !laws[i].contains("scale")) throw ConfigError(f, "needs alpha and scale");
      model.laws.push_back({as_number(laws[i]["alpha"], f + ".alpha"), as_number(laws[i]["scale"], f + ".scale")});
    }
  }
  if (node.contains("alphas")) model.alphas = as_numbers(node["alphas"], "model.alphas");
  if (node.contains("thetas")) model.thetas = as_numbers(node["thetas"], "model.thetas");
}

void parse_optimizer(const json& node, OptimizerSection& opt) {
  require_object(node, "optimizer");
  reject_unknown(node, "optimizer", {"algorithms", "stall_limit", "max_iterations", "population_size"});
  if (node.contains("algorithms")) {
    opt.algorithms.clear();
    const auto names = as_strings(node["algorithms"], "optimizer.algorithms");
    for (std::size_t i = 0; i < names.size(); ++i) {
      try {
        opt.algorithms.push_back(parse_algorithm(names[i]));
      } catch (const DomainError& e) {
        throw ConfigError("optimizer.algorithms[" + std::to_string(i) + "]", e.what());
      }
    }
  }
  if (node.contains("stall_limit")) opt.stall_limit = as_count(node["stall_limit"], "optimizer.stall_limit");
  if (node.contains("max_iterations")) opt.max_iterations = as_count(node["max_iterations"], "optimizer.max_iterations");
  if (node.contains("population_size"))
    opt.population_size = as_count(node["population_size"], "optimizer.population_size");
}

void parse_empirical(const json& node, EmpiricalSection& emp) {
  require_object(node, "empirical");
  reject_unknown(node, "empirical",
                 {"data", "pools", "k", "h", "k_min", "k_max", "theta_pair", "significance", "synthetic"});
  if (node.contains("data")) emp.data = as_string(node["data"], "empirical.data");
  if (node.contains("pools")) {
    const json& pools = node["pools"];
    if (!pools.is_array()) throw ConfigError("empirical.pools", "expected an array");
    emp.pools.clear();
    for (std::size_t i = 0; i < pools.size(); ++i) {
      const std::string f = "empirical.pools[" + std::to_string(i) + "]";
      require_object(pools[i], f);
      reject_unknown(pools[i], f, {"name", "states", "pooled"});
      PoolConfig pool;
      pool.name = pools[i].contains("name") ? as_string(pools[i]["name"], f + ".name") : "pool" + std::to_string(i + 1);
      if (!pools[i].contains("states")) throw ConfigError(f + ".states", "required");
      pool.states = as_strings(pools[i]["states"], f + ".states");
      if (pools[i].contains("pooled")) pool.pooled = as_bool(pools[i]["pooled"], f + ".pooled");
      emp.pools.push_back(std::move(pool));
    }
  }
  if (node.contains("k")) emp.k = as_count(node["k"], "empirical.k");
  if (node.contains("h")) emp.h = as_count(node["h"], "empirical.h");
  if (node.contains("k_min")) emp.k_min = as_count(node["k_min"], "empirical.k_min");
  if (node.contains("k_max")) emp.k_max = as_count(node["k_max"], "empirical.k_max");
  if (node.contains("theta_pair")) {
    const auto pair = as_strings(node["theta_pair"], "empirical.theta_pair");
    if (pair.size() != 2) throw ConfigError("empirical.theta_pair", "expected [sample, reference]");
    emp.theta_pair = {pair[0], pair[1]};
  }
  if (node.contains("significance")) emp.significance = as_number(node["significance"], "empirical.significance");
  if (node.contains("synthetic")) {
    const json& s = require_object(node["synthetic"], "empirical.synthetic");
    reject_unknown(s, "empirical.synthetic", {"states", "alphas", "months"});
    if (s.contains("states")) emp.synthetic.states = as_strings(s["states"], "empirical.synthetic.states");
    if (s.contains("alphas")) emp.synthetic.alphas = as_numbers(s["alphas"], "empirical.synthetic.alphas");
    if (s.contains("months")) emp.synthetic.months = as_count(s["months"], "empirical.synthetic.months");
  }
}

void parse_ingest(const json& node, IngestSection& ing) {
  require_object(node, "ingest");
  reject_unknown(node, "ingest", {"input", "output", "states", "window", "delimiter", "columns"});
  if (node.contains("input")) ing.input = as_string(node["input"], "ingest.input");
  if (node.contains("output")) ing.output = as_string(node["output"], "ingest.output");
  if (node.contains("states")) ing.states = as_strings(node["states"], "ingest.states");
  if (node.contains("window")) {
    const json& w = require_object(node["window"], "ingest.window");
    reject_unknown(w, "ingest.window", {"start", "end"});
    if (w.contains("start")) ing.window.start = as_year_month(w["start"], "ingest.window.start");
    if (w.contains("end")) ing.window.end = as_year_month(w["end"], "ingest.window.end");
  }
  if (node.contains("delimiter")) {
    const std::string d = as_string(node["delimiter"], "ingest.delimiter");
    if (d.size() != 1) throw ConfigError("ingest.delimiter", "expected a single character");
    ing.schema.delimiter = d[0];
  }
  if (node.contains("columns")) {
    const json& c = require_object(node["columns"], "ingest.columns");
    reject_unknown(c, "ingest.columns", {"date", "state", "building", "contents"});
    if (c.contains("date")) ing.schema.date_column = as_string(c["date"], "ingest.columns.date");
    if (c.contains("state")) ing.schema.state_column = as_string(c["state"], "ingest.columns.state");
    if (c.contains("building")) ing.schema.building_column = as_string(c["building"], "ingest.columns.building");
    if (c.contains("contents")) ing.schema.contents_column = as_string(c["contents"], "ingest.columns.contents");
  }
}

void parse_rv(const json& node, RvSection& rv) {
  require_object(node, "rv");
  reject_unknown(node, "rv", {"grid", "replications", "seed", "levels"});
  if (node.contains("grid")) rv.settings.grid = as_count(node["grid"], "rv.grid");
  if (node.contains("replications")) rv.settings.replications = as_count(node["replications"], "rv.replications");
  if (node.contains("seed")) rv.settings.seed = as_count(node["seed"], "rv.seed");
  if (node.contains("levels")) rv.levels = as_numbers(node["levels"], "rv.levels");
}

}  // namespace

std::vector<double> arithmetic_grid(double from, double to, double step) {
  if (!(step > 0.0) || !(to >= from) || !std::isfinite(to - from))
    throw ConfigError("grid", "needs step > 0 and to >= from");
  const auto count = static_cast<std::size_t>(std::floor((to - from) / step + 1e-9)) + 1;
  std::vector<double> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    // Round to 12 decimals so grid points print as their decimal literals.
    out.push_back(std::round((from + static_cast<double>(i) * step) * 1e12) / 1e12);
  }
  return out;
}

LambdaPolicy parse_lambda_policy(const std::string& name) {
  if (name == "box_lower") return LambdaPolicy::BoxLower;
  if (name == "explicit") return LambdaPolicy::Explicit;
  if (name == "optimize") return LambdaPolicy::Optimize;
  throw ConfigError("lambda_policy", "expected box_lower, explicit or optimize");
}

std::string lambda_policy_name(LambdaPolicy policy) {
  switch (policy) {
    case LambdaPolicy::BoxLower: return "box_lower";
    case LambdaPolicy::Explicit: return "explicit";
    case LambdaPolicy::Optimize: return "optimize";
  }
  return "?";
}

ExperimentConfig default_config() {
  ExperimentConfig c;
  c.model.laws = {{8.5, 100.0}, {8.5, 90.0}};
  c.p_grid = arithmetic_grid(0.8, 0.975, 0.001);
  c.empirical.pools = {{"pool1", {"FL", "CA"}, true}, {"pool2", {"CA", "NY"}, false}, {"pool3", {"FL", "CA", "NY"}, false}};
  return c;
}

ExperimentConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", std::string("invalid JSON: ") + e.what());
  }
  require_object(doc, "config");
  reject_unknown(doc, "", {"model", "xi_grid", "xi_levels", "p_grid", "lambda_policy", "lambdas", "m", "seeds",
                           "output_dir", "threads", "optimizer", "empirical", "ingest", "rv"});
  ExperimentConfig c = default_config();
  if (doc.contains("model")) parse_model(doc["model"], c.model);
  if (doc.contains("xi_grid")) c.xi_grid = as_numbers(doc["xi_grid"], "xi_grid");
  if (doc.contains("xi_levels")) c.xi_levels = as_numbers(doc["xi_levels"], "xi_levels");
  if (doc.contains("p_grid")) c.p_grid = as_grid(doc["p_grid"], "p_grid");
  if (doc.contains("lambda_policy")) c.lambda_policy = parse_lambda_policy(as_string(doc["lambda_policy"], "lambda_policy"));
  if (doc.contains("lambdas")) c.lambdas = as_numbers(doc["lambdas"], "lambdas");
  if (doc.contains("m")) c.m = as_count(doc["m"], "m");
  if (doc.contains("seeds")) {
    const json& s = doc["seeds"];
    if (!s.is_array()) throw ConfigError("seeds", "expected an array of integers");
    c.seeds.clear();
    for (std::size_t i = 0; i < s.size(); ++i) c.seeds.push_back(as_count(s[i], "seeds[" + std::to_string(i) + "]"));
  }
  if (doc.contains("output_dir")) c.output_dir = as_string(doc["output_dir"], "output_dir");
  if (doc.contains("threads")) c.threads = static_cast<unsigned>(as_count(doc["threads"], "threads"));
  if (doc.contains("optimizer")) parse_optimizer(doc["optimizer"], c.optimizer);
  if (doc.contains("empirical")) parse_empirical(doc["empirical"], c.empirical);
  if (doc.contains("ingest")) parse_ingest(doc["ingest"], c.ingest);
  if (doc.contains("rv")) parse_rv(doc["rv"], c.rv);
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot read '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

void ExperimentConfig::validate() const {
  const std::size_t n = model.size();
  if (n == 0) throw ConfigError("model", "needs at least one participant");
  if (model.has_laws()) {
    for (std::size_t i = 0; i < model.laws.size(); ++i) {
      const std::string f = "model.laws[" + std::to_string(i) + "]";
      if (!(model.laws[i].alpha > 0.0) || !std::isfinite(model.laws[i].alpha)) throw ConfigError(f + ".alpha", "must be positive");
      if (!(model.laws[i].scale > 0.0) || !std::isfinite(model.laws[i].scale)) throw ConfigError(f + ".scale", "must be positive");
    }
  } else {
    if (model.thetas.size() != model.alphas.size())
      throw ConfigError("model.thetas", "must match model.alphas in length");
    try {
      TailModel(model.alphas, model.thetas, 1.0);
    } catch (const DomainError& e) {
      throw ConfigError("model", e.what());
    }
  }
  if (p_grid.empty()) throw ConfigError("p_grid", "must not be empty");
  for (std::size_t i = 0; i < p_grid.size(); ++i)
    if (!(p_grid[i] > 0.0 && p_grid[i] < 1.0)) throw ConfigError("p_grid[" + std::to_string(i) + "]", "p must lie in (0, 1)");
  for (std::size_t i = 0; i < xi_grid.size(); ++i)
    if (!(xi_grid[i] > 0.0) || !std::isfinite(xi_grid[i])) throw ConfigError("xi_grid[" + std::to_string(i) + "]", "xi must be positive");
  for (std::size_t i = 0; i < xi_levels.size(); ++i)
    if (!(xi_levels[i] > 0.0) || !std::isfinite(xi_levels[i])) throw ConfigError("xi_levels[" + std::to_string(i) + "]", "must be positive");
  if (xi_grid.empty() && xi_levels.empty()) throw ConfigError("xi_grid", "must not be empty");
  if (m < 10) throw ConfigError("m", "sample size must be at least 10");
  if (seeds.empty()) throw ConfigError("seeds", "must not be empty");
  if (threads < 1) throw ConfigError("threads", "must be at least 1");
  if (lambda_policy == LambdaPolicy::Explicit) {
    if (lambdas.size() != n) throw ConfigError("lambdas", "needs one multiplier per participant");
    for (std::size_t i = 0; i < lambdas.size(); ++i)
      if (!(lambdas[i] > 1.0) || !std::isfinite(lambdas[i])) throw ConfigError("lambdas[" + std::to_string(i) + "]", "must be finite and > 1");
  }
  if (optimizer.algorithms.empty()) throw ConfigError("optimizer.algorithms", "must not be empty");
  if (optimizer.stall_limit == 0 || optimizer.stall_limit >= optimizer.max_iterations)
    throw ConfigError("optimizer.stall_limit", "must be positive and below max_iterations");
  if (optimizer.population_size < 4) throw ConfigError("optimizer.population_size", "must be at least 4");
  if (!(empirical.significance > 0.0 && empirical.significance < 1.0))
    throw ConfigError("empirical.significance", "must lie in (0, 1)");
  for (std::size_t i = 0; i < empirical.pools.size(); ++i)
    if (empirical.pools[i].states.empty())
      throw ConfigError("empirical.pools[" + std::to_string(i) + "].states", "must not be empty");
  if (empirical.synthetic.states.size() != empirical.synthetic.alphas.size())
    throw ConfigError("empirical.synthetic.alphas", "needs one tail index per synthetic state");
  for (std::size_t i = 0; i < empirical.synthetic.alphas.size(); ++i)
    if (!(empirical.synthetic.alphas[i] > 0.0))
      throw ConfigError("empirical.synthetic.alphas[" + std::to_string(i) + "]", "must be positive");
  if (empirical.synthetic.months < 10) throw ConfigError("empirical.synthetic.months", "must be at least 10");
  if (ingest.window.end < ingest.window.start) throw ConfigError("ingest.window", "start must not follow end");
  for (std::size_t i = 0; i < rv.levels.size(); ++i)
    if (!(rv.levels[i] > 0.0 && rv.levels[i] <= 0.5)) throw ConfigError("rv.levels[" + std::to_string(i) + "]", "must lie in (0, 0.5]");
}

std::vector<double> ExperimentConfig::resolved_xi_grid() const {
  if (!xi_grid.empty()) return xi_grid;
  double a1 = 0.0;
  if (model.has_laws()) {
    a1 = model.laws[0].alpha;
    for (const auto& law : model.laws) a1 = std::min(a1, law.alpha);
  } else {
    a1 = *std::min_element(model.alphas.begin(), model.alphas.end());
  }
  std::vector<double> out;
  for (double level : xi_levels) out.push_back(std::pow(level, 1.0 / a1));
  return out;
}

TailModel ExperimentConfig::tail_model(double xi) const {
  if (model.has_laws()) return TailModel::from_frechet(model.laws, xi);
  return TailModel(model.alphas, model.thetas, xi);
}

}  // namespace catpool::cli
