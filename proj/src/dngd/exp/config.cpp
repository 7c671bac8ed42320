/*
 * Copyright 2026 The dngd Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include "dngd/exp/config.hpp"

#include "dngd/error.hpp"

#include <json.hpp>

#include <cctype>
#include <algorithm>
#include <string_view>
#include <initializer_list>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <utility>
#include <sstream>

namespace dngd::exp {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void field_error(const std::string& path, const std::string& message) {
  throw Error(ErrorCode::config, path + ": " + message);
}

void check(bool ok, const std::string& path, const std::string& message) {
  if (!ok) field_error(path, message);
}

// ---- source positions ------------------------------------------------------

// Byte offset of every value in a syntactically valid JSON text, keyed by its
// JSON pointer. Only used to place diagnostics.
class OffsetIndex {
 public:
  explicit OffsetIndex(const std::string& text) : s_(text) {
    skip();
    value("");
  }
  const std::map<std::string, std::size_t>& offsets() const { return offsets_; }

 private:
  void skip() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }
  std::string string_token() {
    std::string out;
    ++i_;
    while (i_ < s_.size() && s_[i_] != '"') {
      if (s_[i_] == '\\') ++i_;
      if (i_ < s_.size()) out += s_[i_++];
    }
    ++i_;
    return out;
  }
  void value(const std::string& path) {
    skip();
    offsets_[path] = i_;
    if (i_ >= s_.size()) return;
    const char c = s_[i_];
    if (c == '{') {
      ++i_;
      skip();
      while (i_ < s_.size() && s_[i_] != '}') {
        const std::string key = string_token();
        skip();
        ++i_;  // ':'
        value(path + "/" + key);
        skip();
        if (i_ < s_.size() && s_[i_] == ',') ++i_;
        skip();
      }
      ++i_;
    } else if (c == '[') {
      ++i_;
      skip();
      for (std::size_t k = 0; i_ < s_.size() && s_[i_] != ']'; ++k) {
        value(path + "/" + std::to_string(k));
        skip();
        if (i_ < s_.size() && s_[i_] == ',') ++i_;
        skip();
      }
      ++i_;
    } else if (c == '"') {
      string_token();
    } else {
      while (i_ < s_.size() && s_[i_] != ',' && s_[i_] != '}' && s_[i_] != ']' &&
             !std::isspace(static_cast<unsigned char>(s_[i_])))
        ++i_;
    }
  }

  const std::string& s_;
  std::size_t i_ = 0;
  std::map<std::string, std::size_t> offsets_;
};

std::string line_column(const std::string& text, std::size_t offset) {
  std::size_t line = 1, column = 1;
  for (std::size_t k = 0; k < offset && k < text.size(); ++k) {
    if (text[k] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

// Position of the deepest existing value on `path`.
std::size_t locate(const std::string& text, std::string path) {
  const OffsetIndex index(text);
  for (;;) {
    const auto it = index.offsets().find(path);
    if (it != index.offsets().end()) return it->second;
    const auto slash = path.rfind('/');
    if (slash == std::string::npos) return 0;
    path.erase(slash);
  }
}

// ---- strict object reader --------------------------------------------------

class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    check(j_.is_object(), where(), "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }
  std::string at(const std::string& key) const { return path_ + "/" + key; }
  std::string where() const { return path_.empty() ? "/" : path_; }

  const json* find(const std::string& key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }
  const json& require(const std::string& key) {
    const json* v = find(key);
    if (v == nullptr) field_error(at(key), "missing required field");
    return *v;
  }

  double number(const std::string& key, double fallback) {
    const json* v = find(key);
    if (v == nullptr) return fallback;
    check(v->is_number(), at(key), "expected a number");
    const double x = v->get<double>();
    check(std::isfinite(x), at(key), "must be finite");
    return x;
  }
  std::uint64_t integer(const std::string& key, std::uint64_t fallback) {
    const json* v = find(key);
    return v == nullptr ? fallback : as_integer(*v, at(key));
  }
  bool flag(const std::string& key, bool fallback) {
    const json* v = find(key);
    if (v == nullptr) return fallback;
    check(v->is_boolean(), at(key), "expected true or false");
    return v->get<bool>();
  }
  std::string text(const std::string& key, const std::string& fallback) {
    const json* v = find(key);
    if (v == nullptr) return fallback;
    check(v->is_string(), at(key), "expected a string");
    return v->get<std::string>();
  }
  template <class T>
  std::vector<T> integers(const std::string& key, std::vector<T> fallback) {
    const json* v = find(key);
    if (v == nullptr) return fallback;
    check(v->is_array(), at(key), "expected an array of integers");
    std::vector<T> out;
    for (std::size_t k = 0; k < v->size(); ++k)
      out.push_back(static_cast<T>(as_integer((*v)[k], at(key) + "/" + std::to_string(k))));
    return out;
  }

  static std::uint64_t as_integer(const json& v, const std::string& path) {
    check(v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0), path,
          "expected a nonnegative integer");
    return v.get<std::uint64_t>();
  }

  // Rejects keys outside `keys` up front, so a misspelled section is reported
  // as unknown rather than as a missing one.
  void only(std::initializer_list<std::string_view> keys) const {
    for (const auto& item : j_.items())
      if (std::find(keys.begin(), keys.end(), item.key()) == keys.end())
        field_error(at(item.key()), "unknown field");
  }

  // Rejects keys that were never asked for.
  void finish() const {
    for (const auto& item : j_.items())
      if (!seen_.count(item.key())) field_error(at(item.key()), "unknown field");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

json parse_text(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::string what = e.what();
    const auto colon = what.find(": ", what.find("column"));
    if (colon != std::string::npos) what = what.substr(colon + 2);
    const std::size_t offset = e.byte > 0 ? e.byte - 1 : 0;
    throw Error(ErrorCode::config, source + ": " + line_column(text, offset) + ": " + what);
  }
}

// Re-raises a field error with the source position of its path.
template <class F>
auto with_position(const std::string& text, const std::string& source, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    if (e.code() != ErrorCode::config) throw;
    const std::string msg = e.what();
    std::string path;
    if (!msg.empty() && msg[0] == '/') path = msg.substr(0, msg.find(": "));
    if (path == "/") path.clear();
    throw Error(ErrorCode::config,
                source + ": " + line_column(text, locate(text, path)) + ": " + msg);
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Method method_from(const std::string& s, const std::string& path) {
  if (s == "dngd") return Method::dngd;
  if (s == "adam") return Method::adam;
  if (s == "sgd_momentum") return Method::sgd_momentum;
  field_error(path, "unknown method '" + s + "' (expected dngd, adam or sgd_momentum)");
}

opt::Budget read_budget(Reader& r) {
  check(r.has("iterations") != r.has("wall_seconds"), r.where(),
        "set exactly one of iterations or wall_seconds");
  if (r.has("iterations")) return opt::Budget::iterations(r.integer("iterations", 0));
  return opt::Budget::seconds(r.number("wall_seconds", 0.0));
}

json budget_json(const opt::Budget& b) {
  json j = json::object();
  if (b.kind == opt::Budget::Kind::iterations)
    j["iterations"] = b.max_iters;
  else
    j["wall_seconds"] = b.wall_seconds;
  return j;
}

}  // namespace

const char* to_string(Method m) noexcept {
  switch (m) {
    case Method::dngd:
      return "dngd";
    case Method::adam:
      return "adam";
    case Method::sgd_momentum:
      return "sgd_momentum";
  }
  return "unknown";
}

// ---- validation --------------------------------------------------------------

void ExperimentConfig::validate() const {
  check(!name.empty(), "/name", "must not be empty");
  const auto known = pde::list_problems();
  if (std::none_of(known.begin(), known.end(),
                   [&](const pde::ProblemInfo& info) { return info.name == problem.name; }))
    field_error("/problem/name", "unknown problem '" + problem.name + "'");
  std::unique_ptr<pde::PdeProblem> p;
  try {
    p = pde::make_problem(problem);
  } catch (const Error& e) {
    field_error("/problem", e.what());
  }
  check(layers.size() >= 2, "/network/layers", "needs at least an input and an output width");
  for (std::size_t k = 0; k < layers.size(); ++k)
    check(layers[k] >= 1, "/network/layers/" + std::to_string(k), "widths must be positive");
  const auto hints = p->network_hints();
  check(layers.front() == hints.mlp_input_width, "/network/layers/0",
        p->name() + " needs an input width of " + std::to_string(hints.mlp_input_width));
  check(layers.back() == 1, "/network/layers/" + std::to_string(layers.size() - 1),
        "the output width must be 1");
  const std::size_t classes = p->class_specs().size();
  check(counts.empty() || counts.size() == classes, "/problem/counts",
        p->name() + " expects " + std::to_string(classes) + " point counts");
  for (std::size_t k = 0; k < counts.size(); ++k)
    check(counts[k] >= 1, "/problem/counts/" + std::to_string(k), "must be at least 1");
  check(eval_points >= 1, "/problem/eval_points", "must be at least 1");

  if (budget.kind == opt::Budget::Kind::iterations)
    check(budget.max_iters >= 1, "/budget/iterations", "must be at least 1");
  else
    check(budget.wall_seconds > 0.0 && std::isfinite(budget.wall_seconds),
          "/budget/wall_seconds", "must be positive");

  const std::string o = "/optimizer/";
  if (method == Method::dngd) {
    check(dngd.lambda_cap > 0.0, o + "lambda_cap", "must be positive");
    check(dngd.dense_threshold >= 1, o + "dense_threshold", "must be positive");
    check(dngd.cg_tol > 0.0, o + "cg_tol", "must be positive");
    check(dngd.cg_max_iters >= 1, o + "cg_max_iters", "must be positive");
    check(dngd.line_search_points >= 1, o + "line_search_points", "must be at least 1");
    check(dngd.eval_every >= 1, o + "eval_every", "must be at least 1");
  } else {
    check(baseline.learning_rate > 0.0, o + "learning_rate", "must be positive");
    check(baseline.beta1 >= 0.0 && baseline.beta1 < 1.0, o + "beta1", "must lie in [0, 1)");
    check(baseline.beta2 >= 0.0 && baseline.beta2 < 1.0, o + "beta2", "must lie in [0, 1)");
    check(baseline.epsilon > 0.0, o + "epsilon", "must be positive");
    check(baseline.momentum >= 0.0 && baseline.momentum < 1.0, o + "momentum",
          "must lie in [0, 1)");
    check(baseline.eval_every >= 1, o + "eval_every", "must be at least 1");
    check(baseline.divergence_loss > 0.0, o + "divergence_loss", "must be positive");
  }

  check(!seeds.empty(), "/seeds", "must list at least one seed");
  const std::set<std::uint64_t> unique(seeds.begin(), seeds.end());
  check(unique.size() == seeds.size(), "/seeds", "seeds must be distinct");
  check(!output_dir.empty(), "/output_dir", "must not be empty");
}

opt::OptimizerConfig ExperimentConfig::optimizer_config() const {
  opt::OptimizerConfig c = dngd;
  c.budget = budget;
  return c;
}

opt::BaselineConfig ExperimentConfig::baseline_config() const {
  opt::BaselineConfig c = baseline;
  c.method = method == Method::sgd_momentum ? opt::BaselineMethod::sgd_momentum
                                            : opt::BaselineMethod::adam;
  c.budget = budget;
  return c;
}

bool ExperimentConfig::operator==(const ExperimentConfig& o) const {
  const bool same_budget =
      budget.kind == o.budget.kind && (budget.kind == opt::Budget::Kind::iterations
                                           ? budget.max_iters == o.budget.max_iters
                                           : budget.wall_seconds == o.budget.wall_seconds);
  auto settings = [](const ExperimentConfig& c) {
    auto d = c.optimizer_config();
    auto b = c.baseline_config();
    d.budget = b.budget = opt::Budget{};
    return std::make_pair(d, b);
  };
  const auto [d1, b1] = settings(*this);
  const auto [d2, b2] = settings(o);
  const bool same_method = method == o.method && (method == Method::dngd ? d1 == d2 : b1 == b2);
  return name == o.name && problem == o.problem && counts == o.counts &&
         eval_points == o.eval_points && layers == o.layers && same_budget && same_method &&
         seeds == o.seeds && output_dir == o.output_dir;
}

void SweepConfig::validate() const {
  try {
    options.validate();
  } catch (const Error& e) {
    field_error("/", e.what());
  }
  check(!output_dir.empty(), "/output_dir", "must not be empty");
}

// ---- parsing -----------------------------------------------------------------

ExperimentConfig parse_experiment(const std::string& text, const std::string& source) {
  const json root = parse_text(text, source);
  return with_position(text, source, [&] {
    ExperimentConfig c;
    Reader r(root, "");
    r.only({"name", "problem", "network", "optimizer", "budget", "seeds", "output_dir"});
    c.name = r.text("name", c.name);

    Reader p(r.require("problem"), "/problem");
    c.problem.name = p.text("name", c.problem.name);
    c.problem.dim = p.integer("dim", c.problem.dim);
    c.problem.stde_k = p.integer("stde_k", c.problem.stde_k);
    c.problem.coefficient_seed = p.integer("coefficient_seed", c.problem.coefficient_seed);
    c.counts = p.integers<std::size_t>("counts", c.counts);
    c.eval_points = p.integer("eval_points", c.eval_points);
    p.finish();

    Reader n(r.require("network"), "/network");
    c.layers = n.integers<std::size_t>("layers", c.layers);
    n.finish();

    Reader o(r.require("optimizer"), "/optimizer");
    c.method = method_from(o.text("method", "dngd"), "/optimizer/method");
    if (c.method == Method::dngd) {
      auto& d = c.dngd;
      d.lambda_cap = o.number("lambda_cap", d.lambda_cap);
      d.dense_threshold = o.integer("dense_threshold", d.dense_threshold);
      d.nystrom_rank = o.integer("nystrom_rank", d.nystrom_rank);
      d.stratified_landmarks = o.flag("stratified_landmarks", d.stratified_landmarks);
      d.cg_tol = o.number("cg_tol", d.cg_tol);
      d.cg_max_iters = o.integer("cg_max_iters", d.cg_max_iters);
      d.use_ga = o.flag("use_ga", d.use_ga);
      d.line_search_points = o.integer("line_search_points", d.line_search_points);
      d.resample = o.flag("resample", d.resample);
      d.reject_if_worse = o.flag("reject_if_worse", d.reject_if_worse);
      d.eval_every = o.integer("eval_every", d.eval_every);
    } else {
      auto& b = c.baseline;
      b.learning_rate = o.number("learning_rate", b.learning_rate);
      b.beta1 = o.number("beta1", b.beta1);
      b.beta2 = o.number("beta2", b.beta2);
      b.epsilon = o.number("epsilon", b.epsilon);
      b.momentum = o.number("momentum", b.momentum);
      b.resample = o.flag("resample", b.resample);
      b.eval_every = o.integer("eval_every", b.eval_every);
      b.divergence_loss = o.number("divergence_loss", b.divergence_loss);
    }
    o.finish();

    Reader b(r.require("budget"), "/budget");
    c.budget = read_budget(b);
    b.finish();

    c.seeds = r.integers<std::uint64_t>("seeds", c.seeds);
    c.output_dir = r.text("output_dir", c.output_dir);
    r.finish();
    c.validate();
    return c;
  });
}

SweepConfig parse_sweep(const std::string& text, const std::string& source) {
  const json root = parse_text(text, source);
  return with_position(text, source, [&] {
    SweepConfig c;
    auto& s = c.options;
    Reader r(root, "");
    s.ms = r.integers<std::size_t>("m", s.ms);
    s.ns = r.integers<std::size_t>("n", s.ns);
    s.iterations = r.integer("iterations", s.iterations);
    s.seed = r.integer("seed", s.seed);
    s.lambda_cap = r.number("lambda_cap", s.lambda_cap);
    s.line_search_points = r.integer("line_search_points", s.line_search_points);
    c.output_dir = r.text("output_dir", c.output_dir);
    r.finish();
    c.validate();
    return c;
  });
}

ExperimentConfig load_experiment(const std::string& path) {
  return parse_experiment(read_file(path), path);
}

SweepConfig load_sweep(const std::string& path) { return parse_sweep(read_file(path), path); }

// ---- serialization -------------------------------------------------------------

std::string to_json(const ExperimentConfig& c) {
  json j;
  j["name"] = c.name;
  j["problem"] = {{"name", c.problem.name},
                  {"dim", c.problem.dim},
                  {"stde_k", c.problem.stde_k},
                  {"coefficient_seed", c.problem.coefficient_seed},
                  {"counts", c.counts},
                  {"eval_points", c.eval_points}};
  j["network"] = {{"layers", c.layers}};
  json o;
  o["method"] = to_string(c.method);
  if (c.method == Method::dngd) {
    const auto& d = c.dngd;
    o["lambda_cap"] = d.lambda_cap;
    o["dense_threshold"] = d.dense_threshold;
    o["nystrom_rank"] = d.nystrom_rank;
    o["stratified_landmarks"] = d.stratified_landmarks;
    o["cg_tol"] = d.cg_tol;
    o["cg_max_iters"] = d.cg_max_iters;
    o["use_ga"] = d.use_ga;
    o["line_search_points"] = d.line_search_points;
    o["resample"] = d.resample;
    o["reject_if_worse"] = d.reject_if_worse;
    o["eval_every"] = d.eval_every;
  } else {
    const auto& b = c.baseline;
    o["learning_rate"] = b.learning_rate;
    o["beta1"] = b.beta1;
    o["beta2"] = b.beta2;
    o["epsilon"] = b.epsilon;
    o["momentum"] = b.momentum;
    o["resample"] = b.resample;
    o["eval_every"] = b.eval_every;
    o["divergence_loss"] = b.divergence_loss;
  }
  j["optimizer"] = o;
  j["budget"] = budget_json(c.budget);
  j["seeds"] = c.seeds;
  j["output_dir"] = c.output_dir;
  return j.dump(2) + "\n";
}

std::string to_json(const SweepConfig& c) {
  json j;
  j["m"] = c.options.ms;
  j["n"] = c.options.ns;
  j["iterations"] = c.options.iterations;
  j["seed"] = c.options.seed;
  j["lambda_cap"] = c.options.lambda_cap;
  j["line_search_points"] = c.options.line_search_points;
  j["output_dir"] = c.output_dir;
  return j.dump(2) + "\n";
}

}  // namespace dngd::exp
