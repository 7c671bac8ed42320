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


#include "dngd/exp/run.hpp"

#include "dngd/error.hpp"
#include "dngd/opt/dngd.hpp"
#include "dngd/opt/training_problem.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <fstream>
#include <memory>
#include <mutex>
#include <thread>

namespace dngd::exp {

namespace fs = std::filesystem;

namespace {

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  return out;
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw Error(ErrorCode::io, "cannot create output directory " + dir.string());
}

std::unique_ptr<opt::Trainer> make_trainer(const ExperimentConfig& c,
                                           const opt::TrainingProblem& problem,
                                           std::uint64_t seed) {
  if (c.method == Method::dngd)
    return std::make_unique<opt::DngdTrainer>(problem, c.optimizer_config(), seed);
  return std::make_unique<opt::BaselineTrainer>(problem, c.baseline_config(), seed);
}

// One seed, streaming rows to its CSV so that a failure leaves the rows so far.
SeedOutcome run_seed(const ExperimentConfig& c, std::uint64_t seed, const fs::path& dir,
                     bool deterministic) {
  SeedOutcome outcome;
  outcome.seed = seed;
  const fs::path csv = dir / ("seed_" + std::to_string(seed) + ".csv");
  outcome.csv_path = csv.string();
  std::ofstream out = open_output(csv);
  out << kTraceHeader << '\n';
  std::ofstream timing;
  if (deterministic) {
    timing = open_output(dir / ("seed_" + std::to_string(seed) + ".timing.csv"));
    timing << "iteration,wall_time_s\n";
  }
  const bool has_lambda = c.method == Method::dngd;

  opt::TrainTrace trace;
  try {
    const opt::PdeTrainingProblem problem(pde::make_problem(c.problem), c.layers, c.counts,
                                          c.eval_points);
    auto trainer = make_trainer(c, problem, seed);
    const auto on_record = [&](const opt::IterationRecord& rec) {
      opt::IterationRecord row = rec;
      if (deterministic) {
        timing << rec.iteration << ',' << format_double(rec.wall_time) << '\n';
        row.wall_time = static_cast<double>(rec.iteration);
      }
      out << trace_row(row, has_lambda) << '\n';
      out.flush();
    };
    const std::size_t eval_every =
        has_lambda ? c.dngd.eval_every : c.baseline.eval_every;
    const double divergence =
        has_lambda ? std::numeric_limits<double>::infinity() : c.baseline.divergence_loss;
    trace = opt::run_trainer(*trainer, c.budget, eval_every, on_record, divergence);
  } catch (const std::exception& e) {
    trace.aborted = true;
    trace.error = e.what();
  }
  if (trace.diverged && trace.error.empty())
    trace.error = "training diverged: loss non-finite or above the divergence limit";
  if (!trace.error.empty()) {
    std::string msg = trace.error;
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    out << "# error: " << msg << '\n';
  }
  out.flush();
  if (!out) throw Error(ErrorCode::io, "failed writing " + csv.string());

  outcome.iterations = trace.records.size();
  outcome.final_loss = trace.final_loss();
  outcome.final_rel_l2 = trace.final_rel_l2();
  outcome.aborted = trace.aborted;
  outcome.diverged = trace.diverged;
  outcome.error = trace.error;
  return outcome;
}

nlohmann::ordered_json quartile_json(const Quartiles& q) {
  nlohmann::ordered_json j;
  j["median"] = q.median;
  j["q25"] = q.q25;
  j["q75"] = q.q75;
  j["iqr"] = q.iqr;
  j["count"] = q.count;
  return j;
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return {};
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string trace_row(const opt::IterationRecord& rec, bool has_lambda) {
  std::string row = std::to_string(rec.iteration);
  row += ',' + format_double(rec.wall_time);
  row += ',' + format_double(rec.loss);
  row += ',' + format_double(rec.rel_l2);
  row += ',' + (has_lambda ? format_double(rec.lambda) : std::string());
  row += ',' + format_double(rec.eta);
  row += ',' + std::to_string(rec.cg_iterations);
  row += ',' + format_double(rec.ga_ratio);
  return row;
}

Quartiles quartiles(std::vector<double> values) {
  std::erase_if(values, [](double v) { return !std::isfinite(v); });
  Quartiles q;
  q.count = values.size();
  if (values.empty()) {
    q.median = q.q25 = q.q75 = q.iqr = std::numeric_limits<double>::quiet_NaN();
    return q;
  }
  std::sort(values.begin(), values.end());
  const auto at = [&](double p) {
    const double pos = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return frac == 0.0 ? values[lo] : values[lo] + frac * (values[hi] - values[lo]);
  };
  q.median = at(0.5);
  q.q25 = at(0.25);
  q.q75 = at(0.75);
  q.iqr = q.q75 - q.q25;
  return q;
}

std::size_t worker_count(const RunOptions& options, std::size_t jobs) {
  if (options.deterministic || jobs <= 1) return 1;
  std::size_t cap = options.max_threads;
  if (cap == 0) {
    if (const char* env = std::getenv("DNGD_THREADS")) {
      const std::string s = env;
      std::size_t parsed = 0;
      const auto res = std::from_chars(s.data(), s.data() + s.size(), parsed);
      if (res.ec == std::errc{} && res.ptr == s.data() + s.size() && parsed > 0) cap = parsed;
    }
  }
  if (cap == 0) cap = std::max(1u, std::thread::hardware_concurrency());
  return std::min(cap, jobs);
}

ExperimentResult run_experiment(ExperimentConfig config, const RunOptions& options) {
  if (options.output_dir) config.output_dir = *options.output_dir;
  if (options.seeds) config.seeds = *options.seeds;
  config.validate();

  const fs::path dir(config.output_dir);
  ensure_directory(dir);

  ExperimentResult result;
  result.seeds.resize(config.seeds.size());
  const std::size_t workers = worker_count(options, config.seeds.size());
  std::atomic<std::size_t> next{0};
  std::mutex failure_mutex;
  std::exception_ptr failure;
  const auto work = [&] {
    for (std::size_t k; (k = next++) < config.seeds.size();) {
      try {
        result.seeds[k] = run_seed(config, config.seeds[k], dir, options.deterministic);
      } catch (...) {
        const std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<double> errors, losses;
  for (const auto& s : result.seeds) {
    errors.push_back(s.final_rel_l2);
    losses.push_back(s.final_loss);
  }
  result.final_rel_l2 = quartiles(errors);
  result.final_loss = quartiles(losses);

  nlohmann::ordered_json j;
  j["name"] = config.name;
  j["problem"] = config.problem.name;
  j["method"] = to_string(config.method);
  j["seeds"] = config.seeds;
  j["final_rel_l2"] = quartile_json(result.final_rel_l2);
  j["final_loss"] = quartile_json(result.final_loss);
  nlohmann::ordered_json runs = nlohmann::ordered_json::array();
  for (const auto& s : result.seeds) {
    nlohmann::ordered_json r;
    r["seed"] = s.seed;
    r["csv"] = fs::path(s.csv_path).filename().string();
    r["iterations"] = s.iterations;
    r["final_loss"] = s.final_loss;
    r["final_rel_l2"] = s.final_rel_l2;
    r["aborted"] = s.aborted;
    r["diverged"] = s.diverged;
    r["error"] = s.error.empty() ? nlohmann::ordered_json() : nlohmann::ordered_json(s.error);
    runs.push_back(r);
  }
  j["runs"] = runs;
  const fs::path summary = dir / "summary.json";
  std::ofstream out = open_output(summary);
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::io, "failed writing " + summary.string());
  result.summary_path = summary.string();
  return result;
}

std::vector<opt::SweepCell> run_sweep(const SweepConfig& config,
                                      const std::optional<std::string>& output_dir) {
  SweepConfig c = config;
  if (output_dir) c.output_dir = *output_dir;
  c.validate();
  const fs::path dir(c.output_dir);
  ensure_directory(dir);
  const auto cells = opt::timing_sweep(c.options);
  const fs::path csv = dir / "sweep.csv";
  std::ofstream out = open_output(csv);
  out << kSweepHeader << '\n';
  for (const auto& cell : cells)
    out << cell.m << ',' << cell.n << ',' << format_double(cell.primal_s) << ','
        << format_double(cell.dual_s) << ',' << cell.winner() << '\n';
  if (!out) throw Error(ErrorCode::io, "failed writing " + csv.string());
  return cells;
}

}  // namespace dngd::exp
