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


#include <dngd.h>

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace {

// 2 for configuration problems, 1 for any other failure.
int exit_code(dngd_status status) {
  if (status == DNGD_OK) return 0;
  std::fprintf(stderr, "error: %s\n", dngd_last_error());
  return status == DNGD_CONFIG_ERROR ? 2 : 1;
}

std::string fmt(double x) {
  if (std::isnan(x)) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dual natural gradient descent for physics-informed networks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(dngd_version()));

  std::string config, out;
  std::vector<std::uint64_t> seeds;
  bool deterministic = false;

  auto* run = app.add_subcommand("run", "train every seed of an experiment config");
  run->add_option("--config", config, "experiment config (JSON)")->required();
  run->add_option("--out", out, "output directory (overrides the config)");
  run->add_option("--seeds", seeds, "comma-separated seeds (override the config)")
      ->delimiter(',');
  run->add_flag("--deterministic", deterministic,
                "single worker; the CSV time column becomes a virtual clock");

  auto* sweep = app.add_subcommand("sweep", "time the primal and dual solvers over an (m, n) grid");
  sweep->add_option("--config", config, "sweep config (JSON)")->required();
  sweep->add_option("--out", out, "output directory (overrides the config)");

  app.add_subcommand("check", "run the built-in oracle and property checks");
  app.add_subcommand("list-problems", "list the available PDE problems");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (app.got_subcommand("run")) {
    dngd_run_options options{};
    options.output_dir = out.empty() ? nullptr : out.c_str();
    options.seeds = seeds.empty() ? nullptr : seeds.data();
    options.num_seeds = seeds.size();
    options.deterministic = deterministic ? 1 : 0;
    int failed = 0;
    const auto on_seed = [](const dngd_seed_summary* s, void* user) {
      std::printf("seed %llu: %zu iterations, loss %s, rel_l2 %s%s\n",
                  static_cast<unsigned long long>(s->seed), s->iterations,
                  fmt(s->final_loss).c_str(), fmt(s->final_rel_l2).c_str(),
                  s->failed ? " (failed)" : "");
      *static_cast<int*>(user) += s->failed;
    };
    const int code = exit_code(dngd_run_experiment(config.c_str(), &options, on_seed, &failed));
    return code != 0 ? code : (failed > 0 ? 1 : 0);
  }

  if (app.got_subcommand("sweep")) {
    const auto on_cell = [](size_t m, size_t n, double primal, double dual, const char* winner,
                            void*) {
      std::printf("m=%zu n=%zu primal %s s dual %s s -> %s\n", m, n, fmt(primal).c_str(),
                  fmt(dual).c_str(), winner);
    };
    return exit_code(
        dngd_run_sweep(config.c_str(), out.empty() ? nullptr : out.c_str(), on_cell, nullptr));
  }

  if (app.got_subcommand("check")) {
    size_t failed = 0;
    const auto on_check = [](const char* name, int passed, const char* detail, void*) {
      std::printf("%s %s: %s\n", passed ? "PASS" : "FAIL", name, detail);
      std::fflush(stdout);
    };
    const int code = exit_code(dngd_run_checks(on_check, nullptr, &failed));
    return code != 0 ? code : (failed > 0 ? 1 : 0);
  }

  const auto on_problem = [](const char* name, const char* description, void*) {
    std::printf("%-14s %s\n", name, description);
  };
  return exit_code(dngd_list_problems(on_problem, nullptr));
}
