/*
 * Copyright 2026 The lmagp Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef LMAGP_CLI_HPP_
#define LMAGP_CLI_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "lmagp/kernel.hpp"
#include "lmagp/lma.hpp"
#include "lmagp/metrics.hpp"

namespace lmagp {

enum ExitCode : int {
  exit_ok = 0,
  exit_usage = 2,
  exit_numerical = 3,
  exit_protocol = 4,
};

struct RunConfig {
  std::string command;
  std::string method = "lma";
  std::string train;
  std::string test;
  std::string out;
  int markov_order = 1;
  Index support_size = 16;
  int blocks = 4;
  int workers = 0; // > 0 runs the message-passing executor on that many threads
  std::uint64_t seed = 0;
  bool want_cov = false;
  std::string trace;
  std::string config;

  double signal_var = 1.0;
  double noise_var = 0.01;
  std::vector<double> lengthscales{1.0};
  double prior_mean = 0.0;

  // bench
  std::vector<Index> sizes{1000, 2000};
  Index test_size = 500;
  Index dimension = 2;
  Index fgp_max = 4000;

  // toy
  double grid_spacing = 1e-3;

  LmaConfig lma() const;
  Hyperparams hyper(Index d) const;
  /// Echo of every setting, for the metrics report.
  void echo(MetricsReport &report) const;
};

/// Parses flags (and the optional --config file, whose keys mirror the
/// long flag names). Throws CLI::ParseError subclasses on bad usage.
RunConfig parse_args(const std::vector<std::string> &args);

/// Runs one command and returns its exit code. `args` excludes the program
/// name.
int run_cli(const std::vector<std::string> &args, std::ostream &out,
            std::ostream &err);

/// Outcome of the toy command.
struct ToyReport {
  Matrix grid;
  Vector truth;
  Prediction lma;
  Prediction fgp;
  Prediction local;
  double lma_jump = 0.0;
  double lma_increment = 0.0;
  double local_jump = 0.0;
  double local_increment = 0.0;
  double lma_vs_fgp_rmse = 0.0;
  double seconds = 0.0;
};

ToyReport run_toy(std::uint64_t seed, double spacing);

/// Largest absolute step of `mean` between neighbouring grid points whose
/// toy block differs (jump) and whose toy block agrees (increment).
std::pair<double, double> boundary_statistics(const Matrix &grid,
                                              const Vector &mean);

struct BenchRow {
  std::string method;
  Index n = 0;
  int blocks = 0;
  int markov_order = 0;
  Index support_size = 0;
  double rmse = 0.0;
  double time_s = 0.0;
  double speedup = -1.0; // negative when not applicable
};

std::vector<BenchRow> run_bench(const RunConfig &cfg);

} // namespace lmagp

#endif // LMAGP_CLI_HPP_
