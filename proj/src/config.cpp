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

#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "cli_internal.hpp"
#include "lmagp/errors.hpp"
#include "lmagp/io.hpp"

namespace lmagp {

namespace {

void build(CLI::App &app, RunConfig &cfg) {
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_config("--config", "", "Flat key=value file; keys are flag names");

  app.add_option("command", cfg.command, "predict, toy or bench")
      ->required()
      ->check(CLI::IsMember({"predict", "toy", "bench"}));
  app.add_option("--method", cfg.method, "fgp, pic or lma")
      ->check(CLI::IsMember({"fgp", "pic", "lma"}));
  app.add_option("--train", cfg.train, "Training CSV (x1..xd,y)");
  app.add_option("--test", cfg.test, "Test CSV (x1..xd[,y])");
  app.add_option("--out", cfg.out, "Output path or prefix");
  app.add_option("--markov-order", cfg.markov_order, "Markov order B")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--support-size", cfg.support_size, "Support set size")
      ->check(CLI::PositiveNumber);
  app.add_option("--blocks", cfg.blocks, "Number of blocks M")
      ->check(CLI::PositiveNumber);
  app.add_option("--workers", cfg.workers,
                 "Threads for the message-passing executor (0: centralized)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--seed", cfg.seed, "Seed for support selection and data");
  app.add_flag("--want-cov", cfg.want_cov, "Write the full covariance");
  app.add_option("--trace", cfg.trace, "Message trace output path");

  app.add_option("--signal-var", cfg.signal_var, "Signal variance")
      ->check(CLI::PositiveNumber);
  app.add_option("--noise-var", cfg.noise_var, "Noise variance")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--lengthscales", cfg.lengthscales,
                 "Comma-separated length-scales (one value is broadcast)")
      ->delimiter(',')
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll)
      ->check(CLI::PositiveNumber);
  app.add_option("--prior-mean", cfg.prior_mean, "Constant prior mean");

  app.add_option("--sizes", cfg.sizes, "Benchmark training sizes")
      ->delimiter(',')
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll)
      ->check(CLI::PositiveNumber);
  app.add_option("--test-size", cfg.test_size, "Benchmark test size")
      ->check(CLI::PositiveNumber);
  app.add_option("--dim", cfg.dimension, "Benchmark input dimension")
      ->check(CLI::PositiveNumber);
  app.add_option("--fgp-max", cfg.fgp_max,
                 "Largest benchmark size that also runs the exact GP");
  app.add_option("--grid-spacing", cfg.grid_spacing, "Toy grid spacing")
      ->check(CLI::PositiveNumber);
}

} // namespace

LmaConfig RunConfig::lma() const {
  LmaConfig c;
  c.markov_order = markov_order;
  c.support_size = support_size;
  c.blocks = blocks;
  c.support_seed = seed;
  return c;
}

Hyperparams RunConfig::hyper(Index d) const {
  Hyperparams h;
  h.signal_var = signal_var;
  h.noise_var = noise_var;
  h.prior_mean = prior_mean;
  if (lengthscales.size() == 1) {
    h.lengthscales = Vector::Constant(d, lengthscales.front());
  } else {
    h.lengthscales.resize(static_cast<Index>(lengthscales.size()));
    for (std::size_t i = 0; i < lengthscales.size(); ++i)
      h.lengthscales(static_cast<Index>(i)) = lengthscales[i];
  }
  h.validate(d);
  return h;
}

void RunConfig::echo(MetricsReport &r) const {
  r.set("command", command);
  r.set("method", method);
  r.set("train", train);
  r.set("test", test);
  r.set("out", out);
  r.set("markov-order", static_cast<long long>(markov_order));
  r.set("support-size", static_cast<long long>(support_size));
  r.set("blocks", static_cast<long long>(blocks));
  r.set("workers", static_cast<long long>(workers));
  r.set("seed", std::to_string(seed));
  r.set("want-cov", std::string(want_cov ? "true" : "false"));
  r.set("trace", trace);
  r.set("config", config);
  r.set("signal-var", signal_var);
  r.set("noise-var", noise_var);
  std::string ls;
  for (std::size_t i = 0; i < lengthscales.size(); ++i)
    ls += (i ? "," : "") + format_double(lengthscales[i]);
  r.set("lengthscales", ls);
  r.set("prior-mean", prior_mean);
  if (command == "bench") {
    std::string sz;
    for (std::size_t i = 0; i < sizes.size(); ++i)
      sz += (i ? "," : "") + std::to_string(sizes[i]);
    r.set("sizes", sz);
    r.set("test-size", static_cast<long long>(test_size));
    r.set("dim", static_cast<long long>(dimension));
    r.set("fgp-max", static_cast<long long>(fgp_max));
  }
  if (command == "toy")
    r.set("grid-spacing", grid_spacing);
}

namespace detail {

int parse_into(const std::vector<std::string> &args, RunConfig &cfg,
               std::ostream &out, std::ostream &err) {
  CLI::App app{"Gaussian process regression with low-rank plus Markov "
               "residual approximations"};
  app.name("lmagp");
  build(app, cfg);
  try {
    app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_usage;
  }
  if (auto *opt = app.get_option_no_throw("--config"); opt && opt->count())
    cfg.config = opt->as<std::string>();
  return -1;
}

} // namespace detail

RunConfig parse_args(const std::vector<std::string> &args) {
  RunConfig cfg;
  std::ostringstream out, err;
  const int code = detail::parse_into(args, cfg, out, err);
  if (code >= 0)
    throw InvalidArgument(err.str().empty() ? out.str() : err.str());
  return cfg;
}

} // namespace lmagp
