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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>

#include "cli_internal.hpp"
#include "lmagp/baselines.hpp"
#include "lmagp/blockmat.hpp"
#include "lmagp/errors.hpp"
#include "lmagp/io.hpp"
#include "lmagp/lma.hpp"
#include "lmagp/parallel.hpp"
#include "lmagp/synthetic.hpp"

namespace lmagp {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

class UsageError : public InvalidArgument {
public:
  using InvalidArgument::InvalidArgument;
};

void require(const std::string &value, const char *flag) {
  if (value.empty())
    throw UsageError(std::string("missing required flag ") + flag);
}

// Operation-count models of the centralized and distributed predictors,
// used only as run metadata.
void cost_model(MetricsReport &r, double d, double s, double u, double m,
                double b) {
  const double blk = b * d / m;
  r.set("cost_model_centralized",
        d * s * s + b * d * blk * blk + u * d * (s + blk));
  r.set("cost_model_parallel",
        s * s * s + blk * blk * blk + u * (d / m) * (s + blk));
}

int cmd_predict(const RunConfig &cfg, std::ostream &out) {
  require(cfg.train, "--train");
  require(cfg.test, "--test");
  require(cfg.out, "--out");
  if (cfg.workers > 0 && cfg.want_cov)
    throw UsageError("--want-cov is not available with --workers");
  if (cfg.workers > 0 && cfg.method != "lma")
    throw UsageError("--workers applies to --method lma only");

  const Dataset train = load_csv(cfg.train);
  const Dataset test = load_csv(cfg.test);
  if (!train.has_outputs())
    throw UsageError("--train file has no y column");
  if (test.size() > 0 && test.dimension() != train.dimension())
    throw UsageError("--test inputs have a different dimension than --train");
  const Hyperparams h = cfg.hyper(train.dimension());

  MetricsReport report;
  cfg.echo(report);
  reset_jitter_stats();
  const auto start = Clock::now();
  Prediction pred;
  RunStats stats;
  bool parallel = false;
  if (cfg.method == "fgp") {
    pred = fgp_predict(train, test.inputs, h, cfg.want_cov);
  } else if (cfg.method == "pic") {
    LmaConfig lc = cfg.lma();
    lc.markov_order = 0;
    const LmaProblem p = prepare_problem(train, test.inputs, lc);
    pred = pic_predict_direct(train, test.inputs, h, p.support, p.partition,
                              cfg.want_cov);
  } else if (cfg.workers > 0) {
    ParallelOptions opts;
    opts.threads = cfg.workers;
    ParallelResult r = run_parallel_lma(train, test.inputs, h, cfg.lma(), opts);
    pred = std::move(r.prediction);
    stats = std::move(r.stats);
    parallel = true;
  } else {
    pred = lma_predict(train, test.inputs, h, cfg.lma(), cfg.want_cov);
  }
  const double elapsed = seconds_since(start);

  write_predictions(cfg.out, test.inputs, pred);
  if (cfg.want_cov && pred.covariance)
    write_matrix(cfg.out + ".cov.csv", *pred.covariance);
  if (!cfg.trace.empty()) {
    std::ofstream os(cfg.trace);
    if (!os)
      throw Error("cannot open " + cfg.trace + " for writing");
    os << "seq,kind,src,dst,rows,cols\n";
    for (const auto &line : stats.trace)
      os << line << '\n';
  }

  report.set("n_train", static_cast<long long>(train.size()));
  report.set("n_test", static_cast<long long>(test.size()));
  report.set("dimension", static_cast<long long>(train.dimension()));
  const bool has_truth = test.has_outputs() && test.size() > 0;
  if (has_truth)
    report.set("rmse", rmse(pred.mean, test.outputs));
  else
    report.set("rmse", std::string("NA"));
  report.set("wall_time_s", elapsed);
  const JitterStats js = jitter_stats();
  report.set("jitter_factorizations", static_cast<long long>(js.factorizations));
  report.set("jitter_applied", static_cast<long long>(js.jittered));
  report.set("jitter_max", js.max_jitter);
  if (parallel) {
    report.set("messages", static_cast<long long>(stats.messages));
    report.set("message_bytes", static_cast<long long>(stats.bytes));
    for (const auto &[phase, secs] : stats.phase_times)
      report.set("phase_time_s." + phase, secs);
  }
  if (cfg.method == "lma")
    cost_model(report, static_cast<double>(train.size()),
               static_cast<double>(cfg.support_size),
               static_cast<double>(test.size()), cfg.blocks,
               cfg.markov_order);
  report.write(cfg.out + ".metrics");

  out << "wrote " << test.size() << " predictions to " << cfg.out << '\n';
  if (has_truth)
    out << "rmse=" << report.get("rmse") << '\n';
  out << "wall_time_s=" << report.get("wall_time_s") << '\n';
  return exit_ok;
}

int cmd_toy(const RunConfig &cfg, std::ostream &out) {
  const std::string prefix = cfg.out.empty() ? std::string("toy") : cfg.out;
  const ToyReport t = run_toy(cfg.seed, cfg.grid_spacing);
  write_csv(prefix + "_train.csv", toy::generate(cfg.seed));

  std::vector<std::vector<std::string>> rows;
  auto band = [](const Prediction &p, Index i, std::vector<std::string> &row) {
    const double sd = std::sqrt(std::max(p.variance(i), 0.0));
    row.push_back(format_double(p.mean(i)));
    row.push_back(format_double(p.mean(i) - 1.96 * sd));
    row.push_back(format_double(p.mean(i) + 1.96 * sd));
  };
  for (Index i = 0; i < t.grid.rows(); ++i) {
    std::vector<std::string> row{format_double(t.grid(i, 0)),
                                 format_double(t.truth(i))};
    band(t.lma, i, row);
    band(t.fgp, i, row);
    band(t.local, i, row);
    rows.push_back(std::move(row));
  }
  write_table(prefix + "_grid.csv",
              {"x1", "truth", "lma_mean", "lma_lower", "lma_upper", "fgp_mean",
               "fgp_lower", "fgp_upper", "local_mean", "local_lower",
               "local_upper"},
              rows);

  // The toy problem fixes its own model settings; echo those instead of
  // the command-line defaults.
  RunConfig used = cfg;
  const Hyperparams h = toy::hyperparams();
  used.markov_order = toy::markov_order;
  used.support_size = toy::support_size;
  used.blocks = toy::blocks;
  used.signal_var = h.signal_var;
  used.noise_var = h.noise_var;
  used.lengthscales = {h.lengthscales[0]};
  used.prior_mean = h.prior_mean;
  MetricsReport report;
  used.echo(report);
  report.set("lma_boundary_jump", t.lma_jump);
  report.set("lma_interior_increment", t.lma_increment);
  report.set("local_boundary_jump", t.local_jump);
  report.set("local_interior_increment", t.local_increment);
  report.set("lma_vs_fgp_rmse", t.lma_vs_fgp_rmse);
  report.set("lma_rmse_vs_truth", rmse(t.lma.mean, t.truth));
  report.set("fgp_rmse_vs_truth", rmse(t.fgp.mean, t.truth));
  report.set("wall_time_s", t.seconds);
  report.write(prefix + ".metrics");
  out << report.to_string();
  return exit_ok;
}

int cmd_bench(const RunConfig &cfg, std::ostream &out) {
  require(cfg.out, "--out");
  const auto rows = run_bench(cfg);
  std::vector<std::vector<std::string>> table;
  for (const auto &r : rows)
    table.push_back({r.method, std::to_string(r.n), std::to_string(r.blocks),
                     std::to_string(r.markov_order),
                     std::to_string(r.support_size), format_double(r.rmse),
                     format_double(r.time_s),
                     r.speedup < 0 ? std::string("NA")
                                   : format_double(r.speedup)});
  const std::vector<std::string> header{"method", "n",    "M",       "B",
                                        "S",      "rmse", "time_s",  "speedup"};
  write_table(cfg.out, header, table);
  MetricsReport report;
  cfg.echo(report);
  report.write(cfg.out + ".metrics");
  for (std::size_t i = 0; i < header.size(); ++i)
    out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto &row : table) {
    for (std::size_t i = 0; i < row.size(); ++i)
      out << (i ? "," : "") << row[i];
    out << '\n';
  }
  return exit_ok;
}

} // namespace

std::pair<double, double> boundary_statistics(const Matrix &grid,
                                              const Vector &mean) {
  double jump = 0.0, increment = 0.0;
  for (Index i = 0; i + 1 < grid.rows(); ++i) {
    const double step = std::abs(mean(i + 1) - mean(i));
    if (toy::block_of(grid(i, 0)) != toy::block_of(grid(i + 1, 0)))
      jump = std::max(jump, step);
    else
      increment = std::max(increment, step);
  }
  return {jump, increment};
}

ToyReport run_toy(std::uint64_t seed, double spacing) {
  const auto start = Clock::now();
  const Dataset train = toy::generate(seed);
  const Hyperparams h = toy::hyperparams();
  ToyReport t;
  t.grid = toy::grid(spacing);
  t.truth.resize(t.grid.rows());
  for (Index i = 0; i < t.grid.rows(); ++i)
    t.truth(i) = toy::truth(t.grid(i, 0));

  const BlockPartition part = toy::partition(train, t.grid);
  const SupportSet support = select_support(train, toy::support_size, seed);
  const LmaContext ctx(make_blocked(train, t.grid, part, support), h,
                       toy::markov_order);
  t.lma = lma_predict_summary(ctx, false);
  t.fgp = fgp_predict(train, t.grid, h, false);

  t.local.mean.resize(t.grid.rows());
  t.local.variance.resize(t.grid.rows());
  for (int m = 0; m < part.blocks(); ++m) {
    Dataset sub;
    const auto &rows = part.train_blocks[m];
    sub.inputs.resize(static_cast<Index>(rows.size()), 1);
    sub.outputs.resize(static_cast<Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      sub.inputs(static_cast<Index>(i), 0) = train.inputs(rows[i], 0);
      sub.outputs(static_cast<Index>(i)) = train.outputs(rows[i]);
    }
    const auto &cells = part.test_blocks[m];
    Matrix x(static_cast<Index>(cells.size()), 1);
    for (std::size_t i = 0; i < cells.size(); ++i)
      x(static_cast<Index>(i), 0) = t.grid(cells[i], 0);
    const Prediction p = fgp_predict(sub, x, h, false);
    for (std::size_t i = 0; i < cells.size(); ++i) {
      t.local.mean(cells[i]) = p.mean(static_cast<Index>(i));
      t.local.variance(cells[i]) = p.variance(static_cast<Index>(i));
    }
  }

  std::tie(t.lma_jump, t.lma_increment) = boundary_statistics(t.grid, t.lma.mean);
  std::tie(t.local_jump, t.local_increment) =
      boundary_statistics(t.grid, t.local.mean);
  t.lma_vs_fgp_rmse = rmse(t.lma.mean, t.fgp.mean);
  t.seconds = seconds_since(start);
  return t;
}

std::vector<BenchRow> run_bench(const RunConfig &cfg) {
  cfg.lma().validate();
  if (cfg.markov_order < 1)
    throw UsageError("bench needs --markov-order >= 1");
  const Hyperparams h = cfg.hyper(cfg.dimension);
  std::vector<BenchRow> rows;
  for (Index n : cfg.sizes) {
    const GpSample data = sample_gp(n, cfg.test_size, h, 0.0, 10.0,
                                    cfg.seed + static_cast<std::uint64_t>(n));
    const Matrix &u = data.test.inputs;
    auto row = [&](const std::string &method, double secs,
                   const Prediction &p) {
      BenchRow r;
      r.method = method;
      r.n = n;
      r.blocks = cfg.blocks;
      r.markov_order = cfg.markov_order;
      r.support_size = cfg.support_size;
      r.rmse = rmse(p.mean, data.test.outputs);
      r.time_s = secs;
      return r;
    };
    if (n <= cfg.fgp_max) {
      const auto t0 = Clock::now();
      const Prediction p = fgp_predict(data.train, u, h, false);
      BenchRow r = row("fgp", seconds_since(t0), p);
      r.blocks = 1;
      r.markov_order = 0;
      r.support_size = 0;
      rows.push_back(r);
    }
    auto t0 = Clock::now();
    const Prediction central =
        lma_predict_summary(data.train, u, h, cfg.lma(), false);
    const double t_central = seconds_since(t0);
    rows.push_back(row("lma", t_central, central));
    if (cfg.workers > 0) {
      ParallelOptions opts;
      opts.threads = cfg.workers;
      t0 = Clock::now();
      const ParallelResult par =
          run_parallel_lma(data.train, u, h, cfg.lma(), opts);
      BenchRow r = row("lma-parallel", seconds_since(t0), par.prediction);
      r.speedup = t_central / r.time_s;
      rows.push_back(r);
    }
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const BenchRow &a, const BenchRow &b) {
                     if (a.method != b.method)
                       return a.method < b.method;
                     return a.n < b.n;
                   });
  return rows;
}

int run_cli(const std::vector<std::string> &args, std::ostream &out,
            std::ostream &err) {
  RunConfig cfg;
  const int code = detail::parse_into(args, cfg, out, err);
  if (code >= 0)
    return code;
  try {
    if (cfg.command == "predict")
      return cmd_predict(cfg, out);
    if (cfg.command == "toy")
      return cmd_toy(cfg, out);
    return cmd_bench(cfg, out);
  } catch (const DataFormatError &e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const InvalidArgument &e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const NumericalError &e) {
    err << "numerical error: " << e.what() << '\n';
    return exit_numerical;
  } catch (const ProtocolError &e) {
    err << "protocol error: " << e.what() << '\n';
    return exit_protocol;
  } catch (const RunAborted &e) {
    err << "aborted: " << e.what() << '\n';
    return exit_protocol;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  }
}

} // namespace lmagp
