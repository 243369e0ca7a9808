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
#include <cstring>
#include <thread>

#include <doctest.h>

#include "lmagp/errors.hpp"
#include "lmagp/parallel.hpp"
#include "test_support.hpp"

using namespace lmagp;
using namespace lmagp::testing;

namespace {

// Messages the protocol must exchange, counted from the communication
// pattern rather than from the implementation's loops.
std::size_t expected_messages(int m_count, int b) {
  std::size_t within = 0, upper = 0, transpose = 0;
  for (int m = 0; m < m_count; ++m) {
    for (int k = m + 1; k <= std::min(m + b, m_count - 1); ++k) {
      const int first = std::max(0, m - b);
      const int last = std::min(m - 1, k - b - 1);
      within += static_cast<std::size_t>(std::max(0, last - first + 1));
    }
    for (int n = m + b + 1; n < m_count; ++n)
      upper += static_cast<std::size_t>(std::min(b, m));
    for (int k = m + b + 1; k < m_count; ++k)
      transpose += static_cast<std::size_t>(k - std::max(0, k - b) + 1);
  }
  const auto mm = static_cast<std::size_t>(m_count);
  const std::size_t lower = upper;
  return within + upper + lower + transpose + mm * (4 + mm) + 5 * mm + 2 * mm;
}

std::size_t count_kind(const std::vector<std::string> &trace,
                       const char *kind) {
  return static_cast<std::size_t>(
      std::count_if(trace.begin(), trace.end(), [&](const std::string &l) {
        const auto a = l.find(',');
        const auto b = l.find(',', a + 1);
        return l.substr(a + 1, b - a - 1) == kind;
      }));
}

bool bit_equal(const Vector &a, const Vector &b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(),
                     static_cast<std::size_t>(a.size()) * sizeof(double)) == 0;
}

} // namespace

TEST_CASE("message counts for four blocks and bandwidth one") {
  CHECK(expected_messages(4, 1) == 70);
  const Instance inst = random_instance(60, 16, 2, 4, 1, 6, 1);
  ParallelOptions opts;
  const ParallelResult r =
      run_parallel_lma(inst.train, inst.test, inst.h, inst.config, opts);
  CHECK(r.stats.messages == 70);
  CHECK(r.stats.trace.size() == 70);
  CHECK(count_kind(r.stats.trace, "rbar-block") == 10);
  CHECK(count_kind(r.stats.trace, "local-summary") == 32);
  CHECK(count_kind(r.stats.trace, "global-summary") == 20);
  CHECK(count_kind(r.stats.trace, "prediction") == 8);
  CHECK(r.stats.bytes > 0);
}

TEST_CASE("property: message counts follow the communication pattern") {
  for (int m_count = 2; m_count <= 7; ++m_count)
    for (int b = 1; b < m_count; ++b) {
      const Instance inst =
          random_instance(10 * m_count, 12, 2, m_count, b, 4, 50 + m_count);
      const ParallelResult r = run_parallel_lma(inst.train, inst.test, inst.h,
                                                inst.config, ParallelOptions{});
      CHECK(r.stats.messages == expected_messages(m_count, b));
    }
}

TEST_CASE("trace lines carry increasing sequence numbers") {
  const Instance inst = random_instance(40, 8, 2, 4, 2, 5, 2);
  const ParallelResult r = run_parallel_lma(inst.train, inst.test, inst.h,
                                            inst.config, ParallelOptions{});
  for (std::size_t i = 0; i < r.stats.trace.size(); ++i) {
    const std::string &line = r.stats.trace[i];
    CHECK(std::stoul(line.substr(0, line.find(','))) == i);
    CHECK(std::count(line.begin(), line.end(), ',') == 5);
  }
  std::vector<std::string> phases;
  for (const auto &[name, t] : r.stats.phase_times) {
    phases.push_back(name);
    CHECK(t >= 0.0);
  }
  CHECK(phases.front() == "within-band");
  CHECK(phases.back() == "gather");
  CHECK(std::find(phases.begin(), phases.end(), "transpose") != phases.end());
}

TEST_CASE("transport delivers in ascending sender order") {
  InProcessTransport t(3);
  auto msg = [](int src, int dst, double v) {
    Message m;
    m.kind = MessageKind::rbar_block;
    m.source = src;
    m.destination = dst;
    m.payload = Matrix::Constant(1, 1, v);
    return m;
  };
  t.send(msg(2, 0, 2.0));
  t.send(msg(1, 0, 1.0));
  t.send(msg(master_id, 0, -1.0));
  t.send(msg(1, 2, 5.0));
  CHECK(t.receive(0).empty());
  t.deliver();
  const auto got = t.receive(0);
  REQUIRE(got.size() == 3);
  CHECK(got[0].source == master_id);
  CHECK(got[1].source == 1);
  CHECK(got[2].source == 2);
  CHECK(got[0].seq < got[1].seq);
  CHECK(t.receive(0).empty());
  CHECK(t.receive(2).size() == 1);
  CHECK(t.message_count() == 4);
  CHECK(t.byte_count() == 4 * sizeof(double));
  CHECK(t.trace().front() == "0,rbar-block,-1,0,1,1");
}

TEST_CASE("shards hold their block and the next B blocks") {
  const LmaContext ctx = make_context(random_instance(50, 10, 2, 5, 2, 5, 3));
  const auto shards = make_shards(ctx.data(), 2);
  REQUIRE(shards.size() == 5);
  for (int m = 0; m < 5; ++m) {
    const WorkerShard &s = shards[m];
    CHECK(s.block == m);
    CHECK(s.train.coords == ctx.train_block(m).coords);
    CHECK(s.blanket.coords == ctx.blanket(m).coords);
    CHECK(s.blanket_outputs == ctx.blanket_outputs(m));
    CHECK(s.blanket_blocks.size() ==
          static_cast<std::size_t>(std::min(2, 4 - m)));
  }
}

TEST_CASE("parallel cross blocks equal the centralized ones") {
  for (int b : {1, 2}) {
    for (int m_count : {4, 6}) {
      const LmaContext ctx =
          make_context(random_instance(12 * m_count, 14, 2, m_count, b, 5,
                                       10 + m_count + b));
      const auto shards = make_shards(ctx.data(), b);
      const auto par =
          compute_rbar_cross_parallel(shards, ctx.hyper(), b, ParallelOptions{});
      const CrossCovariances cross = compute_rbar_cross(ctx);
      ResidualRecursion rec(ctx);
      for (int m = 0; m < m_count; ++m) {
        CHECK(max_abs_diff(par[m].rbar_block_u, cross.rbar[m]) <= 1e-12);
        CHECK(max_abs_diff(par[m].sigma_bar_block_u, cross.sigma_bar[m]) <=
              1e-12);
        const auto [first, last] = ctx.blanket_range(m);
        Index row = 0;
        for (int j = first; j <= last; ++j) {
          const Index dj = ctx.train_block(j).size();
          CHECK(max_abs_diff(par[m].rbar_blanket_u.middleRows(row, dj),
                             cross.rbar[j]) <= 1e-12);
          row += dj;
        }
        CHECK(row == par[m].rbar_blanket_u.rows());
      }
    }
  }
}

TEST_CASE("four workers, bandwidth one: band, upper and lower blocks") {
  const LmaContext ctx = make_context(random_instance(60, 20, 2, 4, 1, 6, 4));
  const auto shards = make_shards(ctx.data(), 1);
  const auto par =
      compute_rbar_cross_parallel(shards, ctx.hyper(), 1, ParallelOptions{});
  const auto toff = block_offsets(ctx.test_sizes());
  const auto cols = [&](const Matrix &m, int n) {
    return Matrix(m.middleCols(toff[n], ctx.test_sizes()[n]));
  };
  ResidualRecursion rec(ctx);
  for (int m = 0; m < 4; ++m) {
    const Index dm = ctx.train_block(m).size();
    for (int n = 0; n < 4; ++n) {
      const Matrix central = rec.block(m, n).block(
          0, dm, dm, ctx.test_sizes()[n]);
      const Matrix got = cols(par[m].rbar_block_u, n);
      if (std::abs(m - n) <= 1) {
        const Matrix direct = r_matrix(ctx.train_block(m), ctx.test_block(n),
                                       ctx.data().support, ctx.hyper());
        CHECK(max_abs_diff(got, direct) <= 1e-14);
      } else {
        CHECK(max_abs_diff(got, central) <= 1e-12);
      }
    }
  }
  // Lower corner block, obtained through the transposed recursion.
  const Index d3 = ctx.train_block(3).size();
  const Matrix u0d3 = rec.block(0, 3).block(ctx.train_block(0).size(), 0,
                                            ctx.test_sizes()[0], d3);
  CHECK(max_abs_diff(cols(par[3].rbar_block_u, 0), u0d3.transpose()) <= 1e-12);
}

TEST_CASE("parallel predictor equals the summary predictor") {
  for (int m_count : {4, 8})
    for (int b : {1, 2}) {
      const Instance inst =
          random_instance(15 * m_count, 25, 2, m_count, b, 8, 20 + m_count + b);
      const Prediction central = lma_predict_summary(
          inst.train, inst.test, inst.h, inst.config, false);
      const ParallelResult r = run_parallel_lma(inst.train, inst.test, inst.h,
                                                inst.config, ParallelOptions{});
      CHECK(max_abs_diff(r.prediction.mean, central.mean) <= 1e-8);
      CHECK(max_abs_diff(r.prediction.variance, central.variance) <= 1e-8);
      CHECK_FALSE(r.prediction.covariance.has_value());
    }
}

TEST_CASE("results do not depend on the thread count") {
  const Instance inst = random_instance(96, 30, 2, 8, 2, 8, 5);
  std::vector<ParallelResult> runs;
  for (int threads : {1, 2, 8}) {
    ParallelOptions opts;
    opts.threads = threads;
    runs.push_back(
        run_parallel_lma(inst.train, inst.test, inst.h, inst.config, opts));
  }
  for (std::size_t i = 1; i < runs.size(); ++i) {
    CHECK(bit_equal(runs[i].prediction.mean, runs[0].prediction.mean));
    CHECK(bit_equal(runs[i].prediction.variance, runs[0].prediction.variance));
    CHECK(runs[i].stats.trace == runs[0].stats.trace);
  }
}

TEST_CASE("a failing worker aborts the run with its phase and id") {
  const Instance inst = random_instance(40, 8, 2, 4, 1, 5, 6);
  for (int threads : {1, 4}) {
    ParallelOptions opts;
    opts.threads = threads;
    opts.fault_hook = [](const std::string &phase, int worker) {
      if (phase == "local-summary" && worker == 2)
        throw std::runtime_error("injected fault");
    };
    try {
      run_parallel_lma(inst.train, inst.test, inst.h, inst.config, opts);
      FAIL("expected RunAborted");
    } catch (const RunAborted &e) {
      CHECK(e.phase() == "local-summary");
      CHECK(e.worker() == 2);
      CHECK(std::string(e.what()).find("injected fault") != std::string::npos);
    }
  }
}

TEST_CASE("a master failure names the master") {
  const Instance inst = random_instance(40, 8, 2, 4, 1, 5, 6);
  ParallelOptions opts;
  opts.fault_hook = [](const std::string &phase, int worker) {
    if (phase == "reduce" && worker == master_id)
      throw std::runtime_error("master down");
  };
  try {
    run_parallel_lma(inst.train, inst.test, inst.h, inst.config, opts);
    FAIL("expected RunAborted");
  } catch (const RunAborted &e) {
    CHECK(e.phase() == "reduce");
    CHECK(e.worker() == master_id);
  }
}

TEST_CASE("a dropped message is a protocol error") {
  const Instance inst = random_instance(40, 8, 2, 4, 1, 5, 7);
  ParallelOptions opts;
  opts.message_filter = [](const Message &m) {
    return !(m.kind == MessageKind::rbar_block && m.source == 1);
  };
  try {
    run_parallel_lma(inst.train, inst.test, inst.h, inst.config, opts);
    FAIL("expected ProtocolError");
  } catch (const ProtocolError &e) {
    CHECK(std::string(e.what()).find("missing") != std::string::npos);
  }
  opts.message_filter = [](const Message &m) {
    return !(m.kind == MessageKind::prediction && m.source == 3);
  };
  CHECK_THROWS_AS(
      run_parallel_lma(inst.train, inst.test, inst.h, inst.config, opts),
      ProtocolError);
}

TEST_CASE("a stalled worker exceeds the phase timeout") {
  const Instance inst = random_instance(40, 8, 2, 4, 1, 5, 8);
  for (int threads : {1, 2}) {
    ParallelOptions opts;
    opts.threads = threads;
    opts.phase_timeout = std::chrono::milliseconds(50);
    opts.fault_hook = [](const std::string &phase, int worker) {
      if (phase == "transpose" && worker == 0)
        std::this_thread::sleep_for(std::chrono::milliseconds(300));
    };
    try {
      run_parallel_lma(inst.train, inst.test, inst.h, inst.config, opts);
      FAIL("expected RunAborted");
    } catch (const RunAborted &e) {
      CHECK(e.phase() == "transpose");
      CHECK(std::string(e.what()).find("timeout") != std::string::npos);
    }
  }
}

TEST_CASE("parallel argument checks") {
  Instance inst = random_instance(40, 8, 2, 4, 0, 5, 9);
  CHECK_THROWS_AS(run_parallel_lma(inst.train, inst.test, inst.h, inst.config,
                                   ParallelOptions{}),
                  InvalidArgument);
  inst.config.blocks = 1;
  inst.config.markov_order = 0;
  CHECK_THROWS_AS(run_parallel_lma(inst.train, inst.test, inst.h, inst.config,
                                   ParallelOptions{}),
                  InvalidArgument);
  inst.config.blocks = 4;
  inst.config.markov_order = 4;
  CHECK_THROWS_AS(run_parallel_lma(inst.train, inst.test, inst.h, inst.config,
                                   ParallelOptions{}),
                  InvalidArgument);
}

TEST_CASE("speedup report rows") {
  LmaConfig config;
  config.blocks = 4;
  config.markov_order = 1;
  config.support_size = 10;
  const Hyperparams h = Hyperparams::isotropic(2, 1.5, 1.0, 0.05, 0.0);
  const auto rows = speedup_report({120, 200}, config, h, 20, 2, 1);
  REQUIRE(rows.size() == 2);
  for (const auto &row : rows) {
    CHECK(row.t_centralized_s > 0.0);
    CHECK(row.t_parallel_s > 0.0);
    CHECK(row.speedup ==
          doctest::Approx(row.t_centralized_s / row.t_parallel_s));
    CHECK(row.max_abs_diff <= 1e-8);
  }
  CHECK(rows[1].n == 200);
}
