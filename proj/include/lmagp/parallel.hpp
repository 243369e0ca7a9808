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

#ifndef LMAGP_PARALLEL_HPP_
#define LMAGP_PARALLEL_HPP_

#include <chrono>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "lmagp/baselines.hpp"
#include "lmagp/lma.hpp"
#include "lmagp/partition.hpp"

namespace lmagp {

/// Worker id of the master node.
inline constexpr int master_id = -1;

/// Data held by one worker: its block D_m, the next B blocks D^B_m with
/// their outputs, the support set and the test inputs.
struct WorkerShard {
  int block = 0;
  PointSet train;
  Vector outputs;
  std::vector<PointSet> blanket_blocks; // D_{m+1}, ..., D_{m+B}
  PointSet blanket;
  Vector blanket_outputs;
  std::vector<PointSet> test_blocks; // U_1..U_M; worker m predicts U_m
  PointSet support;
};

std::vector<WorkerShard> make_shards(const BlockedData &data, int bandwidth);

enum class MessageKind { rbar_block, local_summary, global_summary, prediction };
const char *to_string(MessageKind kind);

struct Message {
  MessageKind kind = MessageKind::rbar_block;
  std::string label; // payload name, e.g. "rbar_du"
  int source = 0;
  int destination = 0;
  int row_block = -1;
  int col_block = -1;
  Matrix payload;
  std::uint64_t seq = 0;

  std::size_t bytes() const {
    return static_cast<std::size_t>(payload.size()) * sizeof(double);
  }
  /// seq,kind,src,dst,rows,cols
  std::string trace_line() const;
};

/// Reliable point-to-point channels. Messages sent during a superstep
/// become visible to their receivers after deliver().
class Transport {
public:
  virtual ~Transport() = default;
  virtual void send(Message msg) = 0;
  /// Makes every buffered message visible, in ascending sender order.
  virtual void deliver() = 0;
  /// Removes and returns the messages delivered to `worker`.
  virtual std::vector<Message> receive(int worker) = 0;
};

/// In-process transport. Each sender writes its own outbox, so workers may
/// send concurrently within a superstep; deliver() must not overlap sends.
class InProcessTransport : public Transport {
public:
  explicit InProcessTransport(int workers);

  void send(Message msg) override;
  void deliver() override;
  std::vector<Message> receive(int worker) override;

  /// Optional filter; returning false drops the message (fault injection).
  std::function<bool(const Message &)> filter;

  std::size_t message_count() const { return count_; }
  std::size_t byte_count() const { return bytes_; }
  const std::vector<std::string> &trace() const { return trace_; }

private:
  std::size_t slot(int worker) const;

  int workers_;
  std::vector<std::vector<Message>> outbox_;
  std::vector<std::vector<Message>> inbox_;
  std::vector<std::string> trace_;
  std::uint64_t next_seq_ = 0;
  std::size_t count_ = 0;
  std::size_t bytes_ = 0;
};

struct ParallelOptions {
  int threads = 1;
  std::chrono::milliseconds phase_timeout{std::chrono::minutes(10)};
  /// Called at the start of every worker task; a throw aborts the run.
  std::function<void(const std::string &phase, int worker)> fault_hook;
  /// Optional message filter installed on the transport.
  std::function<bool(const Message &)> message_filter;
};

struct RunStats {
  double wall_time_s = 0.0;
  std::vector<std::pair<std::string, double>> phase_times;
  std::size_t messages = 0;
  std::size_t bytes = 0;
  std::vector<std::string> trace;
};

/// R-bar and Sigma-bar rows held by one worker after the cross phases.
struct WorkerCross {
  Matrix rbar_block_u;      // R-bar_{D_m U}
  Matrix rbar_blanket_u;    // R-bar_{D^B_m U}
  Matrix sigma_bar_block_u; // Sigma-bar_{D_m U}
  Matrix sigma_bar_blanket_u;
};

/// Cross blocks computed by message passing between workers.
std::vector<WorkerCross>
compute_rbar_cross_parallel(const std::vector<WorkerShard> &shards,
                            const Hyperparams &h, int bandwidth,
                            const ParallelOptions &opts,
                            RunStats *stats = nullptr);

struct ParallelResult {
  Prediction prediction; // mean and variance
  RunStats stats;
};

/// Full predictor with one logical worker per block and a dedicated master.
ParallelResult run_parallel_lma(const Dataset &train, const Matrix &test,
                                const Hyperparams &h, const LmaConfig &config,
                                const ParallelOptions &opts);
ParallelResult run_parallel_lma(const BlockedData &data, const Hyperparams &h,
                                int bandwidth, const ParallelOptions &opts);

struct SpeedupRow {
  Index n = 0;
  double t_centralized_s = 0.0;
  double t_parallel_s = 0.0;
  double speedup = 0.0;
  double max_abs_diff = 0.0; // between the two predictions
};

/// Times the centralized summary predictor against the parallel run on
/// GP-sampled data of each size (inputs uniform on [0, 10]^d).
std::vector<SpeedupRow> speedup_report(const std::vector<Index> &sizes,
                                       const LmaConfig &config,
                                       const Hyperparams &h, Index n_test,
                                       int threads, std::uint64_t seed);

} // namespace lmagp

#endif // LMAGP_PARALLEL_HPP_
