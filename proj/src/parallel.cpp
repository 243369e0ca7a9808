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

#include "lmagp/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <exception>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include "lmagp/errors.hpp"
#include "lmagp/synthetic.hpp"

namespace lmagp {

using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Matrix vstack(const std::vector<const Matrix *> &parts, Index cols) {
  Index rows = 0;
  for (const Matrix *p : parts)
    rows += p->rows();
  Matrix out(rows, cols);
  Index at = 0;
  for (const Matrix *p : parts) {
    out.middleRows(at, p->rows()) = *p;
    at += p->rows();
  }
  return out;
}

} // namespace

std::vector<WorkerShard> make_shards(const BlockedData &data, int bandwidth) {
  const int count = data.blocks();
  if (bandwidth < 0 || bandwidth > count - 1)
    throw InvalidArgument("markov order must lie in [0, M-1]");
  std::vector<WorkerShard> out(count);
  for (int m = 0; m < count; ++m) {
    WorkerShard &s = out[m];
    s.block = m;
    s.train = data.train[m];
    s.outputs = data.outputs[m];
    const int last = std::min(m + bandwidth, count - 1);
    Index ny = 0;
    for (int k = m + 1; k <= last; ++k) {
      s.blanket_blocks.push_back(data.train[k]);
      ny += data.outputs[k].size();
    }
    s.blanket = s.blanket_blocks.empty()
                    ? PointSet{Matrix(0, data.support.dimension()), {}}
                    : PointSet::concat(s.blanket_blocks);
    s.blanket_outputs.resize(ny);
    Index at = 0;
    for (int k = m + 1; k <= last; ++k) {
      s.blanket_outputs.segment(at, data.outputs[k].size()) = data.outputs[k];
      at += data.outputs[k].size();
    }
    s.test_blocks = data.test;
    s.support = data.support;
  }
  return out;
}

const char *to_string(MessageKind kind) {
  switch (kind) {
  case MessageKind::rbar_block:
    return "rbar-block";
  case MessageKind::local_summary:
    return "local-summary";
  case MessageKind::global_summary:
    return "global-summary";
  case MessageKind::prediction:
    return "prediction";
  }
  return "unknown";
}

std::string Message::trace_line() const {
  std::ostringstream os;
  os << seq << ',' << to_string(kind) << ',' << source << ',' << destination
     << ',' << payload.rows() << ',' << payload.cols();
  return os.str();
}

InProcessTransport::InProcessTransport(int workers)
    : workers_(workers), outbox_(static_cast<std::size_t>(workers) + 1),
      inbox_(static_cast<std::size_t>(workers) + 1) {
  if (workers < 1)
    throw InvalidArgument("transport needs at least one worker");
}

std::size_t InProcessTransport::slot(int worker) const {
  if (worker < master_id || worker >= workers_)
    throw ProtocolError("unknown worker id " + std::to_string(worker));
  return static_cast<std::size_t>(worker + 1);
}

void InProcessTransport::send(Message msg) {
  slot(msg.destination);
  outbox_[slot(msg.source)].push_back(std::move(msg));
}

void InProcessTransport::deliver() {
  for (auto &box : outbox_) {
    for (auto &msg : box) {
      if (filter && !filter(msg))
        continue;
      msg.seq = next_seq_++;
      ++count_;
      bytes_ += msg.bytes();
      trace_.push_back(msg.trace_line());
      inbox_[slot(msg.destination)].push_back(std::move(msg));
    }
    box.clear();
  }
}

std::vector<Message> InProcessTransport::receive(int worker) {
  std::vector<Message> out;
  out.swap(inbox_[slot(worker)]);
  return out;
}

namespace {

// Runs bulk-synchronous supersteps: every worker task of a step runs to
// completion, then the buffered messages are delivered.
class Executor {
public:
  Executor(int workers, const ParallelOptions &opts,
           InProcessTransport &transport, RunStats &stats)
      : workers_(workers), opts_(opts), transport_(transport), stats_(stats) {}

  void workers_step(const std::string &phase,
                    const std::function<void(int)> &task) {
    const auto start = Clock::now();
    std::vector<std::exception_ptr> errors(workers_);
    std::vector<char> done(workers_, 0);
    const int threads = std::clamp(opts_.threads, 1, workers_);
    auto run_one = [&](int m) {
      try {
        if (opts_.fault_hook)
          opts_.fault_hook(phase, m);
        task(m);
      } catch (...) {
        errors[m] = std::current_exception();
      }
    };

    bool timed_out = false;
    if (threads == 1) {
      for (int m = 0; m < workers_; ++m) {
        run_one(m);
        done[m] = 1;
        if (Clock::now() - start > opts_.phase_timeout) {
          timed_out = true;
          break;
        }
      }
    } else {
      std::atomic<int> next{0};
      std::atomic<bool> abort{false};
      std::mutex mu;
      std::condition_variable cv;
      int finished = 0;
      std::vector<std::thread> pool;
      for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
          for (;;) {
            if (abort.load())
              return;
            const int m = next.fetch_add(1);
            if (m >= workers_)
              return;
            run_one(m);
            std::lock_guard<std::mutex> lock(mu);
            done[m] = 1;
            ++finished;
            cv.notify_all();
          }
        });
      {
        std::unique_lock<std::mutex> lock(mu);
        timed_out = !cv.wait_until(lock, start + opts_.phase_timeout,
                                   [&] { return finished == workers_; });
      }
      if (timed_out)
        abort = true;
      for (auto &t : pool)
        t.join();
    }

    for (int m = 0; m < workers_; ++m) {
      if (!errors[m])
        continue;
      try {
        std::rethrow_exception(errors[m]);
      } catch (const ProtocolError &) {
        throw;
      } catch (const RunAborted &) {
        throw;
      } catch (const std::exception &e) {
        throw RunAborted(phase, m, e.what());
      }
    }
    if (timed_out) {
      int slow = 0;
      while (slow < workers_ && done[slow])
        ++slow;
      throw RunAborted(phase, slow < workers_ ? slow : workers_ - 1,
                       "phase timeout exceeded");
    }
    transport_.deliver();
    stats_.phase_times.emplace_back(phase, seconds_since(start));
  }

  void master_step(const std::string &phase, const std::function<void()> &task) {
    const auto start = Clock::now();
    try {
      if (opts_.fault_hook)
        opts_.fault_hook(phase, master_id);
      task();
    } catch (const ProtocolError &) {
      throw;
    } catch (const RunAborted &) {
      throw;
    } catch (const std::exception &e) {
      throw RunAborted(phase, master_id, e.what());
    }
    transport_.deliver();
    stats_.phase_times.emplace_back(phase, seconds_since(start));
  }

  std::string trace_tail(std::size_t lines = 8) const {
    const auto &t = transport_.trace();
    std::string out;
    const std::size_t from = t.size() > lines ? t.size() - lines : 0;
    for (std::size_t i = from; i < t.size(); ++i)
      out += "\n  " + t[i];
    return out;
  }

private:
  int workers_;
  const ParallelOptions &opts_;
  InProcessTransport &transport_;
  RunStats &stats_;
};

using Key = std::pair<int, int>;

struct Worker {
  const WorkerShard *shard = nullptr;
  int m = 0;
  int count = 0;
  int bandwidth = 0;
  const Hyperparams *h = nullptr;

  std::unique_ptr<SupportProjector> proj;
  BlanketTerms terms;
  Matrix w_test; // R_{U_m D^B_m} R_{D^B_m D^B_m}^{-1}
  std::map<Key, Matrix> rdu; // R-bar_{D_j U_n}
  std::map<Key, Matrix> rdd; // R-bar_{D_j D_k}
  std::map<int, Matrix> rud; // R-bar_{U_m D_k}
  WorkerCross cross;

  // Global summary pieces received from the master.
  std::map<std::string, Matrix> global;

  const PointSet &train_block(int j) const {
    if (j == m)
      return shard->train;
    return shard->blanket_blocks.at(static_cast<std::size_t>(j - m - 1));
  }
  int blanket_last() const { return std::min(m + bandwidth, count - 1); }
};

class Protocol {
public:
  Protocol(const std::vector<WorkerShard> &shards, const Hyperparams &h,
           int bandwidth, const ParallelOptions &opts, RunStats &stats)
      : shards_(shards), h_(h), b_(bandwidth),
        count_(static_cast<int>(shards.size())), transport_(count_),
        exec_(count_, opts, transport_, stats), stats_(stats) {
    if (count_ < 2)
      throw InvalidArgument("the parallel predictor needs at least 2 blocks");
    if (b_ < 1 || b_ > count_ - 1)
      throw InvalidArgument("the parallel predictor needs 1 <= B <= M-1");
    transport_.filter = opts.message_filter;
    workers_.resize(count_);
    for (int m = 0; m < count_; ++m) {
      Worker &w = workers_[m];
      w.shard = &shards_[m];
      w.m = m;
      w.count = count_;
      w.bandwidth = b_;
      w.h = &h_;
    }
    for (const auto &u : shards_.front().test_blocks)
      test_sizes_.push_back(u.size());
  }

  void run_cross() {
    exec_.workers_step("within-band", [&](int m) { within_band(workers_[m]); });
    for (int i = 1; i <= count_ - 1 - b_; ++i)
      exec_.workers_step("upper:" + std::to_string(i),
                         [&](int m) { upper(workers_[m], i); });
    for (int i = 1; i <= count_ - 1 - b_; ++i)
      exec_.workers_step("lower:" + std::to_string(i),
                         [&](int m) { lower(workers_[m], i); });
    exec_.workers_step("transpose", [&](int m) { transpose(workers_[m]); });
  }

  std::vector<WorkerCross> assemble_only() {
    exec_.workers_step("assemble", [&](int m) {
      absorb(workers_[m]);
      assemble(workers_[m]);
    });
    std::vector<WorkerCross> out;
    for (auto &w : workers_)
      out.push_back(std::move(w.cross));
    return out;
  }

  Prediction run_summary(const std::vector<Index> &test_order) {
    exec_.workers_step("local-summary",
                       [&](int m) { local_summary_step(workers_[m]); });
    exec_.master_step("reduce", [&] { reduce(); });
    exec_.workers_step("predict", [&](int m) { predict(workers_[m]); });
    Prediction blocked;
    exec_.master_step("gather", [&] { blocked = gather(); });
    return unpermute(blocked, test_order);
  }

  void finish() {
    stats_.messages = transport_.message_count();
    stats_.bytes = transport_.byte_count();
    stats_.trace = transport_.trace();
  }

private:
  void send(int src, int dst, MessageKind kind, const std::string &label,
            int row, int col, Matrix payload) {
    Message msg;
    msg.kind = kind;
    msg.label = label;
    msg.source = src;
    msg.destination = dst;
    msg.row_block = row;
    msg.col_block = col;
    msg.payload = std::move(payload);
    transport_.send(std::move(msg));
  }

  [[noreturn]] void missing(const Worker &w, const std::string &what, int row,
                            int col) const {
    throw ProtocolError("worker " + std::to_string(w.m) + " is missing " +
                        what + " (" + std::to_string(row) + "," +
                        std::to_string(col) + "); last messages:" +
                        exec_.trace_tail());
  }

  const Matrix &need(const Worker &w, const std::map<Key, Matrix> &map,
                     const char *what, int row, int col) const {
    auto it = map.find({row, col});
    if (it == map.end())
      missing(w, what, row, col);
    return it->second;
  }

  void check_shape(const Message &msg, Index rows, Index cols) const {
    if (msg.payload.rows() != rows || msg.payload.cols() != cols)
      throw ProtocolError(
          "message " + msg.trace_line() + " (" + msg.label +
          ") has shape " + std::to_string(msg.payload.rows()) + "x" +
          std::to_string(msg.payload.cols()) + ", expected " +
          std::to_string(rows) + "x" + std::to_string(cols) +
          "; last messages:" + exec_.trace_tail());
  }

  void absorb(Worker &w) {
    for (Message &msg : transport_.receive(w.m)) {
      if (msg.label == "rbar_du") {
        if (msg.row_block < w.m || msg.row_block > w.blanket_last())
          throw ProtocolError("unexpected block row in " + msg.trace_line());
        check_shape(msg, w.train_block(msg.row_block).size(),
                    test_sizes_.at(msg.col_block));
        w.rdu[{msg.row_block, msg.col_block}] = std::move(msg.payload);
      } else if (msg.label == "rbar_dd") {
        if (msg.row_block <= w.m || msg.row_block > w.blanket_last())
          throw ProtocolError("unexpected block row in " + msg.trace_line());
        check_shape(msg, w.train_block(msg.row_block).size(),
                    shards_.at(msg.col_block).train.size());
        w.rdd[{msg.row_block, msg.col_block}] = std::move(msg.payload);
      } else if (msg.kind == MessageKind::global_summary) {
        w.global[msg.label] = std::move(msg.payload);
      } else {
        throw ProtocolError("worker " + std::to_string(w.m) +
                            " received unexpected message " +
                            msg.trace_line());
      }
    }
  }

  void within_band(Worker &w) {
    const WorkerShard &s = *w.shard;
    w.proj = std::make_unique<SupportProjector>(s.support, h_);
    try {
      w.terms = make_blanket_terms(*w.proj, s.train, s.blanket);
    } catch (const NotPositiveDefinite &e) {
      throw BlockFactorizationError(w.m, e.what());
    }
    if (s.blanket.size() > 0)
      w.w_test = w.terms.blanket_factor
                     .solve(w.proj->r(s.blanket, s.test_blocks[w.m]))
                     .transpose();
    for (int j = w.m; j <= w.blanket_last(); ++j)
      for (int n = std::max(0, j - b_); n <= std::min(count_ - 1, j + b_); ++n)
        w.rdu[{j, n}] = w.proj->r(w.train_block(j), s.test_blocks[n]);
    // Exact residual blocks that lower-path neighbours cannot form
    // themselves.
    for (int k = w.m + 1; k <= w.blanket_last(); ++k) {
      const int first = std::max(0, w.m - b_);
      const int last = std::min(w.m - 1, k - b_ - 1);
      if (first > last)
        continue;
      const Matrix r = w.proj->r(s.train, w.train_block(k));
      for (int n = first; n <= last; ++n)
        send(w.m, n, MessageKind::rbar_block, "rbar_dd", w.m, k, r);
    }
  }

  void upper(Worker &w, int step) {
    absorb(w);
    const int n = w.m + b_ + step;
    if (n >= count_)
      return;
    std::vector<const Matrix *> parts;
    for (int j = w.m + 1; j <= w.m + b_; ++j)
      parts.push_back(&need(w, w.rdu, "rbar_du", j, n));
    Matrix value = w.terms.rprime * vstack(parts, test_sizes_[n]);
    for (int k = std::max(0, w.m - b_); k <= w.m - 1; ++k)
      send(w.m, k, MessageKind::rbar_block, "rbar_du", w.m, n, value);
    w.rdu[{w.m, n}] = std::move(value);
  }

  void lower(Worker &w, int step) {
    absorb(w);
    const int k = w.m + b_ + step;
    if (k >= count_)
      return;
    std::vector<const Matrix *> parts;
    for (int j = w.m + 1; j <= w.m + b_; ++j)
      parts.push_back(&need(w, w.rdd, "rbar_dd", j, k));
    const Matrix stacked = vstack(parts, shards_[k].train.size());
    w.rud[k] = w.w_test * stacked;
    if (w.m >= 1) {
      const Matrix value = w.terms.rprime * stacked;
      for (int n = std::max(0, w.m - b_); n <= w.m - 1; ++n)
        send(w.m, n, MessageKind::rbar_block, "rbar_dd", w.m, k, value);
    }
  }

  void transpose(Worker &w) {
    absorb(w);
    for (int k = w.m + b_ + 1; k < count_; ++k) {
      const Matrix value = w.rud.at(k).transpose();
      for (int dst = std::max(0, k - b_); dst <= k; ++dst)
        send(w.m, dst, MessageKind::rbar_block, "rbar_du", k, w.m, value);
    }
  }

  Matrix row_of(const Worker &w, int j) const {
    Index cols = 0;
    for (Index c : test_sizes_)
      cols += c;
    Matrix out(w.train_block(j).size(), cols);
    Index at = 0;
    for (int n = 0; n < count_; ++n) {
      out.middleCols(at, test_sizes_[n]) = need(w, w.rdu, "rbar_du", j, n);
      at += test_sizes_[n];
    }
    return out;
  }

  void assemble(Worker &w) {
    const WorkerShard &s = *w.shard;
    w.cross.rbar_block_u = row_of(w, w.m);
    w.cross.sigma_bar_block_u =
        sigma_bar_from_rbar(*w.proj, s.train, w.m, s.test_blocks,
                            w.cross.rbar_block_u, h_, b_);
    std::vector<Matrix> rb, sb;
    for (int j = w.m + 1; j <= w.blanket_last(); ++j) {
      rb.push_back(row_of(w, j));
      sb.push_back(sigma_bar_from_rbar(*w.proj, w.train_block(j), j,
                                       s.test_blocks, rb.back(), h_, b_));
    }
    std::vector<const Matrix *> rp, sp;
    for (std::size_t i = 0; i < rb.size(); ++i) {
      rp.push_back(&rb[i]);
      sp.push_back(&sb[i]);
    }
    const Index cols = w.cross.rbar_block_u.cols();
    w.cross.rbar_blanket_u = vstack(rp, cols);
    w.cross.sigma_bar_blanket_u = vstack(sp, cols);
  }

  void local_summary_step(Worker &w) {
    absorb(w);
    assemble(w);
    const WorkerShard &s = *w.shard;
    const LocalSummary local = make_local_summary(
        *w.proj, s.train, s.outputs, s.blanket, s.blanket_outputs,
        w.cross.sigma_bar_block_u, w.cross.sigma_bar_blanket_u, h_.prior_mean,
        w.terms, w.m);
    LocalContribution c =
        contribute(local, test_sizes_, TestCovariance::block_diagonal);
    const auto kind = MessageKind::local_summary;
    send(w.m, master_id, kind, "y_s", w.m, -1, std::move(c.y_s));
    send(w.m, master_id, kind, "y_u", w.m, -1, std::move(c.y_u));
    send(w.m, master_id, kind, "ss", w.m, -1, std::move(c.ss));
    send(w.m, master_id, kind, "us", w.m, -1, std::move(c.us));
    for (int n = 0; n < count_; ++n)
      send(w.m, master_id, kind, "uu", w.m, n, std::move(c.uu_blocks[n]));
  }

  void reduce() {
    std::vector<LocalContribution> parts(count_);
    std::vector<int> seen(count_, 0);
    for (int m = 0; m < count_; ++m)
      parts[m].uu_blocks.resize(count_);
    for (Message &msg : transport_.receive(master_id)) {
      if (msg.kind != MessageKind::local_summary || msg.source < 0 ||
          msg.source >= count_)
        throw ProtocolError("master received unexpected message " +
                            msg.trace_line());
      LocalContribution &c = parts[msg.source];
      ++seen[msg.source];
      if (msg.label == "y_s")
        c.y_s = msg.payload.col(0);
      else if (msg.label == "y_u")
        c.y_u = msg.payload.col(0);
      else if (msg.label == "ss")
        c.ss = std::move(msg.payload);
      else if (msg.label == "us")
        c.us = std::move(msg.payload);
      else if (msg.label == "uu" && msg.col_block >= 0 &&
               msg.col_block < count_)
        c.uu_blocks[msg.col_block] = std::move(msg.payload);
      else
        throw ProtocolError("master received unknown payload " + msg.label);
    }
    for (int m = 0; m < count_; ++m) {
      if (seen[m] != 4 + count_)
        throw ProtocolError("master received " + std::to_string(seen[m]) +
                            " summary messages from worker " +
                            std::to_string(m) + ", expected " +
                            std::to_string(4 + count_) +
                            "; last messages:" + exec_.trace_tail());
      parts[m].uu_diag = Vector::Zero(parts[m].y_u.size());
    }
    const PointSet &support = shards_.front().support;
    const GlobalSummary g = reduce_contributions(gram(support, support, h_),
                                                 parts,
                                                 TestCovariance::block_diagonal);
    Index at = 0;
    const auto kind = MessageKind::global_summary;
    for (int n = 0; n < count_; ++n) {
      const Index un = test_sizes_[n];
      send(master_id, n, kind, "y_s", -1, n, g.y_s);
      send(master_id, n, kind, "y_u", -1, n, g.y_u.segment(at, un));
      send(master_id, n, kind, "ss", -1, n, g.ss);
      send(master_id, n, kind, "us", -1, n, g.us.middleRows(at, un));
      send(master_id, n, kind, "uu", -1, n, g.uu_blocks[n]);
      at += un;
    }
  }

  void predict(Worker &w) {
    absorb(w);
    for (const char *label : {"y_s", "y_u", "ss", "us", "uu"})
      if (!w.global.count(label))
        missing(w, std::string("global ") + label, -1, w.m);
    const PointSet &um = w.shard->test_blocks[w.m];
    const Prediction p = predict_from_summary(
        w.global["y_s"].col(0), w.global["ss"], w.global["y_u"].col(0),
        w.global["us"], w.global["uu"].diagonal(), gram_diagonal(um, h_),
        nullptr, nullptr, h_.prior_mean, false);
    send(w.m, master_id, MessageKind::prediction, "mean", w.m, -1, p.mean);
    send(w.m, master_id, MessageKind::prediction, "var", w.m, -1, p.variance);
  }

  Prediction gather() {
    std::vector<Vector> means(count_), vars(count_);
    std::vector<int> seen(count_, 0);
    for (Message &msg : transport_.receive(master_id)) {
      if (msg.kind != MessageKind::prediction || msg.source < 0 ||
          msg.source >= count_)
        throw ProtocolError("master received unexpected message " +
                            msg.trace_line());
      check_shape(msg, test_sizes_[msg.source], 1);
      ++seen[msg.source];
      (msg.label == "mean" ? means : vars)[msg.source] = msg.payload.col(0);
    }
    Index total = 0;
    for (int m = 0; m < count_; ++m) {
      if (seen[m] != 2)
        throw ProtocolError("master is missing predictions from worker " +
                            std::to_string(m) + "; last messages:" +
                            exec_.trace_tail());
      total += test_sizes_[m];
    }
    Prediction p;
    p.mean.resize(total);
    p.variance.resize(total);
    Index at = 0;
    for (int m = 0; m < count_; ++m) {
      p.mean.segment(at, test_sizes_[m]) = means[m];
      p.variance.segment(at, test_sizes_[m]) = vars[m];
      at += test_sizes_[m];
    }
    return p;
  }

  const std::vector<WorkerShard> &shards_;
  const Hyperparams &h_;
  int b_;
  int count_;
  InProcessTransport transport_;
  Executor exec_;
  RunStats &stats_;
  std::vector<Worker> workers_;
  std::vector<Index> test_sizes_;
};

} // namespace

std::vector<WorkerCross>
compute_rbar_cross_parallel(const std::vector<WorkerShard> &shards,
                            const Hyperparams &h, int bandwidth,
                            const ParallelOptions &opts, RunStats *stats) {
  RunStats local;
  RunStats &st = stats ? *stats : local;
  const auto start = Clock::now();
  Protocol protocol(shards, h, bandwidth, opts, st);
  protocol.run_cross();
  auto out = protocol.assemble_only();
  protocol.finish();
  st.wall_time_s = seconds_since(start);
  return out;
}

ParallelResult run_parallel_lma(const BlockedData &data, const Hyperparams &h,
                                int bandwidth, const ParallelOptions &opts) {
  ParallelResult r;
  const auto start = Clock::now();
  const auto shards = make_shards(data, bandwidth);
  Protocol protocol(shards, h, bandwidth, opts, r.stats);
  protocol.run_cross();
  r.prediction = protocol.run_summary(data.test_order);
  protocol.finish();
  r.stats.wall_time_s = seconds_since(start);
  return r;
}

ParallelResult run_parallel_lma(const Dataset &train, const Matrix &test,
                                const Hyperparams &h, const LmaConfig &config,
                                const ParallelOptions &opts) {
  config.validate();
  if (config.markov_order < 1)
    throw InvalidArgument("the parallel predictor needs markov order >= 1");
  h.validate(train.dimension());
  const auto start = Clock::now();
  LmaProblem problem = prepare_problem(train, test, config);
  ParallelResult r =
      run_parallel_lma(problem.data, h, config.markov_order, opts);
  r.stats.wall_time_s = seconds_since(start);
  return r;
}

std::vector<SpeedupRow> speedup_report(const std::vector<Index> &sizes,
                                       const LmaConfig &config,
                                       const Hyperparams &h, Index n_test,
                                       int threads, std::uint64_t seed) {
  std::vector<SpeedupRow> rows;
  for (Index n : sizes) {
    const GpSample data = sample_gp(n, n_test, h, 0.0, 10.0,
                                    seed + static_cast<std::uint64_t>(n));
    SpeedupRow row;
    row.n = n;
    auto t0 = Clock::now();
    const Prediction central =
        lma_predict_summary(data.train, data.test.inputs, h, config, false);
    row.t_centralized_s = seconds_since(t0);
    ParallelOptions opts;
    opts.threads = threads;
    t0 = Clock::now();
    const ParallelResult par =
        run_parallel_lma(data.train, data.test.inputs, h, config, opts);
    row.t_parallel_s = seconds_since(t0);
    row.speedup = row.t_centralized_s / row.t_parallel_s;
    row.max_abs_diff =
        std::max((central.mean - par.prediction.mean).cwiseAbs().maxCoeff(),
                 (central.variance - par.prediction.variance)
                     .cwiseAbs()
                     .maxCoeff());
    rows.push_back(row);
  }
  return rows;
}

} // namespace lmagp
