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

#ifndef LMAGP_ERRORS_HPP_
#define LMAGP_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace lmagp {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
  using Error::Error;
};

/// Malformed input file; `line` is 1-based.
class DataFormatError : public Error {
public:
  DataFormatError(const std::string &path, long line, const std::string &what)
      : Error(path + ":" + std::to_string(line) + ": " + what), line_(line) {}
  long line() const { return line_; }

private:
  long line_;
};

class NumericalError : public Error {
public:
  using Error::Error;
};

class NotPositiveDefinite : public NumericalError {
public:
  using NumericalError::NumericalError;
};

/// The support-set covariance could not be factorized.
class IllConditionedSupport : public NumericalError {
public:
  using NumericalError::NumericalError;
};

/// The training covariance could not be factorized.
class IllConditionedData : public NumericalError {
public:
  using NumericalError::NumericalError;
};

/// A factorization tied to one block of the partition failed.
class BlockFactorizationError : public NumericalError {
public:
  BlockFactorizationError(int block, const std::string &what)
      : NumericalError("block " + std::to_string(block) + ": " + what),
        block_(block) {}
  int block() const { return block_; }

private:
  int block_;
};

/// Violation of the message-passing contract (missing message, bad shape).
class ProtocolError : public Error {
public:
  using Error::Error;
};

/// A worker failed during a parallel run.
class RunAborted : public Error {
public:
  RunAborted(std::string phase, int worker, const std::string &what)
      : Error("run aborted in phase '" + phase + "' on worker " +
              std::to_string(worker) + ": " + what),
        phase_(std::move(phase)), worker_(worker) {}
  const std::string &phase() const { return phase_; }
  int worker() const { return worker_; }

private:
  std::string phase_;
  int worker_;
};

} // namespace lmagp

#endif // LMAGP_ERRORS_HPP_
