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

#ifndef LMAGP_SRC_CLI_INTERNAL_HPP_
#define LMAGP_SRC_CLI_INTERNAL_HPP_

#include <iosfwd>
#include <string>
#include <vector>

#include "lmagp/cli.hpp"

namespace lmagp::detail {

// Parses into `cfg`. Returns -1 when the command should run, otherwise the
// exit code to return (help output or a usage error already printed).
int parse_into(const std::vector<std::string> &args, RunConfig &cfg,
               std::ostream &out, std::ostream &err);

} // namespace lmagp::detail

#endif // LMAGP_SRC_CLI_INTERNAL_HPP_
