// Copyright 2026 The prunelab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PRUNELAB_CLI_HPP_
#define PRUNELAB_CLI_HPP_

#include <iosfwd>

namespace prunelab {

// Entry point of the `prunelab` command-line tool. Returns the process exit
// code: 0 on success, 1 on a runtime failure and 2 on a usage or config
// error. Failures print one line of the form
//   prunelab: error code=<name> message="<text>"
// to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace prunelab

#endif  // PRUNELAB_CLI_HPP_
