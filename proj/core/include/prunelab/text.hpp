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

#ifndef PRUNELAB_TEXT_HPP_
#define PRUNELAB_TEXT_HPP_

#include <string>

namespace prunelab {

// Shortest decimal form that round-trips to the same double. "nan" for NaN.
std::string format_double(double v);

}  // namespace prunelab

#endif  // PRUNELAB_TEXT_HPP_
