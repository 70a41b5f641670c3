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

#ifndef PRUNELAB_PRUNING_HPP_
#define PRUNELAB_PRUNING_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "prunelab/mask.hpp"
#include "prunelab/network.hpp"

namespace prunelab {

enum class PruneScope { kGlobal, kPerLayer };
enum class PruneRule { kMagnitude, kRandom };
// Ties at the threshold keep the lower flat index (layer-major, row-major).
enum class TieBreak { kStableIndex };

std::string_view prune_scope_name(PruneScope s);
PruneScope parse_prune_scope(std::string_view name);
std::string_view prune_rule_name(PruneRule r);
PruneRule parse_prune_rule(std::string_view name);

struct PruneRecipe {
  // Fraction of weights REMOVED, in [0, 1).
  double ratio = 0.9;
  PruneScope scope = PruneScope::kGlobal;
  PruneRule rule = PruneRule::kMagnitude;
  std::size_t prune_epoch = 0;
  TieBreak tie_break = TieBreak::kStableIndex;

  void validate() const;
};

// floor(ratio * count), with a 1e-9 guard so 0.95 * 10000 is 9500 and not
// 9499.
std::size_t removed_count(double ratio, std::size_t count);

// Removes the removed_count(ratio, d) smallest-magnitude weights.
MaskSet select_magnitude(const Network& net, const PruneRecipe& recipe);
// Removes the same number of weights chosen uniformly without replacement.
MaskSet select_random(const Network& net, const PruneRecipe& recipe, std::uint64_t seed);
// Dispatches on recipe.rule.
MaskSet select_mask(const Network& net, const PruneRecipe& recipe, std::uint64_t seed);

// W_p = M (.) W; the masks are attached so training keeps them at zero.
Network apply_mask(Network net, const MaskSet& masks);

struct Sparsity {
  double kept_fraction = 0.0;
  double removed_fraction = 0.0;
};

Sparsity sparsity(const MaskSet& masks);

// Resets weights to `initial_weights`, then applies the mask.
Network rewind(Network net, const MaskSet& masks,
               std::span<const Matrix> initial_weights);
// Same, using the snapshot captured by init_network.
Network rewind(Network net, const MaskSet& masks);

}  // namespace prunelab

#endif  // PRUNELAB_PRUNING_HPP_
