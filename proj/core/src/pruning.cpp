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

#include "prunelab/pruning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "prunelab/error.hpp"

namespace prunelab {
namespace {

struct Candidate {
  double magnitude;
  std::size_t flat;  // global flat index, layer-major
};

std::vector<std::size_t> layer_offsets(const Network& net) {
  std::vector<std::size_t> offsets{0};
  for (const Matrix& w : net.weights) offsets.push_back(offsets.back() + w.size());
  return offsets;
}

void require_prunable(const Network& net, const PruneRecipe& recipe) {
  recipe.validate();
  std::size_t total = 0;
  for (const Matrix& w : net.weights) total += w.size();
  if (total == 0) throw Error(ErrorCode::kInvalidArgument, "network has no parameters");
}

// Removal order: ascending magnitude, ties remove the higher index first.
void sort_for_removal(std::vector<Candidate>& c) {
  std::sort(c.begin(), c.end(), [](const Candidate& a, const Candidate& b) {
    if (a.magnitude != b.magnitude) return a.magnitude < b.magnitude;
    return a.flat > b.flat;
  });
}

MaskSet mask_from_removed(const Network& net, const std::vector<std::size_t>& offsets,
                          std::span<const std::size_t> removed) {
  MaskSet all = MaskSet::all_ones(net.weights);
  std::vector<LayerMask> layers(all.layers().begin(), all.layers().end());
  for (std::size_t flat : removed) {
    const auto it = std::upper_bound(offsets.begin(), offsets.end(), flat);
    const auto k = static_cast<std::size_t>(it - offsets.begin()) - 1;
    layers[k].set(flat - offsets[k], false);
  }
  return MaskSet(std::move(layers));
}

}  // namespace

std::string_view prune_scope_name(PruneScope s) {
  return s == PruneScope::kGlobal ? "global" : "per-layer";
}

PruneScope parse_prune_scope(std::string_view name) {
  if (name == "global") return PruneScope::kGlobal;
  if (name == "per-layer") return PruneScope::kPerLayer;
  throw Error(ErrorCode::kConfig, "unknown prune scope '" + std::string(name) + "'");
}

std::string_view prune_rule_name(PruneRule r) {
  return r == PruneRule::kMagnitude ? "magnitude" : "random";
}

PruneRule parse_prune_rule(std::string_view name) {
  if (name == "magnitude") return PruneRule::kMagnitude;
  if (name == "random") return PruneRule::kRandom;
  throw Error(ErrorCode::kConfig, "unknown prune rule '" + std::string(name) + "'");
}

void PruneRecipe::validate() const {
  if (!(ratio >= 0.0 && ratio < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "pruning ratio must be in [0, 1), got " + std::to_string(ratio));
  }
}

std::size_t removed_count(double ratio, std::size_t count) {
  return static_cast<std::size_t>(std::floor(ratio * static_cast<double>(count) + 1e-9));
}

MaskSet select_magnitude(const Network& net, const PruneRecipe& recipe) {
  require_prunable(net, recipe);
  const auto offsets = layer_offsets(net);

  auto candidates_for = [&](std::size_t k) {
    std::vector<Candidate> c;
    c.reserve(net.weights[k].size());
    for (std::size_t i = 0; i < net.weights[k].size(); ++i) {
      c.push_back({std::abs(net.weights[k][i]), offsets[k] + i});
    }
    return c;
  };

  std::vector<std::size_t> removed;
  if (recipe.scope == PruneScope::kGlobal) {
    std::vector<Candidate> all;
    all.reserve(offsets.back());
    for (std::size_t k = 0; k < net.weights.size(); ++k) {
      auto c = candidates_for(k);
      all.insert(all.end(), c.begin(), c.end());
    }
    sort_for_removal(all);
    const std::size_t n = removed_count(recipe.ratio, all.size());
    for (std::size_t i = 0; i < n; ++i) removed.push_back(all[i].flat);
  } else {
    for (std::size_t k = 0; k < net.weights.size(); ++k) {
      auto c = candidates_for(k);
      sort_for_removal(c);
      const std::size_t n = removed_count(recipe.ratio, c.size());
      for (std::size_t i = 0; i < n; ++i) removed.push_back(c[i].flat);
    }
  }
  return mask_from_removed(net, offsets, removed);
}

MaskSet select_random(const Network& net, const PruneRecipe& recipe, std::uint64_t seed) {
  require_prunable(net, recipe);
  const auto offsets = layer_offsets(net);
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> removed;

  auto sample = [&](std::size_t begin, std::size_t end) {
    std::vector<std::size_t> pool(end - begin);
    std::iota(pool.begin(), pool.end(), begin);
    std::shuffle(pool.begin(), pool.end(), rng);
    const std::size_t n = removed_count(recipe.ratio, pool.size());
    removed.insert(removed.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n));
  };

  if (recipe.scope == PruneScope::kGlobal) {
    sample(0, offsets.back());
  } else {
    for (std::size_t k = 0; k < net.weights.size(); ++k) sample(offsets[k], offsets[k + 1]);
  }
  return mask_from_removed(net, offsets, removed);
}

MaskSet select_mask(const Network& net, const PruneRecipe& recipe, std::uint64_t seed) {
  return recipe.rule == PruneRule::kMagnitude ? select_magnitude(net, recipe)
                                              : select_random(net, recipe, seed);
}

Network apply_mask(Network net, const MaskSet& masks) {
  masks.require_matches(net.weights);
  for (std::size_t k = 0; k < net.weights.size(); ++k) {
    const LayerMask& m = masks.layer(k);
    Matrix& w = net.weights[k];
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (!m.keeps(i)) w[i] = 0.0;
    }
  }
  net.masks = masks;
  return net;
}

Sparsity sparsity(const MaskSet& masks) {
  Sparsity s;
  const std::size_t total = masks.total_size();
  if (total == 0) {
    s.kept_fraction = 0.0;
    s.removed_fraction = 1.0;
    return s;
  }
  s.kept_fraction = static_cast<double>(masks.total_kept()) / static_cast<double>(total);
  s.removed_fraction = 1.0 - s.kept_fraction;
  return s;
}

Network rewind(Network net, const MaskSet& masks, std::span<const Matrix> initial_weights) {
  if (initial_weights.size() != net.weights.size()) {
    throw Error(ErrorCode::kShapeMismatch, "initial snapshot has wrong layer count");
  }
  for (std::size_t k = 0; k < net.weights.size(); ++k) {
    if (!initial_weights[k].same_shape(net.weights[k])) {
      throw Error(ErrorCode::kShapeMismatch, "initial snapshot layer " + std::to_string(k) +
                                                 " has shape " +
                                                 initial_weights[k].shape_string());
    }
    net.weights[k] = initial_weights[k];
  }
  return apply_mask(std::move(net), masks);
}

Network rewind(Network net, const MaskSet& masks) {
  if (!net.initial_weights) {
    throw Error(ErrorCode::kMissingSnapshot, "network has no initial-weight snapshot");
  }
  const std::vector<Matrix> initial = *net.initial_weights;
  return rewind(std::move(net), masks, initial);
}

}  // namespace prunelab
