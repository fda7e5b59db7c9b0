// Copyright 2026 The ScrewSplat Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

#pragma once

#include <utility>
#include <vector>

#include "screwsplat/types.hpp"

namespace screwsplat {

/// Static 3-d tree over a point set. Nodes are stored implicitly in the
/// permuted index array (median split along the widest extent).
class KdTree {
 public:
  explicit KdTree(std::vector<Vec3> points);

  /// (squared distance, index) of the nearest stored point.
  std::pair<double, int> nearest(const Vec3& query) const;

  /// Up to k nearest (squared distance, index) pairs, ascending. `exclude` skips one index.
  std::vector<std::pair<double, int>> knn(const Vec3& query, int k, int exclude = -1) const;

  std::size_t size() const { return points_.size(); }
  const std::vector<Vec3>& points() const { return points_; }

 private:
  struct Node {
    int begin, end;    // range in order_
    int left = -1, right = -1;
    int axis = -1;     // -1 for leaves
    double split = 0.0;
  };

  int build(int begin, int end);
  template <typename Visit>
  void search(int node, const Vec3& q, double& bound, Visit&& visit) const;

  std::vector<Vec3> points_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
};

}  // namespace screwsplat
