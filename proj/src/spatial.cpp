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

#include "screwsplat/spatial.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace screwsplat {

namespace {
constexpr int kLeafSize = 8;
}

KdTree::KdTree(std::vector<Vec3> points) : points_(std::move(points)) {
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0);
  if (!points_.empty()) {
    nodes_.reserve(2 * points_.size() / kLeafSize + 2);
    build(0, static_cast<int>(points_.size()));
  }
}

int KdTree::build(int begin, int end) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back(Node{begin, end});
  if (end - begin <= kLeafSize) return id;

  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (int i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  const int mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](int a, int b) { return points_[a][axis] < points_[b][axis]; });
  const double split = points_[order_[mid]][axis];
  const int left = build(begin, mid);
  const int right = build(mid, end);
  nodes_[id].axis = axis;
  nodes_[id].split = split;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

template <typename Visit>
void KdTree::search(int node, const Vec3& q, double& bound, Visit&& visit) const {
  const Node& n = nodes_[node];
  if (n.axis < 0) {
    for (int i = n.begin; i < n.end; ++i) {
      const int idx = order_[i];
      visit(idx, (points_[idx] - q).squaredNorm(), bound);
    }
    return;
  }
  const double diff = q[n.axis] - n.split;
  const int near = diff < 0 ? n.left : n.right;
  const int far = diff < 0 ? n.right : n.left;
  search(near, q, bound, visit);
  if (diff * diff <= bound) search(far, q, bound, visit);
}

std::pair<double, int> KdTree::nearest(const Vec3& query) const {
  if (points_.empty()) throw Error(Errc::EmptySet, "nearest neighbour query on an empty tree");
  double best = std::numeric_limits<double>::infinity();
  int best_idx = -1;
  search(0, query, best, [&](int idx, double d2, double& bound) {
    if (d2 < bound || (d2 == bound && idx < best_idx)) {
      bound = d2;
      best_idx = idx;
    }
  });
  return {best, best_idx};
}

std::vector<std::pair<double, int>> KdTree::knn(const Vec3& query, int k, int exclude) const {
  std::vector<std::pair<double, int>> heap;  // max-heap on distance
  if (k <= 0 || points_.empty()) return heap;
  double bound = std::numeric_limits<double>::infinity();
  search(0, query, bound, [&](int idx, double d2, double& b) {
    if (idx == exclude) return;
    if (static_cast<int>(heap.size()) < k) {
      heap.emplace_back(d2, idx);
      std::push_heap(heap.begin(), heap.end());
    } else if (d2 < heap.front().first) {
      std::pop_heap(heap.begin(), heap.end());
      heap.back() = {d2, idx};
      std::push_heap(heap.begin(), heap.end());
    }
    if (static_cast<int>(heap.size()) == k) b = heap.front().first;
  });
  std::sort_heap(heap.begin(), heap.end());
  return heap;
}

}  // namespace screwsplat
