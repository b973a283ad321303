// Copyright 2026 The TraceGraph Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <vector>

namespace tracegraph::leiden {

/// Undirected weighted graph over nodes 0..n-1. Self-loops are allowed and
/// count twice towards the node's degree.
class WeightedGraph {
 public:
  explicit WeightedGraph(std::size_t n) : adj_(n), self_(n, 0.0) {}

  std::size_t size() const { return adj_.size(); }
  /// Adds weight to edge {u, v}; parallel additions accumulate.
  void AddEdge(std::size_t u, std::size_t v, double w);

  struct Arc {
    std::size_t to;
    double weight;
  };
  /// Neighbours excluding self-loops, sorted by node index.
  std::vector<Arc> const& Neighbors(std::size_t u) const { return adj_[u]; }
  double SelfLoop(std::size_t u) const { return self_[u]; }
  double Degree(std::size_t u) const;
  double TotalWeight() const;

 private:
  std::vector<std::vector<Arc>> adj_;
  std::vector<double> self_;
};

struct Options {
  double resolution = 1.0;
  std::uint64_t seed = 0;
  std::size_t max_iterations = 64;
};

/// Newman modularity with resolution: Q = 1/2m * sum_ij (A_ij - g k_i k_j / 2m) d(c_i, c_j).
double Modularity(WeightedGraph const& g, std::vector<std::size_t> const& membership,
                  double resolution = 1.0);

/// Leiden community detection on the modularity objective. Returns a
/// membership vector with community labels 0..k-1, numbered in order of
/// each community's lowest node index. Deterministic for a fixed seed:
/// ties between candidate moves go to the lowest community label, which
/// callers make lexicographic by numbering nodes in name order.
std::vector<std::size_t> Cluster(WeightedGraph const& g, Options const& options);

}  // namespace tracegraph::leiden
