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

#include "tracegraph/leiden.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>

#include "tracegraph/error.hpp"
#include "tracegraph/util.hpp"

namespace tracegraph::leiden {

namespace {

constexpr double kEpsilon = 1e-12;

/// Renumbers labels 0..k-1 in order of first appearance by node index.
std::vector<std::size_t> Compact(std::vector<std::size_t> const& labels) {
  std::map<std::size_t, std::size_t> remap;
  std::vector<std::size_t> out(labels.size());
  for (std::size_t v = 0; v < labels.size(); ++v) {
    auto [it, inserted] = remap.try_emplace(labels[v], remap.size());
    out[v] = it->second;
  }
  return out;
}

std::size_t CountLabels(std::vector<std::size_t> const& labels) {
  return std::set<std::size_t>(labels.begin(), labels.end()).size();
}

/// Local moving phase: visit nodes from a queue, move each to the
/// neighbouring (or empty) community with the largest strictly positive
/// improvement, and requeue neighbours that may now prefer to follow.
void MoveNodesFast(WeightedGraph const& g, std::vector<std::size_t>& membership,
                   double resolution, double m2, SplitMix64& rng) {
  std::size_t const n = g.size();
  std::vector<double> degree(n);
  std::vector<double> community_total(n, 0.0);
  std::vector<std::size_t> community_size(n, 0);
  for (std::size_t v = 0; v < n; ++v) {
    degree[v] = g.Degree(v);
    community_total[membership[v]] += degree[v];
    community_size[membership[v]] += 1;
  }
  std::set<std::size_t> empty;
  for (std::size_t c = 0; c < n; ++c) {
    if (community_size[c] == 0) empty.insert(c);
  }

  std::vector<std::size_t> order(n);
  for (std::size_t v = 0; v < n; ++v) order[v] = v;
  DeterministicShuffle(order, rng);
  std::deque<std::size_t> queue(order.begin(), order.end());
  std::vector<char> queued(n, 1);

  std::vector<double> link(n, 0.0);
  std::vector<std::size_t> touched;
  while (!queue.empty()) {
    std::size_t v = queue.front();
    queue.pop_front();
    queued[v] = 0;
    std::size_t const current = membership[v];

    touched.clear();
    for (auto const& arc : g.Neighbors(v)) {
      std::size_t c = membership[arc.to];
      if (link[c] == 0.0) touched.push_back(c);
      link[c] += arc.weight;
    }

    community_total[current] -= degree[v];
    community_size[current] -= 1;
    double const scale = resolution * degree[v] / m2;

    double const stay_gain = link[current] - scale * community_total[current];
    std::size_t best = current;
    double best_gain = stay_gain;
    std::sort(touched.begin(), touched.end());
    for (std::size_t c : touched) {
      if (c == current) continue;
      double gain = link[c] - scale * community_total[c];
      if (gain > best_gain + kEpsilon) {
        best_gain = gain;
        best = c;
      }
    }
    // An empty community has gain 0.
    if (community_size[current] > 0 && 0.0 > best_gain + kEpsilon && !empty.empty()) {
      best = *empty.begin();
      best_gain = 0.0;
    }
    for (std::size_t c : touched) link[c] = 0.0;

    community_total[best] += degree[v];
    community_size[best] += 1;
    if (best != current) {
      membership[v] = best;
      empty.erase(best);
      if (community_size[current] == 0) empty.insert(current);
      for (auto const& arc : g.Neighbors(v)) {
        if (!queued[arc.to] && membership[arc.to] != best) {
          queued[arc.to] = 1;
          queue.push_back(arc.to);
        }
      }
    }
  }
}

/// Refinement phase: inside every community, start from singletons and
/// greedily merge well-connected singleton nodes into well-connected
/// sub-clusters. Returns refined labels; each refined cluster lies inside
/// one community of `membership`.
std::vector<std::size_t> Refine(WeightedGraph const& g, std::vector<std::size_t> const& membership,
                                double resolution, double m2, SplitMix64& rng) {
  std::size_t const n = g.size();
  std::vector<std::size_t> refined(n);
  for (std::size_t v = 0; v < n; ++v) refined[v] = v;

  std::vector<double> degree(n);
  for (std::size_t v = 0; v < n; ++v) degree[v] = g.Degree(v);

  std::map<std::size_t, std::vector<std::size_t>> members;
  for (std::size_t v = 0; v < n; ++v) members[membership[v]].push_back(v);

  std::vector<double> cluster_total(degree);
  std::vector<double> cluster_external(n, 0.0);  // weight to the rest of S
  std::vector<std::size_t> cluster_size(n, 1);
  std::vector<double> link(n, 0.0);
  std::vector<std::size_t> touched;

  for (auto& [community, nodes] : members) {
    double total = 0.0;
    for (auto v : nodes) total += degree[v];
    for (auto v : nodes) {
      double w = 0.0;
      for (auto const& arc : g.Neighbors(v)) {
        if (membership[arc.to] == community) w += arc.weight;
      }
      cluster_external[v] = w;
    }
    auto order = nodes;
    DeterministicShuffle(order, rng);
    for (auto v : order) {
      if (cluster_size[refined[v]] != 1) continue;
      double const kv = degree[v];
      if (cluster_external[v] + kEpsilon < resolution * kv * (total - kv) / m2) continue;

      touched.clear();
      for (auto const& arc : g.Neighbors(v)) {
        if (membership[arc.to] != community) continue;
        std::size_t c = refined[arc.to];
        if (link[c] == 0.0) touched.push_back(c);
        link[c] += arc.weight;
      }
      std::sort(touched.begin(), touched.end());
      std::size_t best = refined[v];
      double best_gain = 0.0;
      for (std::size_t c : touched) {
        if (c == refined[v]) continue;
        double const kc = cluster_total[c];
        bool const well_connected =
            cluster_external[c] + kEpsilon >= resolution * kc * (total - kc) / m2;
        if (!well_connected) continue;
        double gain = link[c] - resolution * kv * kc / m2;
        if (gain > best_gain + kEpsilon) {
          best_gain = gain;
          best = c;
        }
      }
      if (best != refined[v]) {
        std::size_t const from = refined[v];
        cluster_external[best] = cluster_external[best] + cluster_external[from] - 2.0 * link[best];
        cluster_total[best] += kv;
        cluster_size[best] += 1;
        cluster_size[from] = 0;
        cluster_total[from] = 0.0;
        refined[v] = best;
      }
      for (std::size_t c : touched) link[c] = 0.0;
    }
  }
  return refined;
}

WeightedGraph Aggregate(WeightedGraph const& g, std::vector<std::size_t> const& labels,
                        std::size_t count) {
  WeightedGraph out(count);
  for (std::size_t u = 0; u < g.size(); ++u) {
    if (g.SelfLoop(u) != 0.0) out.AddEdge(labels[u], labels[u], g.SelfLoop(u));
    for (auto const& arc : g.Neighbors(u)) {
      if (arc.to < u) continue;
      out.AddEdge(labels[u], labels[arc.to], arc.weight);
    }
  }
  return out;
}

}  // namespace

void WeightedGraph::AddEdge(std::size_t u, std::size_t v, double w) {
  if (u >= adj_.size() || v >= adj_.size()) {
    throw Error(ErrorCode::kInvalidArgument, "edge endpoint out of range");
  }
  if (u == v) {
    self_[u] += w;
    return;
  }
  auto add = [](std::vector<Arc>& arcs, std::size_t to, double weight) {
    auto it = std::lower_bound(arcs.begin(), arcs.end(), to,
                               [](Arc const& a, std::size_t t) { return a.to < t; });
    if (it != arcs.end() && it->to == to) {
      it->weight += weight;
    } else {
      arcs.insert(it, Arc{to, weight});
    }
  };
  add(adj_[u], v, w);
  add(adj_[v], u, w);
}

double WeightedGraph::Degree(std::size_t u) const {
  double d = 2.0 * self_[u];
  for (auto const& a : adj_[u]) d += a.weight;
  return d;
}

double WeightedGraph::TotalWeight() const {
  double twice = 0.0;
  for (std::size_t u = 0; u < size(); ++u) twice += Degree(u);
  return twice / 2.0;
}

double Modularity(WeightedGraph const& g, std::vector<std::size_t> const& membership,
                  double resolution) {
  double const m = g.TotalWeight();
  if (m == 0.0) return 0.0;
  std::map<std::size_t, double> internal;
  std::map<std::size_t, double> total;
  for (std::size_t u = 0; u < g.size(); ++u) {
    total[membership[u]] += g.Degree(u);
    internal[membership[u]] += g.SelfLoop(u);
    for (auto const& arc : g.Neighbors(u)) {
      if (arc.to > u && membership[arc.to] == membership[u]) internal[membership[u]] += arc.weight;
    }
  }
  double q = 0.0;
  for (auto const& [c, k] : total) {
    q += internal[c] / m - resolution * (k / (2.0 * m)) * (k / (2.0 * m));
  }
  return q;
}

std::vector<std::size_t> Cluster(WeightedGraph const& input, Options const& options) {
  std::size_t const n = input.size();
  std::vector<std::size_t> singletons(n);
  for (std::size_t v = 0; v < n; ++v) singletons[v] = v;
  double const m2 = 2.0 * input.TotalWeight();
  if (n == 0 || m2 <= 0.0) return singletons;

  SplitMix64 rng(options.seed);
  WeightedGraph g = input;
  std::vector<std::size_t> node_of(n);  // original node -> aggregate node
  for (std::size_t v = 0; v < n; ++v) node_of[v] = v;
  std::vector<std::size_t> membership = singletons;

  for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
    MoveNodesFast(g, membership, options.resolution, m2, rng);
    if (CountLabels(membership) == g.size()) break;

    auto refined = Compact(Refine(g, membership, options.resolution, m2, rng));
    std::size_t const count = CountLabels(refined);
    std::vector<std::size_t> next_membership(count);
    for (std::size_t v = 0; v < g.size(); ++v) next_membership[refined[v]] = membership[v];
    g = Aggregate(g, refined, count);
    for (auto& x : node_of) x = refined[x];
    membership = Compact(next_membership);
  }

  std::vector<std::size_t> result(n);
  for (std::size_t v = 0; v < n; ++v) result[v] = membership[node_of[v]];
  return Compact(result);
}

}  // namespace tracegraph::leiden
