#pragma once

#include "ivproc/errors.hpp"

#include <algorithm>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

namespace ivproc {

/// Set of coordinate-process indices. Indices are 1-based everywhere in the
/// public interface, matching the user-facing numbering of processes.
class NodeSet {
public:
    NodeSet() = default;
    NodeSet(std::initializer_list<int> nodes) : members_(nodes) { normalize(); }
    explicit NodeSet(std::vector<int> nodes) : members_(std::move(nodes)) { normalize(); }

    [[nodiscard]] std::size_t size() const { return members_.size(); }
    [[nodiscard]] bool empty() const { return members_.empty(); }
    [[nodiscard]] bool contains(int node) const {
        return std::binary_search(members_.begin(), members_.end(), node);
    }
    [[nodiscard]] const std::vector<int>& members() const { return members_; }

    [[nodiscard]] bool subset_of(const NodeSet& other) const {
        return std::includes(other.members_.begin(), other.members_.end(),
                             members_.begin(), members_.end());
    }
    [[nodiscard]] bool disjoint_with(const NodeSet& other) const {
        for (int m : members_)
            if (other.contains(m)) return false;
        return true;
    }
    [[nodiscard]] NodeSet unite(const NodeSet& other) const {
        std::vector<int> out;
        std::set_union(members_.begin(), members_.end(),
                       other.members_.begin(), other.members_.end(), std::back_inserter(out));
        return NodeSet(std::move(out));
    }
    [[nodiscard]] NodeSet intersect(const NodeSet& other) const {
        std::vector<int> out;
        std::set_intersection(members_.begin(), members_.end(),
                              other.members_.begin(), other.members_.end(),
                              std::back_inserter(out));
        return NodeSet(std::move(out));
    }

    auto begin() const { return members_.begin(); }
    auto end() const { return members_.end(); }

    friend bool operator==(const NodeSet&, const NodeSet&) = default;

private:
    void normalize() {
        std::sort(members_.begin(), members_.end());
        members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
    }

    std::vector<int> members_;
};

/// Directed graph over coordinate processes 1..n. An edge i -> j means that
/// process i drives process j directly (some lag matrix or kernel integral
/// has a nonzero (j, i) entry). Self-loops are not representable; diagonal
/// parameters act through normalization instead. Immutable after
/// construction, so all operations on it are safe to run concurrently.
class CausalGraph {
public:
    CausalGraph(int node_count, std::vector<std::pair<int, int>> edges)
        : n_(node_count), out_(static_cast<std::size_t>(node_count) + 1),
          in_(static_cast<std::size_t>(node_count) + 1) {
        if (node_count <= 0) throw argument_error("graph must have at least one node");
        std::sort(edges.begin(), edges.end());
        edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
        for (auto [i, j] : edges) {
            if (i < 1 || i > n_ || j < 1 || j > n_)
                throw domain_error("edge endpoint out of range: (" + std::to_string(i) + ", " +
                                   std::to_string(j) + ")");
            if (i == j)
                throw argument_error("self-loop " + std::to_string(i) + " -> " +
                                     std::to_string(i) + " is not representable");
            out_[static_cast<std::size_t>(i)].push_back(j);
            in_[static_cast<std::size_t>(j)].push_back(i);
        }
        edges_ = std::move(edges);
    }

    [[nodiscard]] int node_count() const { return n_; }
    [[nodiscard]] const std::vector<std::pair<int, int>>& edges() const { return edges_; }
    [[nodiscard]] bool has_edge(int from, int to) const {
        return std::binary_search(edges_.begin(), edges_.end(), std::make_pair(from, to));
    }
    [[nodiscard]] const std::vector<int>& successors(int node) const {
        return out_[static_cast<std::size_t>(node)];
    }
    [[nodiscard]] const std::vector<int>& predecessors(int node) const {
        return in_[static_cast<std::size_t>(node)];
    }
    [[nodiscard]] NodeSet all_nodes() const {
        std::vector<int> v(static_cast<std::size_t>(n_));
        for (int i = 0; i < n_; ++i) v[static_cast<std::size_t>(i)] = i + 1;
        return NodeSet(std::move(v));
    }

    friend bool operator==(const CausalGraph& a, const CausalGraph& b) {
        return a.n_ == b.n_ && a.edges_ == b.edges_;
    }

private:
    int n_;
    std::vector<std::pair<int, int>> edges_;
    std::vector<std::vector<int>> out_;
    std::vector<std::vector<int>> in_;
};

namespace detail {

inline void require_in_range(const CausalGraph& g, const NodeSet& s) {
    for (int node : s)
        if (node < 1 || node > g.node_count())
            throw domain_error("node index " + std::to_string(node) + " outside 1.." +
                               std::to_string(g.node_count()));
}

} // namespace detail

/// Nodes reachable from `s` by directed paths, including `s` itself
/// (reflexive convention).
inline NodeSet descendants(const CausalGraph& g, const NodeSet& s) {
    detail::require_in_range(g, s);
    std::vector<bool> seen(static_cast<std::size_t>(g.node_count()) + 1, false);
    std::vector<int> stack(s.members());
    for (int node : s) seen[static_cast<std::size_t>(node)] = true;
    while (!stack.empty()) {
        const int node = stack.back();
        stack.pop_back();
        for (int next : g.successors(node)) {
            if (!seen[static_cast<std::size_t>(next)]) {
                seen[static_cast<std::size_t>(next)] = true;
                stack.push_back(next);
            }
        }
    }
    std::vector<int> out;
    for (int v = 1; v <= g.node_count(); ++v)
        if (seen[static_cast<std::size_t>(v)]) out.push_back(v);
    return NodeSet(std::move(out));
}

/// Direct parents of `s`, including `s` itself (reflexive convention).
inline NodeSet parents(const CausalGraph& g, const NodeSet& s) {
    detail::require_in_range(g, s);
    std::vector<int> out(s.members());
    for (int node : s)
        for (int pred : g.predecessors(node)) out.push_back(pred);
    return NodeSet(std::move(out));
}

/// True iff no edge enters `s` from outside `s`. Edges between members of
/// `s` are allowed.
inline bool is_exogenous(const CausalGraph& g, const NodeSet& s) {
    detail::require_in_range(g, s);
    for (int node : s)
        for (int pred : g.predecessors(node))
            if (!s.contains(pred)) return false;
    return true;
}

/// Graph-level validity checks for an instrumental process. The rank
/// condition on the covariance block is numeric and is verified in the iv
/// module; `rank_condition_checked` stays false here to record that split.
struct ValidityReport {
    bool instruments_exogenous = false;
    bool reachability_condition = false;
    bool rank_condition_checked = false;

    [[nodiscard]] bool graph_valid() const {
        return instruments_exogenous && reachability_condition;
    }
};

inline ValidityReport check_instrument(const CausalGraph& g, const NodeSet& instruments,
                                       const NodeSet& treatments, const NodeSet& outcomes) {
    if (instruments.empty() || treatments.empty() || outcomes.empty())
        throw argument_error("instrument, treatment, and outcome sets must be non-empty");
    if (!instruments.disjoint_with(treatments) || !instruments.disjoint_with(outcomes) ||
        !treatments.disjoint_with(outcomes))
        throw argument_error("instrument, treatment, and outcome sets must be pairwise disjoint");
    detail::require_in_range(g, instruments);
    detail::require_in_range(g, treatments);
    detail::require_in_range(g, outcomes);

    ValidityReport report;
    report.instruments_exogenous = is_exogenous(g, instruments);
    const NodeSet reached = descendants(g, instruments).intersect(parents(g, outcomes));
    report.reachability_condition = reached.subset_of(treatments.unite(outcomes));
    return report;
}

} // namespace ivproc
