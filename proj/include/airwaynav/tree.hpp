#pragma once
// Anatomical label set modelled as an undirected tree. Nodes are airway
// labels, edges connect adjacent branches, and every edge counts as one hop
// regardless of anatomical length. From the tree we precompute the hop
// distance matrix D and the transition penalty R(i,j) = exp(D_ij / max(D)).
#include <algorithm>
#include <cmath>
#include <queue>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "airwaynav/errors.hpp"
#include "airwaynav/matrix.hpp"

namespace airwaynav {

struct AirwayTree {
    std::vector<std::string> labels;          // index = class id
    int root = 0;                             // the trachea
    std::vector<std::pair<int, int>> edges;   // unordered index pairs
    std::vector<std::vector<int>> adjacency;  // sorted neighbor lists

    int size() const { return static_cast<int>(labels.size()); }

    int label_index(std::string_view name) const {
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == name) return static_cast<int>(i);
        return -1;
    }
};

// Hop counts between every pair of labels. Symmetric, zero diagonal.
struct DistanceMatrix {
    int n = 0;
    std::vector<int> hops;  // n*n row-major

    int at(int i, int j) const { return hops[static_cast<std::size_t>(i) * n + j]; }
    int max_hops() const { return hops.empty() ? 0 : *std::max_element(hops.begin(), hops.end()); }
};

// Entries exp(D_ij / max(D)): 1 on the diagonal, e at the diameter.
struct RegularizationMatrix {
    Matrix values;
};

// -----------------------------
// construction & validation
// -----------------------------

inline AirwayTree make_tree(std::vector<std::string> labels, int root,
                            std::vector<std::pair<int, int>> edges) {
    const int n = static_cast<int>(labels.size());
    if (n == 0) throw ValidationError("tree: empty label list");
    for (int i = 0; i < n; ++i) {
        if (labels[i].empty()) throw ValidationError("tree: empty label name at index " + std::to_string(i));
        for (int j = i + 1; j < n; ++j)
            if (labels[i] == labels[j]) throw ValidationError("tree: duplicate label '" + labels[i] + "'");
    }
    if (root < 0 || root >= n) throw ValidationError("tree: root index out of range");
    if (static_cast<int>(edges.size()) != n - 1)
        throw ValidationError("tree: expected " + std::to_string(n - 1) + " edges, got " +
                              std::to_string(edges.size()));

    AirwayTree tree;
    tree.labels = std::move(labels);
    tree.root = root;
    tree.edges = std::move(edges);
    tree.adjacency.assign(n, {});
    for (const auto& [a, b] : tree.edges) {
        if (a < 0 || a >= n || b < 0 || b >= n)
            throw ValidationError("tree: edge endpoint out of range");
        if (a == b) throw ValidationError("tree: self-loop on node " + std::to_string(a));
        tree.adjacency[a].push_back(b);
        tree.adjacency[b].push_back(a);
    }
    for (auto& nbrs : tree.adjacency) std::sort(nbrs.begin(), nbrs.end());

    // n-1 edges + full reachability from the root <=> connected acyclic graph
    std::vector<char> seen(n, 0);
    std::queue<int> frontier;
    frontier.push(root);
    seen[root] = 1;
    int reached = 1;
    while (!frontier.empty()) {
        const int u = frontier.front();
        frontier.pop();
        for (int v : tree.adjacency[u]) {
            if (!seen[v]) {
                seen[v] = 1;
                ++reached;
                frontier.push(v);
            }
        }
    }
    if (reached != n) throw ValidationError("tree: graph is not connected (not a tree)");
    return tree;
}

// Tree-definition document: {"labels": [...], "root": name-or-index,
// "edges": [[a, b], ...]} where edge endpoints and the root may be given as
// label names or indices. Unknown keys are ignored.
inline AirwayTree parse_tree_document(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("tree document: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("labels") || !doc.contains("root") || !doc.contains("edges"))
        throw ValidationError("tree document: requires keys 'labels', 'root', 'edges'");

    std::vector<std::string> labels;
    for (const auto& l : doc["labels"]) {
        if (!l.is_string()) throw ValidationError("tree document: labels must be strings");
        labels.push_back(l.get<std::string>());
    }

    const auto resolve = [&labels](const nlohmann::json& node) -> int {
        if (node.is_number_integer()) return node.get<int>();
        if (node.is_string()) {
            const auto name = node.get<std::string>();
            for (std::size_t i = 0; i < labels.size(); ++i)
                if (labels[i] == name) return static_cast<int>(i);
            throw ValidationError("tree document: unknown label '" + name + "'");
        }
        throw ValidationError("tree document: node reference must be a label name or index");
    };

    const int root = resolve(doc["root"]);
    std::vector<std::pair<int, int>> edges;
    for (const auto& e : doc["edges"]) {
        if (!e.is_array() || e.size() != 2)
            throw ValidationError("tree document: each edge must be a pair");
        edges.emplace_back(resolve(e[0]), resolve(e[1]));
    }
    return make_tree(std::move(labels), root, std::move(edges));
}

// -----------------------------
// distance & regularization
// -----------------------------

// Per-source BFS; every edge weighs one hop.
inline DistanceMatrix distance_matrix(const AirwayTree& tree) {
    const int n = tree.size();
    DistanceMatrix d;
    d.n = n;
    d.hops.assign(static_cast<std::size_t>(n) * n, -1);
    std::vector<int> queue;
    queue.reserve(n);
    for (int src = 0; src < n; ++src) {
        auto* row = d.hops.data() + static_cast<std::size_t>(src) * n;
        queue.clear();
        queue.push_back(src);
        row[src] = 0;
        for (std::size_t head = 0; head < queue.size(); ++head) {
            const int u = queue[head];
            for (int v : tree.adjacency[u]) {
                if (row[v] < 0) {
                    row[v] = row[u] + 1;
                    queue.push_back(v);
                }
            }
        }
    }
    return d;
}

inline RegularizationMatrix regularization_matrix(const DistanceMatrix& d) {
    const int dmax = d.max_hops();
    if (dmax <= 0)
        throw ValidationError("regularization: single-node tree has max distance 0");
    RegularizationMatrix r;
    r.values = Matrix(d.n, d.n);
    for (int i = 0; i < d.n; ++i)
        for (int j = 0; j < d.n; ++j)
            r.values(i, j) = std::exp(static_cast<double>(d.at(i, j)) / dmax);
    return r;
}

// Preorder traversal from the root, neighbors in ascending index order.
// Collapses the tree onto a line so that anatomically close labels end up
// adjacent; used to order columns of exported cost matrices.
inline std::vector<int> depth_first_order(const AirwayTree& tree) {
    std::vector<int> order;
    order.reserve(tree.size());
    std::vector<char> seen(tree.size(), 0);
    std::vector<int> stack{tree.root};
    seen[tree.root] = 1;
    while (!stack.empty()) {
        const int u = stack.back();
        stack.pop_back();
        order.push_back(u);
        const auto& nbrs = tree.adjacency[u];
        for (auto it = nbrs.rbegin(); it != nbrs.rend(); ++it) {
            if (!seen[*it]) {
                seen[*it] = 1;
                stack.push_back(*it);
            }
        }
    }
    return order;
}

} // namespace airwaynav
