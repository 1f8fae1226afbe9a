#include "ccbart/tree.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>

namespace ccbart {

namespace {

// distinct observed values of a feature within a cell, excluding the maximum
// (a cutoff at the maximum would empty the right child under "<=" semantics)
std::vector<double> valid_cutoffs(const Dataset& data, const std::vector<int>& cell,
                                  int feature) {
    std::set<double> distinct;
    for (int i : cell) distinct.insert(data.x[feature][i]);
    if (distinct.size() < 2) return {};
    std::vector<double> out(distinct.begin(), distinct.end());
    out.pop_back();
    return out;
}

std::vector<int> node_cell(const DecisionTree& tree, const Dataset& data, int id) {
    std::vector<int> cell;
    for (std::size_t i = 0; i < data.n(); ++i) {
        int cur = tree.root();
        while (true) {
            if (cur == id) {
                cell.push_back(static_cast<int>(i));
                break;
            }
            const auto& node = tree.node(cur);
            if (node.is_leaf()) break;
            cur = data.x[node.feature][i] <= node.cutoff ? node.left : node.right;
        }
    }
    return cell;
}

bool all_leaves_nonempty(const DecisionTree& tree, const Dataset& data) {
    std::vector<int> count(tree.size(), 0);
    for (std::size_t i = 0; i < data.n(); ++i) ++count[tree.leaf_index_at(data, i)];
    for (int id = 0; id < tree.size(); ++id)
        if (tree.node(id).is_leaf() && count[id] == 0) return false;
    return true;
}

} // namespace

double DecisionTree::value_at(const Dataset& data, std::size_t i) const {
    return nodes_[leaf_index_at(data, i)].mu;
}

int DecisionTree::leaf_index_at(const Dataset& data, std::size_t i) const {
    int cur = 0;
    while (!nodes_[cur].is_leaf())
        cur = data.x[nodes_[cur].feature][i] <= nodes_[cur].cutoff ? nodes_[cur].left
                                                                   : nodes_[cur].right;
    return cur;
}

int DecisionTree::n_leaves() const {
    int count = 0;
    for (const auto& node : nodes_)
        if (node.is_leaf()) ++count;
    return count;
}

int DecisionTree::depth() const {
    std::function<int(int)> go = [&](int id) -> int {
        const auto& node = nodes_[id];
        if (node.is_leaf()) return 0;
        return 1 + std::max(go(node.left), go(node.right));
    };
    return go(0);
}

int DecisionTree::subtree_leaves(int id) const {
    const auto& node = nodes_[id];
    if (node.is_leaf()) return 1;
    return subtree_leaves(node.left) + subtree_leaves(node.right);
}

int DecisionTree::delta() const {
    if (nodes_[0].is_leaf()) return 0;
    return subtree_leaves(nodes_[0].right) - subtree_leaves(nodes_[0].left);
}

std::pair<int, int> DecisionTree::grow(int id, int feature, double cutoff) {
    const int l = static_cast<int>(nodes_.size());
    const int r = l + 1;
    Node child;
    child.parent = id;
    child.mu = nodes_[id].mu;
    nodes_.push_back(child);
    nodes_.push_back(child);
    nodes_[id].left = l;
    nodes_[id].right = r;
    nodes_[id].feature = feature;
    nodes_[id].cutoff = cutoff;
    return {l, r};
}

int DecisionTree::prune(int id, double mu) {
    nodes_[id].left = nodes_[id].right = -1;
    nodes_[id].mu = mu;
    // compact: rebuild in preorder so ids stay dense
    std::vector<Node> rebuilt;
    int merged = -1;
    std::function<int(int, int)> copy = [&](int old_id, int new_parent) -> int {
        const int new_id = static_cast<int>(rebuilt.size());
        rebuilt.push_back(nodes_[old_id]);
        rebuilt[new_id].parent = new_parent;
        if (old_id == id) merged = new_id;
        if (!nodes_[old_id].is_leaf()) {
            rebuilt[new_id].left = copy(nodes_[old_id].left, new_id);
            rebuilt[new_id].right = copy(nodes_[old_id].right, new_id);
        }
        return new_id;
    };
    copy(0, -1);
    nodes_ = std::move(rebuilt);
    return merged;
}

std::string DecisionTree::to_text() const {
    std::string out;
    char buf[128];
    std::function<void(int, int)> go = [&](int id, int indent) {
        out.append(indent, ' ');
        const auto& node = nodes_[id];
        if (node.is_leaf()) {
            std::snprintf(buf, sizeof(buf), "leaf %.17g\n", node.mu);
            out += buf;
        } else {
            std::snprintf(buf, sizeof(buf), "split x%d <= %.17g\n", node.feature + 1,
                          node.cutoff);
            out += buf;
            go(node.left, indent + 2);
            go(node.right, indent + 2);
        }
    };
    go(0, 0);
    return out;
}

NodeSets node_sets(const DecisionTree& tree) {
    NodeSets sets;
    for (int id = 0; id < tree.size(); ++id) {
        const auto& node = tree.node(id);
        if (node.is_leaf()) {
            sets.terminal.push_back(id);
        } else {
            sets.internal.push_back(id);
            if (tree.node(node.left).is_leaf() && tree.node(node.right).is_leaf())
                sets.prunable.push_back(id);
            if (node.parent >= 0) sets.parent_child.emplace_back(node.parent, id);
        }
    }
    return sets;
}

double log_prior(const DecisionTree& tree, const LossPriorParams& params) {
    const double n_l = tree.n_leaves();
    const double d = tree.delta();
    switch (params.sign) {
        case PriorSign::as_printed: return params.omega * n_l - params.zeta * d;
        case PriorSign::penalizing: return -params.omega * n_l - params.zeta * d;
        case PriorSign::penalizing_abs: return -params.omega * n_l - params.zeta * std::fabs(d);
    }
    return 0.0;
}

std::optional<double> log_rule_mass(const DecisionTree& tree, const Dataset& data) {
    double mass = 0.0;
    for (int id = 0; id < tree.size(); ++id) {
        const auto& node = tree.node(id);
        if (node.is_leaf()) continue;
        const auto cell = node_cell(tree, data, id);
        const auto cutoffs = valid_cutoffs(data, cell, node.feature);
        if (!std::binary_search(cutoffs.begin(), cutoffs.end(), node.cutoff))
            return std::nullopt;
        mass -= std::log(static_cast<double>(data.p())) +
                std::log(static_cast<double>(cutoffs.size()));
    }
    return mass;
}

std::vector<std::pair<int, std::vector<int>>> leaf_cells(const DecisionTree& tree,
                                                         const Dataset& data) {
    std::vector<std::vector<int>> by_node(tree.size());
    for (std::size_t i = 0; i < data.n(); ++i)
        by_node[tree.leaf_index_at(data, i)].push_back(static_cast<int>(i));
    std::vector<std::pair<int, std::vector<int>>> cells;
    for (int id = 0; id < tree.size(); ++id)
        if (tree.node(id).is_leaf()) cells.emplace_back(id, std::move(by_node[id]));
    return cells;
}

std::optional<GrowProposal> propose_grow(const DecisionTree& tree, const Dataset& data,
                                         Rng& rng) {
    const auto sets = node_sets(tree);
    const int leaf = sets.terminal[rng.uniform_index(sets.terminal.size())];
    auto cell = node_cell(tree, data, leaf);
    const int feature = static_cast<int>(rng.uniform_index(data.p()));
    const auto cutoffs = valid_cutoffs(data, cell, feature);
    if (cutoffs.empty()) return std::nullopt;
    const double cutoff = cutoffs[rng.uniform_index(cutoffs.size())];

    GrowProposal prop;
    prop.tree = tree;
    prop.grown_leaf = leaf;
    std::tie(prop.child_left, prop.child_right) = prop.tree.grow(leaf, feature, cutoff);
    prop.log_rule_prob =
        -std::log(static_cast<double>(data.p())) - std::log(static_cast<double>(cutoffs.size()));
    for (int i : cell)
        (data.x[feature][i] <= cutoff ? prop.cell_left : prop.cell_right).push_back(i);
    prop.cell = std::move(cell);
    return prop;
}

std::optional<PruneProposal> propose_prune(const DecisionTree& tree, const Dataset& data,
                                           Rng& rng) {
    const auto sets = node_sets(tree);
    if (sets.prunable.empty()) return std::nullopt;
    const int id = sets.prunable[rng.uniform_index(sets.prunable.size())];
    const auto& node = tree.node(id);

    PruneProposal prop;
    prop.mu_left = tree.node(node.left).mu;
    prop.mu_right = tree.node(node.right).mu;
    prop.cell = node_cell(tree, data, id);
    for (int i : prop.cell)
        (data.x[node.feature][i] <= node.cutoff ? prop.cell_left : prop.cell_right).push_back(i);
    const auto cutoffs = valid_cutoffs(data, prop.cell, node.feature);
    prop.log_rule_prob =
        -std::log(static_cast<double>(data.p())) - std::log(static_cast<double>(cutoffs.size()));
    prop.tree = tree;
    prop.merged_leaf = prop.tree.prune(id, 0.0);
    return prop;
}

std::optional<RuleChangeProposal> propose_change(const DecisionTree& tree, const Dataset& data,
                                                 Rng& rng) {
    const auto sets = node_sets(tree);
    if (sets.internal.empty()) return std::nullopt;
    const int id = sets.internal[rng.uniform_index(sets.internal.size())];
    const auto cell = node_cell(tree, data, id);
    const int feature = static_cast<int>(rng.uniform_index(data.p()));
    const auto cutoffs = valid_cutoffs(data, cell, feature);
    if (cutoffs.empty()) return std::nullopt;

    RuleChangeProposal prop;
    prop.tree = tree;
    prop.tree.set_rule(id, feature, cutoffs[rng.uniform_index(cutoffs.size())]);
    if (!all_leaves_nonempty(prop.tree, data)) return std::nullopt;
    const double log_p = std::log(static_cast<double>(data.p()));
    prop.log_fwd_rule = -log_p - std::log(static_cast<double>(cutoffs.size()));
    const auto old_cutoffs = valid_cutoffs(data, cell, tree.node(id).feature);
    prop.log_rev_rule = -log_p - std::log(static_cast<double>(old_cutoffs.size()));
    return prop;
}

std::optional<RuleChangeProposal> propose_swap(const DecisionTree& tree, const Dataset& data,
                                               Rng& rng) {
    const auto sets = node_sets(tree);
    if (sets.parent_child.empty()) return std::nullopt;
    const auto [parent, child] = sets.parent_child[rng.uniform_index(sets.parent_child.size())];
    RuleChangeProposal prop;
    prop.tree = tree;
    const auto pn = tree.node(parent);
    const auto cn = tree.node(child);
    prop.tree.set_rule(parent, cn.feature, cn.cutoff);
    prop.tree.set_rule(child, pn.feature, pn.cutoff);
    if (!all_leaves_nonempty(prop.tree, data)) return std::nullopt;
    return prop;
}

} // namespace ccbart
