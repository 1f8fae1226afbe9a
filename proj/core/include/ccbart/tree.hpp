#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ccbart/dataset.hpp"
#include "ccbart/rng.hpp"

namespace ccbart {

// Binary regression tree. Internal nodes hold a split rule "x_{.feature} <= cutoff
// goes left"; terminal nodes hold the value mu. Nodes live in a flat vector;
// structural edits rebuild it, so node ids are only stable between edits.
class DecisionTree {
public:
    struct Node {
        int left = -1, right = -1, parent = -1;
        int feature = 0;
        double cutoff = 0.0;
        double mu = 0.0;
        bool is_leaf() const { return left < 0; }
    };

    DecisionTree() : nodes_(1) {}
    explicit DecisionTree(double mu) : nodes_(1) { nodes_[0].mu = mu; }

    const Node& node(int id) const { return nodes_[id]; }
    int size() const { return static_cast<int>(nodes_.size()); }
    int root() const { return 0; }

    double value_at(const Dataset& data, std::size_t i) const;
    int leaf_index_at(const Dataset& data, std::size_t i) const;

    int n_leaves() const;
    int depth() const; // edges on the longest root-to-leaf path; 0 for a single node

    // #terminal nodes in the root's right subtree minus the left subtree; 0 for
    // the trivial tree
    int delta() const;

    void set_mu(int id, double mu) { nodes_[id].mu = mu; }
    void set_rule(int id, int feature, double cutoff) {
        nodes_[id].feature = feature;
        nodes_[id].cutoff = cutoff;
    }

    // split leaf `id` in place; returns (left child id, right child id)
    std::pair<int, int> grow(int id, int feature, double cutoff);
    // delete the two terminal children of `id` and make it a leaf with value mu;
    // node ids are remapped, the returned id refers to the merged leaf
    int prune(int id, double mu);

    std::string to_text() const;

private:
    int subtree_leaves(int id) const;
    std::vector<Node> nodes_;
};

struct NodeSets {
    std::vector<int> terminal;                    // TN
    std::vector<int> internal;                    // IN
    std::vector<int> prunable;                    // PN: internal with two terminal children
    std::vector<std::pair<int, int>> parent_child; // PCN: internal parent-child pairs
};

NodeSets node_sets(const DecisionTree& tree);

enum class PriorSign {
    as_printed,     // log pi = omega * n_L - zeta * delta
    penalizing,     // log pi = -omega * n_L - zeta * delta
    penalizing_abs, // log pi = -omega * n_L - zeta * |delta|
};

struct LossPriorParams {
    double omega = 1.62;
    double zeta = 0.62;
    PriorSign sign = PriorSign::as_printed;
};

double log_prior(const DecisionTree& tree, const LossPriorParams& params);

// Total log rule mass of the tree: every internal node contributes
// -log(p * #valid cutoffs of its feature within its cell). Returns nullopt when
// the tree is off-support, i.e. some internal cutoff is not a valid cutoff for
// its cell (reachable through change/swap proposals, which reshape descendant
// cells); off-support proposals must be rejected.
std::optional<double> log_rule_mass(const DecisionTree& tree, const Dataset& data);

// observation indices falling into each leaf; keyed by leaf node id
std::vector<std::pair<int, std::vector<int>>> leaf_cells(const DecisionTree& tree,
                                                         const Dataset& data);

struct GrowProposal {
    DecisionTree tree;            // proposed tree; children carry mu = parent's mu
    int grown_leaf = -1;          // id of the split node (same id in both trees)
    int child_left = -1, child_right = -1;
    double log_rule_prob = 0.0;   // log pi_RULE of the drawn rule
    std::vector<int> cell;        // observations in the grown leaf
    std::vector<int> cell_left, cell_right;
};

struct PruneProposal {
    DecisionTree tree;            // proposed tree (ids remapped)
    int merged_leaf = -1;         // id of the merged leaf in the proposed tree
    double mu_left = 0.0, mu_right = 0.0;
    double log_rule_prob = 0.0;   // log pi_RULE of the deleted rule (reverse grow)
    std::vector<int> cell, cell_left, cell_right;
};

struct RuleChangeProposal {
    DecisionTree tree;           // proposed tree; structure and leaf values unchanged
    double log_fwd_rule = 0.0;   // log pi_RULE of the freshly drawn rule (change only)
    double log_rev_rule = 0.0;   // log pi_RULE of the replaced rule (change only)
};

// nullopt means the move is unavailable for this draw (counts as an automatic
// rejection; the kernel mixture weights stay fixed).
std::optional<GrowProposal> propose_grow(const DecisionTree& tree, const Dataset& data, Rng& rng);
std::optional<PruneProposal> propose_prune(const DecisionTree& tree, const Dataset& data,
                                           Rng& rng);
std::optional<RuleChangeProposal> propose_change(const DecisionTree& tree, const Dataset& data,
                                                 Rng& rng);
std::optional<RuleChangeProposal> propose_swap(const DecisionTree& tree, const Dataset& data,
                                               Rng& rng);

} // namespace ccbart
