#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fluxgpp {

/// Dense row-major feature table with named columns. All values must be
/// finite; missing data is resolved upstream.
struct FeatureMatrix {
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<std::string> column_names;
    std::vector<double> values; // n_rows * n_cols, row-major

    double at(std::size_t r, std::size_t c) const {
        return values[r * n_cols + c];
    }
    /// Checks shape, finiteness, and column-name uniqueness.
    void validate() const;
};

struct GBTConfig {
    int n_trees = 500;
    double learning_rate = 0.1;
    int max_depth = 6;
    int min_samples_leaf = 5;
    double subsample_rows = 0.8;
    double subsample_cols = 1.0;
    std::uint64_t rng_seed = 42;
    double l2_leaf = 1.0; // lambda in leaf value sum(r) / (n + lambda)

    void validate() const;
};

/// One regression-tree node. Internal nodes route x[feature] < threshold
/// to `left`, otherwise to `right`; leaves carry `value`.
struct TreeNode {
    bool is_leaf = true;
    int feature = -1;
    double threshold = 0.0;
    int left = -1;  // child indices into Tree::nodes
    int right = -1;
    double value = 0.0;
};

struct Tree {
    std::vector<TreeNode> nodes; // nodes[0] is the root
    double predict_row(const double* row) const;
};

/// Boosted ensemble: prediction = base_score + learning_rate * sum of tree
/// outputs. Immutable once fitted; safe to share across threads.
struct TreeEnsemble {
    static constexpr int kFormatVersion = 1;

    double base_score = 0.0;
    double learning_rate = 0.1;
    std::vector<Tree> trees;
    GBTConfig config;
    std::vector<std::string> feature_names;
    /// Set when fit() found no usable split structure (all rows identical
    /// while y varies); the ensemble then carries only the base score.
    bool degenerate_warning = false;
};

/// Stagewise least-squares boosting with exact greedy splits. Residuals are
/// refit each round on a seeded row/column subsample; leaf values are
/// sum(residual) / (n_leaf + l2_leaf). Ties in split search go to the
/// lowest feature index, then the lowest threshold. Bit-reproducible for a
/// fixed seed.
TreeEnsemble fit_gbt(const FeatureMatrix& x, const std::vector<double>& y,
                     const GBTConfig& config);

/// Per-row ensemble prediction. Column names must match the model schema.
std::vector<double> predict(const TreeEnsemble& model, const FeatureMatrix& x);

/// Versioned JSON model format:
///   {format_version, config, feature_names, base_score, trees[...]}
/// with internal nodes {feat, thr, left, right} and leaves {value}.
std::string to_model_json(const TreeEnsemble& model);
TreeEnsemble from_model_json(const std::string& json_text);

void save_model(const TreeEnsemble& model, const std::string& path);
TreeEnsemble load_model(const std::string& path);

} // namespace fluxgpp
