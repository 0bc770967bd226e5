#include "fluxgpp/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <json.hpp>

#include "fluxgpp/errors.hpp"
#include "fluxgpp/numio.hpp"
#include "fluxgpp/rng.hpp"

namespace fluxgpp {

namespace {

// Gains this small are treated as zero so fp dust cannot manufacture a
// split where the exact arithmetic has none.
constexpr double kMinGain = 1e-12;

} // namespace

void FeatureMatrix::validate() const {
    if (column_names.size() != n_cols) {
        throw InputError("FeatureMatrix: column_names size != n_cols");
    }
    if (values.size() != n_rows * n_cols) {
        throw InputError("FeatureMatrix: values size != n_rows * n_cols");
    }
    std::set<std::string> seen;
    for (const auto& name : column_names) {
        if (!seen.insert(name).second) {
            throw InputError("FeatureMatrix: duplicate column '" + name + "'");
        }
    }
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw InputError("FeatureMatrix: non-finite value");
        }
    }
}

void GBTConfig::validate() const {
    if (n_trees < 1) throw InputError("GBTConfig: n_trees must be >= 1");
    if (!(learning_rate > 0.0 && learning_rate <= 1.0)) {
        throw InputError("GBTConfig: learning_rate must lie in (0, 1]");
    }
    if (max_depth < 0) throw InputError("GBTConfig: max_depth must be >= 0");
    if (min_samples_leaf < 1) {
        throw InputError("GBTConfig: min_samples_leaf must be >= 1");
    }
    if (!(subsample_rows > 0.0 && subsample_rows <= 1.0)) {
        throw InputError("GBTConfig: subsample_rows must lie in (0, 1]");
    }
    if (!(subsample_cols > 0.0 && subsample_cols <= 1.0)) {
        throw InputError("GBTConfig: subsample_cols must lie in (0, 1]");
    }
    if (!(l2_leaf >= 0.0) || !std::isfinite(l2_leaf)) {
        throw InputError("GBTConfig: l2_leaf must be >= 0");
    }
}

double Tree::predict_row(const double* row) const {
    int idx = 0;
    while (!nodes[static_cast<std::size_t>(idx)].is_leaf) {
        const TreeNode& n = nodes[static_cast<std::size_t>(idx)];
        idx = row[n.feature] < n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(idx)].value;
}

namespace {

// Builds one CART regression tree on the residuals of the selected rows.
// Each selected feature keeps its row indices sorted by value; nodes own
// [begin, end) ranges of those arrays and splits partition them stably, so
// the scan order (and therefore every floating-point sum) is deterministic.
class TreeBuilder {
public:
    TreeBuilder(const FeatureMatrix& x, const std::vector<double>& residual,
                const std::vector<std::size_t>& rows,
                const std::vector<std::size_t>& cols, const GBTConfig& cfg)
        : x_(x), residual_(residual), cols_(cols), cfg_(cfg) {
        order_.resize(cols_.size());
        for (std::size_t fi = 0; fi < cols_.size(); ++fi) {
            order_[fi] = rows;
            const std::size_t f = cols_[fi];
            std::sort(order_[fi].begin(), order_[fi].end(),
                      [&](std::size_t a, std::size_t b) {
                          const double xa = x_.at(a, f);
                          const double xb = x_.at(b, f);
                          return xa < xb || (xa == xb && a < b);
                      });
        }
        scratch_.resize(rows.size());
    }

    Tree build() {
        Tree tree;
        build_node(tree, 0, 0, order_.empty() ? 0 : order_[0].size());
        return tree;
    }

private:
    struct Split {
        bool found = false;
        std::size_t feature_pos = 0; // index into cols_
        double threshold = 0.0;
        double gain = kMinGain;
        std::size_t n_left = 0;
    };

    double node_sum(std::size_t begin, std::size_t end) const {
        double s = 0.0;
        for (std::size_t i = begin; i < end; ++i) s += residual_[order_[0][i]];
        return s;
    }

    Split best_split(std::size_t begin, std::size_t end, double total_sum) const {
        const double n = static_cast<double>(end - begin);
        const double lambda = cfg_.l2_leaf;
        const double parent_score = total_sum * total_sum / (n + lambda);
        const std::size_t msl = static_cast<std::size_t>(cfg_.min_samples_leaf);
        Split best;
        for (std::size_t fi = 0; fi < cols_.size(); ++fi) {
            const std::size_t f = cols_[fi];
            const auto& ord = order_[fi];
            double left_sum = 0.0;
            for (std::size_t i = begin; i + 1 < end; ++i) {
                left_sum += residual_[ord[i]];
                const double a = x_.at(ord[i], f);
                const double b = x_.at(ord[i + 1], f);
                if (a == b) continue;
                const std::size_t n_left = i + 1 - begin;
                const std::size_t n_right = end - i - 1;
                if (n_left < msl || n_right < msl) continue;
                const double right_sum = total_sum - left_sum;
                const double gain =
                    left_sum * left_sum / (static_cast<double>(n_left) + lambda) +
                    right_sum * right_sum / (static_cast<double>(n_right) + lambda) -
                    parent_score;
                if (gain > best.gain) {
                    double thr = 0.5 * (a + b);
                    if (!(thr > a)) thr = b; // adjacent doubles: keep a < thr <= b
                    best.found = true;
                    best.feature_pos = fi;
                    best.threshold = thr;
                    best.gain = gain;
                    best.n_left = n_left;
                }
            }
        }
        return best;
    }

    void partition(std::size_t begin, std::size_t end, std::size_t feature,
                   double threshold) {
        for (auto& ord : order_) {
            std::size_t lo = begin;
            std::size_t hi = 0;
            for (std::size_t i = begin; i < end; ++i) {
                if (x_.at(ord[i], feature) < threshold) {
                    ord[lo++] = ord[i];
                } else {
                    scratch_[hi++] = ord[i];
                }
            }
            std::copy(scratch_.begin(), scratch_.begin() + static_cast<long>(hi),
                      ord.begin() + static_cast<long>(lo));
        }
    }

    int build_node(Tree& tree, int depth, std::size_t begin, std::size_t end) {
        const int idx = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        const std::size_t n = end - begin;
        const double total = node_sum(begin, end);

        Split split;
        if (depth < cfg_.max_depth && n >= 2 * static_cast<std::size_t>(cfg_.min_samples_leaf)) {
            split = best_split(begin, end, total);
        }
        if (!split.found) {
            tree.nodes[static_cast<std::size_t>(idx)].value =
                total / (static_cast<double>(n) + cfg_.l2_leaf);
            return idx;
        }
        const std::size_t feature = cols_[split.feature_pos];
        partition(begin, end, feature, split.threshold);
        const int left = build_node(tree, depth + 1, begin, begin + split.n_left);
        const int right = build_node(tree, depth + 1, begin + split.n_left, end);
        TreeNode& node = tree.nodes[static_cast<std::size_t>(idx)];
        node.is_leaf = false;
        node.feature = static_cast<int>(feature);
        node.threshold = split.threshold;
        node.left = left;
        node.right = right;
        return idx;
    }

    const FeatureMatrix& x_;
    const std::vector<double>& residual_;
    std::vector<std::size_t> cols_;
    const GBTConfig& cfg_;
    std::vector<std::vector<std::size_t>> order_;
    std::vector<std::size_t> scratch_;
};

bool all_rows_identical(const FeatureMatrix& x) {
    if (x.n_rows <= 1) return true;
    for (std::size_t c = 0; c < x.n_cols; ++c) {
        const double v0 = x.at(0, c);
        for (std::size_t r = 1; r < x.n_rows; ++r) {
            if (x.at(r, c) != v0) return false;
        }
    }
    return true;
}

} // namespace

TreeEnsemble fit_gbt(const FeatureMatrix& x, const std::vector<double>& y,
                     const GBTConfig& config) {
    config.validate();
    x.validate();
    if (x.n_rows != y.size()) {
        throw InputError("fit_gbt: rows(X) != len(y)");
    }
    if (x.n_rows < 2 * static_cast<std::size_t>(config.min_samples_leaf)) {
        throw InputError("fit_gbt: need at least 2*min_samples_leaf rows, got " +
                         std::to_string(x.n_rows));
    }
    for (double v : y) {
        if (!std::isfinite(v)) throw InputError("fit_gbt: non-finite target");
    }

    TreeEnsemble model;
    model.config = config;
    model.learning_rate = config.learning_rate;
    model.feature_names = x.column_names;

    double sum = 0.0;
    for (double v : y) sum += v;
    model.base_score = sum / static_cast<double>(y.size());

    std::vector<double> residual(y.size());
    bool y_constant = true;
    for (std::size_t i = 0; i < y.size(); ++i) {
        residual[i] = y[i] - model.base_score;
        if (y[i] != y[0]) y_constant = false;
    }

    if (all_rows_identical(x) && !y_constant) {
        model.degenerate_warning = true;
        return model;
    }

    std::mt19937_64 rng(config.rng_seed);
    const std::size_t n = x.n_rows;
    std::vector<std::size_t> all_rows(n);
    std::iota(all_rows.begin(), all_rows.end(), std::size_t{0});
    std::vector<std::size_t> all_cols(x.n_cols);
    std::iota(all_cols.begin(), all_cols.end(), std::size_t{0});

    model.trees.reserve(static_cast<std::size_t>(config.n_trees));
    for (int round = 0; round < config.n_trees; ++round) {
        std::vector<std::size_t> rows = all_rows;
        if (config.subsample_rows < 1.0) {
            auto k = static_cast<std::size_t>(
                std::floor(config.subsample_rows * static_cast<double>(n)));
            if (k < 1) k = 1;
            rows = sample_without_replacement(rng, n, k);
        }
        std::vector<std::size_t> cols = all_cols;
        if (config.subsample_cols < 1.0) {
            auto k = static_cast<std::size_t>(std::floor(
                config.subsample_cols * static_cast<double>(x.n_cols)));
            if (k < 1) k = 1;
            cols = sample_without_replacement(rng, x.n_cols, k);
        }

        TreeBuilder builder(x, residual, rows, cols, config);
        Tree tree = builder.build();

        for (std::size_t r = 0; r < n; ++r) {
            residual[r] -= config.learning_rate *
                           tree.predict_row(&x.values[r * x.n_cols]);
        }
        model.trees.push_back(std::move(tree));
    }
    return model;
}

std::vector<double> predict(const TreeEnsemble& model, const FeatureMatrix& x) {
    x.validate();
    if (x.column_names != model.feature_names) {
        throw InputError(
            "predict: feature columns do not match the model schema");
    }
    std::vector<double> out(x.n_rows, model.base_score);
    for (std::size_t r = 0; r < x.n_rows; ++r) {
        const double* row = &x.values[r * x.n_cols];
        double acc = 0.0;
        for (const auto& tree : model.trees) acc += tree.predict_row(row);
        out[r] += model.learning_rate * acc;
    }
    return out;
}

namespace {

using nlohmann::json;

json node_to_json(const Tree& tree, int idx) {
    const TreeNode& n = tree.nodes[static_cast<std::size_t>(idx)];
    if (n.is_leaf) return json{{"value", n.value}};
    return json{{"feat", n.feature},
                {"thr", n.threshold},
                {"left", node_to_json(tree, n.left)},
                {"right", node_to_json(tree, n.right)}};
}

int node_from_json(const json& j, Tree& tree, std::size_t n_features,
                   int depth) {
    if (depth > 64) throw InputError("model file: tree nesting too deep");
    if (!j.is_object()) throw InputError("model file: node is not an object");
    const int idx = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    if (j.contains("value")) {
        if (!j.at("value").is_number()) {
            throw InputError("model file: leaf value is not a number");
        }
        tree.nodes[static_cast<std::size_t>(idx)].value =
            j.at("value").get<double>();
        return idx;
    }
    for (const char* key : {"feat", "thr", "left", "right"}) {
        if (!j.contains(key)) {
            throw InputError(std::string("model file: internal node misses '") +
                             key + "'");
        }
    }
    const int feat = j.at("feat").get<int>();
    if (feat < 0 || static_cast<std::size_t>(feat) >= n_features) {
        throw InputError("model file: feature index out of range: " +
                         std::to_string(feat));
    }
    const double thr = j.at("thr").get<double>();
    const int left = node_from_json(j.at("left"), tree, n_features, depth + 1);
    const int right = node_from_json(j.at("right"), tree, n_features, depth + 1);
    TreeNode& n = tree.nodes[static_cast<std::size_t>(idx)];
    n.is_leaf = false;
    n.feature = feat;
    n.threshold = thr;
    n.left = left;
    n.right = right;
    return idx;
}

} // namespace

std::string to_model_json(const TreeEnsemble& model) {
    json j;
    j["format_version"] = TreeEnsemble::kFormatVersion;
    j["config"] = {{"n_trees", model.config.n_trees},
                   {"learning_rate", model.config.learning_rate},
                   {"max_depth", model.config.max_depth},
                   {"min_samples_leaf", model.config.min_samples_leaf},
                   {"subsample_rows", model.config.subsample_rows},
                   {"subsample_cols", model.config.subsample_cols},
                   {"rng_seed", model.config.rng_seed},
                   {"l2_leaf", model.config.l2_leaf}};
    j["feature_names"] = model.feature_names;
    j["base_score"] = model.base_score;
    json trees = json::array();
    for (const auto& tree : model.trees) trees.push_back(node_to_json(tree, 0));
    j["trees"] = std::move(trees);
    return j.dump() + "\n";
}

TreeEnsemble from_model_json(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw InputError(std::string("model file: malformed JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("format_version")) {
        throw InputError("model file: missing format_version");
    }
    const int version = j.at("format_version").get<int>();
    if (version != TreeEnsemble::kFormatVersion) {
        throw InputError("model file: unsupported format_version " +
                         std::to_string(version) + " (expected " +
                         std::to_string(TreeEnsemble::kFormatVersion) + ")");
    }
    TreeEnsemble model;
    try {
        const json& c = j.at("config");
        model.config.n_trees = c.at("n_trees").get<int>();
        model.config.learning_rate = c.at("learning_rate").get<double>();
        model.config.max_depth = c.at("max_depth").get<int>();
        model.config.min_samples_leaf = c.at("min_samples_leaf").get<int>();
        model.config.subsample_rows = c.at("subsample_rows").get<double>();
        model.config.subsample_cols = c.at("subsample_cols").get<double>();
        model.config.rng_seed = c.at("rng_seed").get<std::uint64_t>();
        model.config.l2_leaf = c.at("l2_leaf").get<double>();
        model.feature_names =
            j.at("feature_names").get<std::vector<std::string>>();
        model.base_score = j.at("base_score").get<double>();
        for (const json& t : j.at("trees")) {
            Tree tree;
            node_from_json(t, tree, model.feature_names.size(), 0);
            model.trees.push_back(std::move(tree));
        }
    } catch (const json::exception& e) {
        throw InputError(std::string("model file: invalid structure: ") +
                         e.what());
    }
    model.config.validate();
    model.learning_rate = model.config.learning_rate;
    return model;
}

void save_model(const TreeEnsemble& model, const std::string& path) {
    write_text_file(path, to_model_json(model));
}

TreeEnsemble load_model(const std::string& path) {
    try {
        return from_model_json(read_text_file(path));
    } catch (const InputError& e) {
        throw InputError(path + ": " + e.what());
    }
}

} // namespace fluxgpp
