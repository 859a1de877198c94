#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace printleak::gbdt {

struct Dataset {
    std::vector<std::vector<double>> rows;
    std::vector<int> labels; // class indices in [0, n_classes)
    int n_classes = 0;
    // Columns eligible for splitting; empty means all. Rows always carry the
    // full feature width.
    std::vector<int> feature_mask;

    std::size_t size() const { return rows.size(); }
};

struct TrainParams {
    int n_rounds = 200;
    int max_depth = 3;
    double learning_rate = 0.1;
    int min_leaf = 5;
    double subsample = 1.0;
    double lambda = 1.0; // L2 on leaf values
    std::uint64_t seed = 0;
};

// Flat node array; feature < 0 marks a leaf. Leaf values are stored with the
// learning rate already applied.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;

    bool is_leaf() const { return feature < 0; }
};

struct Tree {
    std::vector<TreeNode> nodes;

    double predict(std::span<const double> row) const;
};

struct GbdtModel {
    int n_classes = 0;
    int n_features = 0;
    TrainParams params;
    std::vector<int> feature_mask;
    std::vector<double> base_scores;          // class log-priors
    std::vector<std::vector<Tree>> ensembles; // [class][round]
    std::vector<double> loss_curve;           // multiclass log-loss, entry 0 = before boosting
};

// Softmax gradient boosting: each round fits one regression tree per class to
// the negative gradient of the multiclass log-loss, leaf values by Newton
// step (-G / (H + lambda)). Exact greedy splits over sorted feature values;
// ties break toward the lower feature index, then the lower threshold.
// Deterministic for a fixed seed.
GbdtModel train(const Dataset& data, const TrainParams& params = {});

// Softmax over base scores plus ensemble sums; components sum to 1.
std::vector<double> predict_proba(const GbdtModel& m, std::span<const double> row);

// Argmax of predict_proba; ties break to the lowest class index.
int predict_class(const GbdtModel& m, std::span<const double> row);

// Versioned text format with a magic header; doubles are written with 17
// significant digits so a save/load round trip predicts bit-identically.
void save_model(const GbdtModel& m, std::ostream& out);
GbdtModel load_model(std::istream& in);

} // namespace printleak::gbdt
