#include "printleak/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include "printleak/errors.hpp"
#include "printleak/rng.hpp"
#include "text_util.hpp"

namespace printleak::gbdt {

namespace {

constexpr double kMinGain = 1e-12;
constexpr const char* kMagic = "printleak-gbdt";
constexpr int kVersion = 1;

struct GradHess {
    double g = 0.0;
    double h = 0.0;
};

// Exact greedy tree construction on presorted index lists. Lists are
// partitioned on the way down so sort order is paid once per (round, class).
class TreeBuilder {
public:
    TreeBuilder(const Dataset& data, const std::vector<int>& mask,
                const std::vector<GradHess>& gh, const TrainParams& params)
        : data_(data), mask_(mask), gh_(gh), params_(params) {}

    Tree build(const std::vector<std::vector<int>>& root_lists) {
        Tree tree;
        grow(tree, root_lists, 0);
        return tree;
    }

private:
    int grow(Tree& tree, const std::vector<std::vector<int>>& lists, int depth) {
        const std::vector<int>& rows = lists.front();
        double g_sum = 0.0, h_sum = 0.0;
        for (int r : rows) {
            g_sum += gh_[static_cast<std::size_t>(r)].g;
            h_sum += gh_[static_cast<std::size_t>(r)].h;
        }

        const int node_index = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes[static_cast<std::size_t>(node_index)].value =
            -g_sum / (h_sum + params_.lambda) * params_.learning_rate;

        if (depth >= params_.max_depth ||
            rows.size() < 2 * static_cast<std::size_t>(params_.min_leaf)) {
            return node_index;
        }

        const double parent_score = g_sum * g_sum / (h_sum + params_.lambda);
        double best_gain = kMinGain;
        int best_feature = -1;
        double best_threshold = 0.0;

        for (std::size_t fi = 0; fi < mask_.size(); ++fi) {
            const int f = mask_[fi];
            const std::vector<int>& order = lists[fi];
            double gl = 0.0, hl = 0.0;
            for (std::size_t i = 0; i + 1 < order.size(); ++i) {
                const int r = order[i];
                gl += gh_[static_cast<std::size_t>(r)].g;
                hl += gh_[static_cast<std::size_t>(r)].h;
                const double v = value(r, f);
                const double v_next = value(order[i + 1], f);
                if (v == v_next) continue;
                const std::size_t left_count = i + 1;
                const std::size_t right_count = order.size() - left_count;
                if (left_count < static_cast<std::size_t>(params_.min_leaf) ||
                    right_count < static_cast<std::size_t>(params_.min_leaf)) {
                    continue;
                }
                const double threshold = v + (v_next - v) / 2.0;
                if (!(v < threshold)) continue; // adjacent representable values
                const double gr = g_sum - gl;
                const double hr = h_sum - hl;
                const double gain = gl * gl / (hl + params_.lambda) +
                                    gr * gr / (hr + params_.lambda) - parent_score;
                // Strictly-greater keeps the first (lowest feature, lowest
                // threshold) candidate on ties.
                if (gain > best_gain) {
                    best_gain = gain;
                    best_feature = f;
                    best_threshold = threshold;
                }
            }
        }

        if (best_feature < 0) return node_index;

        std::vector<std::vector<int>> left_lists(lists.size());
        std::vector<std::vector<int>> right_lists(lists.size());
        for (std::size_t fi = 0; fi < lists.size(); ++fi) {
            for (int r : lists[fi]) {
                if (value(r, best_feature) < best_threshold) {
                    left_lists[fi].push_back(r);
                } else {
                    right_lists[fi].push_back(r);
                }
            }
        }

        const int left_index = grow(tree, left_lists, depth + 1);
        const int right_index = grow(tree, right_lists, depth + 1);
        TreeNode& node = tree.nodes[static_cast<std::size_t>(node_index)];
        node.feature = best_feature;
        node.threshold = best_threshold;
        node.left = left_index;
        node.right = right_index;
        return node_index;
    }

    double value(int row, int feature) const {
        return data_.rows[static_cast<std::size_t>(row)][static_cast<std::size_t>(feature)];
    }

    const Dataset& data_;
    const std::vector<int>& mask_;
    const std::vector<GradHess>& gh_;
    const TrainParams& params_;
};

void softmax_inplace(std::vector<double>& scores) {
    const double m = *std::max_element(scores.begin(), scores.end());
    double sum = 0.0;
    for (auto& s : scores) {
        s = std::exp(s - m);
        sum += s;
    }
    for (auto& s : scores) s /= sum;
}

double dataset_logloss(const std::vector<std::vector<double>>& probs,
                       const std::vector<int>& labels) {
    double loss = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double p = probs[i][static_cast<std::size_t>(labels[i])];
        loss -= std::log(std::max(p, 1e-15));
    }
    return loss / static_cast<double>(labels.size());
}

} // namespace

double Tree::predict(std::span<const double> row) const {
    std::size_t i = 0;
    while (!nodes[i].is_leaf()) {
        const TreeNode& n = nodes[i];
        i = static_cast<std::size_t>(row[static_cast<std::size_t>(n.feature)] < n.threshold
                                         ? n.left
                                         : n.right);
    }
    return nodes[i].value;
}

GbdtModel train(const Dataset& data, const TrainParams& params) {
    const std::size_t n = data.rows.size();
    if (n == 0) throw ModelError("gbdt train: empty dataset");
    const int n_features = static_cast<int>(data.rows.front().size());
    for (const auto& r : data.rows) {
        if (static_cast<int>(r.size()) != n_features) {
            throw ModelError("gbdt train: ragged feature rows");
        }
    }
    int n_classes = data.n_classes;
    for (int y : data.labels) {
        if (y < 0 || (n_classes > 0 && y >= n_classes)) {
            throw ModelError("gbdt train: label out of range");
        }
    }
    if (n_classes == 0) {
        for (int y : data.labels) n_classes = std::max(n_classes, y + 1);
    }
    if (data.labels.size() != n) throw ModelError("gbdt train: labels/rows size mismatch");
    if (params.learning_rate <= 0.0 || params.learning_rate > 1.0) {
        throw ModelError("gbdt train: learning_rate must be in (0, 1]");
    }

    std::vector<int> mask = data.feature_mask;
    if (mask.empty()) {
        for (int f = 0; f < n_features; ++f) mask.push_back(f);
    }
    for (int f : mask) {
        if (f < 0 || f >= n_features) throw ModelError("gbdt train: feature mask out of range");
    }

    GbdtModel model;
    model.n_classes = n_classes;
    model.n_features = n_features;
    model.params = params;
    model.feature_mask = mask;
    model.ensembles.assign(static_cast<std::size_t>(n_classes), {});

    // Base scores: class log-priors.
    std::vector<double> counts(static_cast<std::size_t>(n_classes), 0.0);
    for (int y : data.labels) counts[static_cast<std::size_t>(y)] += 1.0;
    model.base_scores.resize(static_cast<std::size_t>(n_classes));
    for (int c = 0; c < n_classes; ++c) {
        const double prior = counts[static_cast<std::size_t>(c)] / static_cast<double>(n);
        model.base_scores[static_cast<std::size_t>(c)] = std::log(std::max(prior, 1e-12));
    }

    // scores[i][c], probs recomputed per round.
    std::vector<std::vector<double>> scores(n, model.base_scores);
    std::vector<std::vector<double>> probs(n);
    auto refresh_probs = [&]() {
        for (std::size_t i = 0; i < n; ++i) {
            probs[i] = scores[i];
            softmax_inplace(probs[i]);
        }
    };
    refresh_probs();
    model.loss_curve.push_back(dataset_logloss(probs, data.labels));

    // Presorted row indices per masked feature, stable in the row order.
    std::vector<std::vector<int>> base_order(mask.size());
    for (std::size_t fi = 0; fi < mask.size(); ++fi) {
        auto& order = base_order[fi];
        order.resize(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<int>(i);
        const int f = mask[fi];
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return data.rows[static_cast<std::size_t>(a)][static_cast<std::size_t>(f)] <
                   data.rows[static_cast<std::size_t>(b)][static_cast<std::size_t>(f)];
        });
    }

    Rng rng(params.seed);
    std::vector<GradHess> gh(n);
    for (int round = 0; round < params.n_rounds; ++round) {
        // Row subset for this round, shared across the per-class trees.
        std::vector<char> in_round(n, 1);
        if (params.subsample < 1.0) {
            std::vector<int> idx(n);
            for (std::size_t i = 0; i < n; ++i) idx[i] = static_cast<int>(i);
            rng.shuffle(idx);
            const std::size_t keep = std::max<std::size_t>(
                1, static_cast<std::size_t>(std::floor(params.subsample * static_cast<double>(n))));
            std::fill(in_round.begin(), in_round.end(), 0);
            for (std::size_t i = 0; i < keep; ++i) in_round[static_cast<std::size_t>(idx[i])] = 1;
        }

        std::vector<std::vector<int>> round_order;
        if (params.subsample < 1.0) {
            round_order.resize(base_order.size());
            for (std::size_t fi = 0; fi < base_order.size(); ++fi) {
                for (int r : base_order[fi]) {
                    if (in_round[static_cast<std::size_t>(r)]) round_order[fi].push_back(r);
                }
            }
        }
        const std::vector<std::vector<int>>& order =
            params.subsample < 1.0 ? round_order : base_order;

        for (int c = 0; c < n_classes; ++c) {
            for (std::size_t i = 0; i < n; ++i) {
                const double p = probs[i][static_cast<std::size_t>(c)];
                gh[i].g = p - (data.labels[i] == c ? 1.0 : 0.0);
                gh[i].h = std::max(p * (1.0 - p), 1e-16);
            }
            TreeBuilder builder(data, mask, gh, params);
            Tree tree = builder.build(order);
            for (std::size_t i = 0; i < n; ++i) {
                scores[i][static_cast<std::size_t>(c)] += tree.predict(data.rows[i]);
            }
            model.ensembles[static_cast<std::size_t>(c)].push_back(std::move(tree));
        }
        refresh_probs();
        model.loss_curve.push_back(dataset_logloss(probs, data.labels));
    }
    return model;
}

std::vector<double> predict_proba(const GbdtModel& m, std::span<const double> row) {
    if (static_cast<int>(row.size()) != m.n_features) {
        throw ModelError("predict: feature vector has " + std::to_string(row.size()) +
                         " values, model wants " + std::to_string(m.n_features));
    }
    std::vector<double> scores = m.base_scores;
    for (int c = 0; c < m.n_classes; ++c) {
        for (const Tree& t : m.ensembles[static_cast<std::size_t>(c)]) {
            scores[static_cast<std::size_t>(c)] += t.predict(row);
        }
    }
    softmax_inplace(scores);
    return scores;
}

int predict_class(const GbdtModel& m, std::span<const double> row) {
    const auto p = predict_proba(m, row);
    int best = 0;
    for (int c = 1; c < m.n_classes; ++c) {
        if (p[static_cast<std::size_t>(c)] > p[static_cast<std::size_t>(best)]) best = c;
    }
    return best;
}

void save_model(const GbdtModel& m, std::ostream& out) {
    out << kMagic << ' ' << kVersion << '\n';
    out << "n_classes " << m.n_classes << '\n';
    out << "n_features " << m.n_features << '\n';
    out << "params " << m.params.n_rounds << ' ' << m.params.max_depth << ' '
        << detail::format_exact(m.params.learning_rate) << ' ' << m.params.min_leaf << ' '
        << detail::format_exact(m.params.subsample) << ' ' << detail::format_exact(m.params.lambda)
        << ' ' << m.params.seed << '\n';
    out << "feature_mask " << m.feature_mask.size();
    for (int f : m.feature_mask) out << ' ' << f;
    out << '\n';
    out << "base_scores";
    for (double b : m.base_scores) out << ' ' << detail::format_exact(b);
    out << '\n';
    out << "loss_curve " << m.loss_curve.size();
    for (double l : m.loss_curve) out << ' ' << detail::format_exact(l);
    out << '\n';
    for (int c = 0; c < m.n_classes; ++c) {
        const auto& ens = m.ensembles[static_cast<std::size_t>(c)];
        out << "ensemble " << c << ' ' << ens.size() << '\n';
        for (const Tree& t : ens) {
            out << "tree " << t.nodes.size() << '\n';
            for (const TreeNode& nd : t.nodes) {
                if (nd.is_leaf()) {
                    out << "leaf " << detail::format_exact(nd.value) << '\n';
                } else {
                    out << "split " << nd.feature << ' ' << detail::format_exact(nd.threshold)
                        << ' ' << nd.left << ' ' << nd.right << ' '
                        << detail::format_exact(nd.value) << '\n';
                }
            }
        }
    }
    out << "end\n";
}

namespace {

template <typename T>
T expect_value(std::istream& in, const char* what) {
    T v{};
    if (!(in >> v)) throw ModelError(std::string("gbdt load: truncated stream reading ") + what);
    return v;
}

void expect_token(std::istream& in, const std::string& want) {
    std::string tok;
    if (!(in >> tok)) throw ModelError("gbdt load: truncated stream, expected '" + want + "'");
    if (tok != want) {
        throw ModelError("gbdt load: expected '" + want + "', found '" + tok + "'");
    }
}

} // namespace

GbdtModel load_model(std::istream& in) {
    std::string magic;
    if (!(in >> magic)) throw ModelError("gbdt load: empty stream");
    if (magic != kMagic) throw ModelError("gbdt load: bad magic '" + magic + "'");
    const int version = expect_value<int>(in, "version");
    if (version != kVersion) {
        throw ModelError("gbdt load: unsupported version " + std::to_string(version));
    }

    GbdtModel m;
    expect_token(in, "n_classes");
    m.n_classes = expect_value<int>(in, "n_classes");
    if (m.n_classes <= 0) throw ModelError("gbdt load: n_classes must be positive");
    expect_token(in, "n_features");
    m.n_features = expect_value<int>(in, "n_features");
    expect_token(in, "params");
    m.params.n_rounds = expect_value<int>(in, "n_rounds");
    m.params.max_depth = expect_value<int>(in, "max_depth");
    m.params.learning_rate = expect_value<double>(in, "learning_rate");
    m.params.min_leaf = expect_value<int>(in, "min_leaf");
    m.params.subsample = expect_value<double>(in, "subsample");
    m.params.lambda = expect_value<double>(in, "lambda");
    m.params.seed = expect_value<std::uint64_t>(in, "seed");

    expect_token(in, "feature_mask");
    const int mask_size = expect_value<int>(in, "mask size");
    m.feature_mask.resize(static_cast<std::size_t>(mask_size));
    for (auto& f : m.feature_mask) f = expect_value<int>(in, "mask entry");

    expect_token(in, "base_scores");
    m.base_scores.resize(static_cast<std::size_t>(m.n_classes));
    for (auto& b : m.base_scores) b = expect_value<double>(in, "base score");

    expect_token(in, "loss_curve");
    const int curve_size = expect_value<int>(in, "loss curve size");
    m.loss_curve.resize(static_cast<std::size_t>(curve_size));
    for (auto& l : m.loss_curve) l = expect_value<double>(in, "loss value");

    m.ensembles.assign(static_cast<std::size_t>(m.n_classes), {});
    for (int c = 0; c < m.n_classes; ++c) {
        expect_token(in, "ensemble");
        const int cls = expect_value<int>(in, "ensemble class");
        if (cls != c) throw ModelError("gbdt load: ensembles out of order");
        const int n_trees = expect_value<int>(in, "tree count");
        auto& ens = m.ensembles[static_cast<std::size_t>(c)];
        ens.resize(static_cast<std::size_t>(n_trees));
        for (Tree& t : ens) {
            expect_token(in, "tree");
            const int n_nodes = expect_value<int>(in, "node count");
            t.nodes.resize(static_cast<std::size_t>(n_nodes));
            for (TreeNode& nd : t.nodes) {
                std::string kind;
                if (!(in >> kind)) throw ModelError("gbdt load: truncated node");
                if (kind == "leaf") {
                    nd.feature = -1;
                    nd.value = expect_value<double>(in, "leaf value");
                } else if (kind == "split") {
                    nd.feature = expect_value<int>(in, "split feature");
                    nd.threshold = expect_value<double>(in, "split threshold");
                    nd.left = expect_value<int>(in, "left child");
                    nd.right = expect_value<int>(in, "right child");
                    nd.value = expect_value<double>(in, "node value");
                    if (nd.feature < 0 || nd.feature >= m.n_features || nd.left < 0 ||
                        nd.right < 0 || nd.left >= n_nodes || nd.right >= n_nodes) {
                        throw ModelError("gbdt load: corrupt tree node");
                    }
                } else {
                    throw ModelError("gbdt load: unknown node kind '" + kind + "'");
                }
            }
        }
    }
    expect_token(in, "end");
    return m;
}

} // namespace printleak::gbdt
