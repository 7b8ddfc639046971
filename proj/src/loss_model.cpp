#include "plantsite/loss_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "plantsite/io_util.hpp"

namespace plantsite {

using nlohmann::json;

std::vector<LossLabel> label_compartments(std::span<const Compartment> compartments)
{
    std::vector<LossLabel> out;
    out.reserve(compartments.size());
    for (const auto& c : compartments) {
        if (!c.fc_2015_ha)
            throw ValidationError("compartment " + std::to_string(c.compartment_id) + ": missing fc_2015_ha");
        const double change = *c.fc_2015_ha - c.features[Feature::fc_2003_ha];
        out.push_back({c.compartment_id, change < 0.0 ? 1 : 0});
    }
    return out;
}

std::vector<LabeledRow> labeled_rows(std::span<const Compartment> compartments)
{
    std::vector<LabeledRow> rows;
    for (const auto& c : compartments) {
        std::optional<int> label = c.label;
        if (c.fc_2015_ha) label = label_compartments(std::span(&c, 1)).front().label;
        if (!label) continue;
        rows.push_back({c.compartment_id, c.features, *label});
    }
    return rows;
}

TrainTestSplit split_train_test(std::vector<LabeledRow> rows, std::uint64_t seed)
{
    if (rows.size() < 5)
        throw TrainingError("need at least 5 labeled compartments to split, found " + std::to_string(rows.size()));
    Rng rng(seed);
    for (std::size_t i = rows.size() - 1; i > 0; --i) std::swap(rows[i], rows[rng.below(i + 1)]);
    const auto n_train = static_cast<std::size_t>(std::floor(kTrainFraction * static_cast<double>(rows.size())));
    TrainTestSplit split;
    split.train.assign(std::make_move_iterator(rows.begin()), std::make_move_iterator(rows.begin() + n_train));
    split.test.assign(std::make_move_iterator(rows.begin() + n_train), std::make_move_iterator(rows.end()));
    return split;
}

double RegressionTree::predict(const CompartmentFeatures& x) const
{
    int idx = 0;
    while (!nodes[idx].is_leaf()) {
        const auto& n = nodes[idx];
        idx = x.values[n.feature] < n.threshold ? n.left : n.right;
    }
    return nodes[idx].leaf_value;
}

int RegressionTree::depth() const
{
    // Nodes are appended parent-first, so a single forward pass suffices.
    std::vector<int> level(nodes.size(), 0);
    int deepest = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        deepest = std::max(deepest, level[i]);
        if (!nodes[i].is_leaf()) {
            level[nodes[i].left] = level[i] + 1;
            level[nodes[i].right] = level[i] + 1;
        }
    }
    return deepest;
}

double GbdtModel::raw_score(const CompartmentFeatures& x) const
{
    double sum = 0.0;
    for (const auto& t : trees) sum += t.predict(x);
    return base_score + learning_rate * sum;
}

double sigmoid(double z)
{
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

namespace {

constexpr double kProbabilityFloor = 1e-15;

double clamp_probability(double p) { return std::clamp(p, kProbabilityFloor, 1.0 - kProbabilityFloor); }

struct Sample {
    const CompartmentFeatures* x;
    double grad;
    double hess;
};

class TreeBuilder {
public:
    TreeBuilder(std::vector<Sample>& samples, const GbdtConfig& config, std::vector<std::size_t> features)
        : samples_(samples), config_(config), features_(std::move(features))
    {
    }

    RegressionTree build()
    {
        std::vector<std::size_t> all(samples_.size());
        std::iota(all.begin(), all.end(), 0);
        grow(std::move(all), 0);
        return std::move(tree_);
    }

private:
    struct Split {
        double gain = 0.0;
        std::size_t feature = 0;
        double threshold = 0.0;
    };

    int grow(std::vector<std::size_t> idx, int depth)
    {
        double g = 0.0, h = 0.0;
        for (auto i : idx) {
            g += samples_[i].grad;
            h += samples_[i].hess;
        }
        const int node = static_cast<int>(tree_.nodes.size());
        tree_.nodes.emplace_back();

        std::optional<Split> split;
        if (depth < config_.max_depth && idx.size() >= 2 * static_cast<std::size_t>(config_.min_leaf))
            split = best_split(idx, g, h);
        if (!split) {
            tree_.nodes[node].leaf_value = h > 0.0 ? -g / h : 0.0;
            return node;
        }

        std::vector<std::size_t> left, right;
        for (auto i : idx) (samples_[i].x->values[split->feature] < split->threshold ? left : right).push_back(i);
        idx.clear();
        idx.shrink_to_fit();

        tree_.nodes[node].feature = static_cast<int>(split->feature);
        tree_.nodes[node].threshold = split->threshold;
        const int l = grow(std::move(left), depth + 1);
        const int r = grow(std::move(right), depth + 1);
        tree_.nodes[node].left = l;
        tree_.nodes[node].right = r;
        return node;
    }

    std::optional<Split> best_split(const std::vector<std::size_t>& idx, double g, double h) const
    {
        const double parent = h > 0.0 ? g * g / h : 0.0;
        const std::size_t min_leaf = static_cast<std::size_t>(std::max(1, config_.min_leaf));
        std::optional<Split> best;
        std::vector<std::size_t> order(idx);
        for (auto f : features_) {
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return samples_[a].x->values[f] < samples_[b].x->values[f];
            });
            double gl = 0.0, hl = 0.0;
            for (std::size_t k = 0; k + 1 < order.size(); ++k) {
                gl += samples_[order[k]].grad;
                hl += samples_[order[k]].hess;
                const double lo = samples_[order[k]].x->values[f];
                const double hi = samples_[order[k + 1]].x->values[f];
                if (!(lo < hi)) continue;
                const std::size_t n_left = k + 1;
                if (n_left < min_leaf || order.size() - n_left < min_leaf) continue;
                const double gr = g - gl, hr = h - hl;
                if (hl <= 0.0 || hr <= 0.0) continue;
                const double gain = gl * gl / hl + gr * gr / hr - parent;
                if (gain > 1e-12 && (!best || gain > best->gain)) {
                    double threshold = lo + (hi - lo) / 2.0;
                    if (!(threshold > lo)) threshold = hi;
                    best = Split{gain, f, threshold};
                }
            }
        }
        return best;
    }

    std::vector<Sample>& samples_;
    const GbdtConfig& config_;
    std::vector<std::size_t> features_;
    RegressionTree tree_;
};

double log_loss(double p, int y)
{
    p = clamp_probability(p);
    return y ? -std::log(p) : -std::log1p(-p);
}

}  // namespace

GbdtModel train(std::span<const LabeledRow> rows, const GbdtConfig& config, std::uint64_t seed, LossTrace* trace)
{
    if (rows.empty()) throw TrainingError("training set is empty");
    if (config.n_rounds < 0 || config.max_depth < 0 || config.min_leaf < 1 || !(config.learning_rate > 0.0) ||
        !(config.feature_subsample > 0.0 && config.feature_subsample <= 1.0))
        throw TrainingError("invalid GBDT configuration");

    std::vector<LabeledRow> sorted(rows.begin(), rows.end());
    std::sort(sorted.begin(), sorted.end(), [](const LabeledRow& a, const LabeledRow& b) {
        if (a.features.values != b.features.values) return a.features.values < b.features.values;
        return a.label < b.label;
    });

    std::size_t positives = 0;
    for (const auto& r : sorted) positives += r.label == 1 ? 1 : 0;
    if (positives == 0 || positives == sorted.size())
        throw TrainingError("training set holds a single class; both loss and no-loss rows are required");

    const double prevalence = static_cast<double>(positives) / static_cast<double>(sorted.size());
    GbdtModel model;
    model.base_score = std::log(prevalence / (1.0 - prevalence));
    model.learning_rate = config.learning_rate;
    model.config = config;

    std::vector<double> score(sorted.size(), model.base_score);
    auto record_loss = [&] {
        if (!trace) return;
        double total = 0.0;
        for (std::size_t i = 0; i < sorted.size(); ++i) total += log_loss(sigmoid(score[i]), sorted[i].label);
        trace->push_back(total / static_cast<double>(sorted.size()));
    };
    if (trace) trace->clear();
    record_loss();

    Rng rng(seed);
    const auto n_features = static_cast<std::size_t>(
        std::clamp<long>(std::lround(config.feature_subsample * static_cast<double>(kFeatureCount)), 1, kFeatureCount));

    std::vector<Sample> samples(sorted.size());
    for (int round = 0; round < config.n_rounds; ++round) {
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            const double p = sigmoid(score[i]);
            samples[i] = {&sorted[i].features, p - static_cast<double>(sorted[i].label), p * (1.0 - p)};
        }
        std::vector<std::size_t> features(kFeatureCount);
        std::iota(features.begin(), features.end(), 0);
        if (n_features < kFeatureCount) {
            for (std::size_t k = 0; k < n_features; ++k) std::swap(features[k], features[k + rng.below(kFeatureCount - k)]);
            features.resize(n_features);
            std::sort(features.begin(), features.end());
        }
        auto tree = TreeBuilder(samples, config, std::move(features)).build();
        for (std::size_t i = 0; i < sorted.size(); ++i) score[i] += model.learning_rate * tree.predict(sorted[i].features);
        model.trees.push_back(std::move(tree));
        record_loss();
    }
    return model;
}

double predict_proba(const GbdtModel& model, const CompartmentFeatures& features)
{
    return clamp_probability(sigmoid(model.raw_score(features)));
}

double predict_proba(const GbdtModel& model, const std::map<std::string, double, std::less<>>& named)
{
    CompartmentFeatures x;
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
        auto it = named.find(kFeatureNames[i]);
        if (it == named.end()) throw ValidationError("missing feature '" + std::string(kFeatureNames[i]) + "'");
        x.values[i] = it->second;
    }
    return predict_proba(model, x);
}

double mean_log_loss(const GbdtModel& model, std::span<const LabeledRow> rows)
{
    if (rows.empty()) return 0.0;
    double total = 0.0;
    for (const auto& r : rows) total += log_loss(predict_proba(model, r.features), r.label);
    return total / static_cast<double>(rows.size());
}

EvalReport evaluate_predictions(std::span<const double> probabilities, std::span<const int> labels, double threshold)
{
    if (probabilities.size() != labels.size()) throw std::invalid_argument("prediction and label counts differ");
    EvalReport r;
    r.threshold = threshold;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const bool predicted = probabilities[i] >= threshold;
        const bool actual = labels[i] == 1;
        if (predicted && actual) ++r.tp;
        else if (predicted) ++r.fp;
        else if (actual) ++r.fn;
        else ++r.tn;
    }
    r.precision_defined = r.tp + r.fp > 0;
    r.recall_defined = r.tp + r.fn > 0;
    r.precision = r.precision_defined ? static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fp) : 0.0;
    r.recall = r.recall_defined ? static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fn) : 0.0;
    return r;
}

EvalReport evaluate(const GbdtModel& model, std::span<const LabeledRow> rows, double threshold)
{
    if (rows.empty()) throw std::invalid_argument("evaluation set is empty");
    std::vector<double> p;
    std::vector<int> y;
    for (const auto& r : rows) {
        p.push_back(predict_proba(model, r.features));
        y.push_back(r.label);
    }
    return evaluate_predictions(p, y, threshold);
}

std::string model_to_json(const GbdtModel& model)
{
    json trees = json::array();
    for (const auto& t : model.trees) {
        json nodes = json::array();
        for (const auto& n : t.nodes) {
            if (n.is_leaf()) {
                nodes.push_back({{"leaf_value", n.leaf_value}});
            } else {
                nodes.push_back({{"feature", kFeatureNames[n.feature]},
                                 {"threshold", n.threshold},
                                 {"left", n.left},
                                 {"right", n.right}});
            }
        }
        trees.push_back({{"nodes", std::move(nodes)}});
    }
    json names = json::array();
    for (auto n : kFeatureNames) names.push_back(n);
    const json doc{{"base_score", model.base_score},
                   {"learning_rate", model.learning_rate},
                   {"trees", std::move(trees)},
                   {"config",
                    {{"n_rounds", model.config.n_rounds},
                     {"max_depth", model.config.max_depth},
                     {"learning_rate", model.config.learning_rate},
                     {"min_leaf", model.config.min_leaf},
                     {"feature_subsample", model.config.feature_subsample}}},
                   {"feature_names", std::move(names)}};
    return doc.dump() + "\n";
}

GbdtModel model_from_json(std::string_view text)
{
    try {
        const json doc = json::parse(text);
        GbdtModel m;
        m.base_score = doc.at("base_score").get<double>();
        m.learning_rate = doc.at("learning_rate").get<double>();
        const auto& cfg = doc.at("config");
        m.config.n_rounds = cfg.at("n_rounds").get<int>();
        m.config.max_depth = cfg.at("max_depth").get<int>();
        m.config.learning_rate = cfg.at("learning_rate").get<double>();
        m.config.min_leaf = cfg.at("min_leaf").get<int>();
        m.config.feature_subsample = cfg.at("feature_subsample").get<double>();

        const auto& names = doc.at("feature_names");
        if (names.size() != kFeatureCount) throw ValidationError("model lists " + std::to_string(names.size()) + " features");
        for (std::size_t i = 0; i < kFeatureCount; ++i)
            if (names[i].get<std::string>() != kFeatureNames[i])
                throw ValidationError("model feature " + std::to_string(i) + " is '" + names[i].get<std::string>() + "'");

        for (const auto& jt : doc.at("trees")) {
            RegressionTree t;
            const auto& jn = jt.at("nodes");
            for (const auto& n : jn) {
                TreeNode node;
                if (n.contains("feature")) {
                    auto idx = feature_index(n.at("feature").get<std::string>());
                    if (!idx) throw ValidationError("unknown split feature '" + n.at("feature").get<std::string>() + "'");
                    node.feature = static_cast<int>(*idx);
                    node.threshold = n.at("threshold").get<double>();
                    node.left = n.at("left").get<int>();
                    node.right = n.at("right").get<int>();
                    const auto size = static_cast<int>(jn.size());
                    if (node.left <= 0 || node.left >= size || node.right <= 0 || node.right >= size)
                        throw ValidationError("child index out of range");
                } else {
                    node.leaf_value = n.at("leaf_value").get<double>();
                }
                t.nodes.push_back(node);
            }
            if (t.nodes.empty()) throw ValidationError("tree without nodes");
            for (std::size_t i = 0; i < t.nodes.size(); ++i) {
                const auto& n = t.nodes[i];
                if (!n.is_leaf() && (n.left <= static_cast<int>(i) || n.right <= static_cast<int>(i)))
                    throw ValidationError("child precedes its parent");
            }
            if (t.depth() > m.config.max_depth) throw ValidationError("tree deeper than max_depth");
            m.trees.push_back(std::move(t));
        }
        return m;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed model JSON: ") + e.what());
    }
}

CompartmentRisk::CompartmentRisk(const GbdtModel& model, std::span<const Compartment> compartments)
{
    for (const auto& c : compartments) p_loss_[c.compartment_id] = predict_proba(model, c.features);
}

std::optional<double> CompartmentRisk::p_loss(CompartmentId id) const
{
    auto it = p_loss_.find(id);
    if (it == p_loss_.end()) return std::nullopt;
    return it->second;
}

MlScore grid_ml_score(const GridCell& cell, const CompartmentRisk& risk)
{
    if (!cell.compartment_id) return {};
    const auto p = risk.p_loss(*cell.compartment_id);
    if (!p) return {};
    return {ml_score_from_probability(*p), false};
}

MlScore grid_ml_score(const GridCell& cell, const GbdtModel& model, std::span<const Compartment> compartments)
{
    if (!cell.compartment_id) return {};
    for (const auto& c : compartments)
        if (c.compartment_id == *cell.compartment_id) return {ml_score_from_probability(predict_proba(model, c.features)), false};
    return {};
}

}  // namespace plantsite
