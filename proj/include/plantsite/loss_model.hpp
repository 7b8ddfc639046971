#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "plantsite/landscape.hpp"

namespace plantsite {

struct LossLabel {
    CompartmentId compartment_id = 0;
    int label = 0;
    friend bool operator==(const LossLabel&, const LossLabel&) = default;
};

/// label = 1 iff fc_2015_ha - fc_2003_ha < 0. Throws ValidationError when a
/// compartment lacks its 2015 cover.
std::vector<LossLabel> label_compartments(std::span<const Compartment> compartments);

struct LabeledRow {
    CompartmentId compartment_id = 0;
    CompartmentFeatures features;
    int label = 0;
    friend bool operator==(const LabeledRow&, const LabeledRow&) = default;
};

/// Rows for every compartment with a known outcome. The cover-change rule wins
/// when fc_2015_ha is present, otherwise the stored label is used; compartments
/// with neither are skipped.
std::vector<LabeledRow> labeled_rows(std::span<const Compartment> compartments);

struct TrainTestSplit {
    std::vector<LabeledRow> train;
    std::vector<LabeledRow> test;
};

inline constexpr double kTrainFraction = 0.8;

/// Seeded Fisher-Yates shuffle, then floor(0.8 n) rows to train and the rest to test.
TrainTestSplit split_train_test(std::vector<LabeledRow> rows, std::uint64_t seed);

struct GbdtConfig {
    int n_rounds = 100;
    int max_depth = 4;
    double learning_rate = 0.1;
    int min_leaf = 5;
    double feature_subsample = 1.0;  // fraction of features drawn per tree

    friend bool operator==(const GbdtConfig&, const GbdtConfig&) = default;
};

/// Node of a regression tree. Rows with value < threshold go left.
struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double leaf_value = 0.0;

    bool is_leaf() const { return feature < 0; }
    friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct RegressionTree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    double predict(const CompartmentFeatures& x) const;
    int depth() const;
    friend bool operator==(const RegressionTree&, const RegressionTree&) = default;
};

/// Boosted ensemble in log-odds space.
struct GbdtModel {
    double base_score = 0.0;
    double learning_rate = 0.1;
    std::vector<RegressionTree> trees;
    GbdtConfig config;

    double raw_score(const CompartmentFeatures& x) const;
    friend bool operator==(const GbdtModel&, const GbdtModel&) = default;
};

class TrainingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Mean logistic loss on the training rows: entry 0 is the base score, entry r
/// is the loss after round r.
using LossTrace = std::vector<double>;

/// Logistic-loss gradient boosting with exact greedy splits.
///
/// Residuals are r = p - y (the gradient of the loss in log-odds). Each leaf
/// takes the Newton step -sum(r) / sum(p(1-p)), scaled by the learning rate
/// when added to the ensemble. Rows are put into a canonical order first, so
/// the result does not depend on input order.
GbdtModel train(std::span<const LabeledRow> rows, const GbdtConfig& config, std::uint64_t seed,
                LossTrace* trace = nullptr);

double sigmoid(double z);
double predict_proba(const GbdtModel& model, const CompartmentFeatures& features);
/// Throws ValidationError naming the first missing predictor.
double predict_proba(const GbdtModel& model, const std::map<std::string, double, std::less<>>& named);

double mean_log_loss(const GbdtModel& model, std::span<const LabeledRow> rows);

struct EvalReport {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    double precision = 0.0;
    double recall = 0.0;
    bool precision_defined = false;  // false when tp + fp == 0 (precision reported as 0)
    bool recall_defined = false;     // false when tp + fn == 0 (recall reported as 0)
    double threshold = 0.5;
};

/// Positive prediction iff probability >= threshold.
EvalReport evaluate_predictions(std::span<const double> probabilities, std::span<const int> labels,
                                double threshold = 0.5);
EvalReport evaluate(const GbdtModel& model, std::span<const LabeledRow> rows, double threshold = 0.5);

/// Published real-data figures; a reference, not a target for synthetic runs.
inline constexpr double kReferencePrecision = 0.63;
inline constexpr double kReferenceRecall = 0.57;

std::string model_to_json(const GbdtModel& model);
GbdtModel model_from_json(std::string_view text);

inline constexpr double kNeutralMlScore = 50.0;

/// Lower loss risk maps to higher suitability.
inline double ml_score_from_probability(double p_loss) { return 100.0 * (1.0 - p_loss); }

struct MlScore {
    double m = kNeutralMlScore;
    bool neutral = true;  // set when the cell has no compartment, or its compartment is unknown
};

/// Loss probability per compartment, computed once per model.
class CompartmentRisk {
public:
    CompartmentRisk(const GbdtModel& model, std::span<const Compartment> compartments);
    std::optional<double> p_loss(CompartmentId id) const;

private:
    std::unordered_map<CompartmentId, double> p_loss_;
};

/// M = 100 * (1 - p_loss) of the cell's compartment; neutral 50 when unassigned.
MlScore grid_ml_score(const GridCell& cell, const CompartmentRisk& risk);
MlScore grid_ml_score(const GridCell& cell, const GbdtModel& model, std::span<const Compartment> compartments);

}  // namespace plantsite
