#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sgd {

// Threshold sentinels: tau=1 never admits a difficulty (the strict d < tau
// test fails for every d >= 1), tau=11 admits all of them.
constexpr int kTauNever = 1;
constexpr int kTauAlways = 11;

struct ModelSpec {
    std::string id;
    int size_rank = 0;        // 1 = smallest
    int threshold = kTauAlways;
    std::string backend;      // backend reference resolved by the engine
    bool is_baseline = false;

    friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

/// Candidate models ordered smallest to largest. Exactly one model is the
/// baseline and it must be the largest.
class ModelLadder {
public:
    ModelLadder() = default;
    explicit ModelLadder(std::vector<ModelSpec> models);

    const std::vector<ModelSpec>& models() const { return models_; }
    bool empty() const { return models_.empty(); }
    const ModelSpec& baseline() const;
    const ModelSpec& smallest() const;
    const ModelSpec& by_id(const std::string& id) const;

    /// Throws std::invalid_argument naming the broken invariant.
    void validate() const;

    friend bool operator==(const ModelLadder&, const ModelLadder&) = default;

private:
    std::vector<ModelSpec> models_;
};

/// Rounds half-up then clamps into [1,10].
int normalize_difficulty(double score);

/// The smallest model whose threshold strictly exceeds the difficulty; the
/// baseline when no candidate qualifies. Difficulty must lie in [1,10].
const ModelSpec& select_model(int difficulty, const ModelLadder& ladder);

struct CalibrationRecord {
    std::string case_id;
    int difficulty = 0;                     // [1,10]
    std::map<std::string, double> quality;  // model id -> score in [0,1]
};

class MissingModelScore : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Per-model, per-tau view of the calibration constraint: the worst-case
/// quality gap (baseline minus candidate) over records with difficulty below
/// tau. max_gap is empty when no record qualifies (the constraint is vacuous).
struct CalibrationScanRow {
    std::string model_id;
    int tau = 0;
    std::optional<double> max_gap;
    bool feasible = false;
};

std::vector<CalibrationScanRow> calibration_scan(const std::vector<CalibrationRecord>& dataset,
                                                 double epsilon, const ModelLadder& ladder);

/// For each non-baseline model, the largest tau in [1,11] such that every
/// record with difficulty < tau keeps the baseline-vs-model quality gap
/// strictly below epsilon. The baseline itself is pinned at kTauAlways.
/// Throws MissingModelScore when a record lacks a needed model's quality.
std::map<std::string, int> calibrate_thresholds(const std::vector<CalibrationRecord>& dataset,
                                                double epsilon, const ModelLadder& ladder);

}  // namespace sgd
