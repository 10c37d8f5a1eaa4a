#include "sgd/selection.hpp"

#include <algorithm>
#include <cmath>

#include "sgd/skeleton.hpp"

namespace sgd {

ModelLadder::ModelLadder(std::vector<ModelSpec> models) : models_(std::move(models)) {
    validate();
}

void ModelLadder::validate() const {
    if (models_.empty()) {
        throw std::invalid_argument("model ladder must be nonempty");
    }
    std::size_t baselines = 0;
    for (std::size_t i = 0; i < models_.size(); ++i) {
        const ModelSpec& m = models_[i];
        if (m.id.empty()) {
            throw std::invalid_argument("model ids must be nonempty");
        }
        if (i > 0 && models_[i - 1].size_rank >= m.size_rank) {
            throw std::invalid_argument("model size_ranks must be strictly increasing");
        }
        if (m.threshold < kTauNever || m.threshold > kTauAlways) {
            throw std::invalid_argument("model threshold must lie in [1,11]");
        }
        if (m.is_baseline) ++baselines;
        for (std::size_t j = 0; j < i; ++j) {
            if (models_[j].id == m.id) {
                throw std::invalid_argument("model ids must be unique");
            }
        }
    }
    if (baselines != 1) {
        throw std::invalid_argument("exactly one model must be the baseline");
    }
    if (!models_.back().is_baseline) {
        throw std::invalid_argument("the baseline must have the largest size_rank");
    }
}

const ModelSpec& ModelLadder::baseline() const {
    validate();
    return models_.back();
}

const ModelSpec& ModelLadder::smallest() const {
    validate();
    return models_.front();
}

const ModelSpec& ModelLadder::by_id(const std::string& id) const {
    for (const ModelSpec& m : models_) {
        if (m.id == id) return m;
    }
    throw std::invalid_argument("unknown model id: " + id);
}

int normalize_difficulty(double score) {
    return std::clamp(static_cast<int>(std::floor(score + 0.5)), kMinDifficulty, kMaxDifficulty);
}

const ModelSpec& select_model(int difficulty, const ModelLadder& ladder) {
    ladder.validate();
    if (difficulty < kMinDifficulty || difficulty > kMaxDifficulty) {
        throw std::invalid_argument("difficulty must lie in [1,10]");
    }
    for (const ModelSpec& m : ladder.models()) {
        if (m.is_baseline) break;
        if (difficulty < m.threshold) return m;
    }
    return ladder.baseline();
}

namespace {

double quality_of(const CalibrationRecord& record, const std::string& model_id) {
    auto it = record.quality.find(model_id);
    if (it == record.quality.end()) {
        throw MissingModelScore("record " + record.case_id + " has no quality for model " + model_id);
    }
    return it->second;
}

}  // namespace

std::vector<CalibrationScanRow> calibration_scan(const std::vector<CalibrationRecord>& dataset,
                                                 double epsilon, const ModelLadder& ladder) {
    ladder.validate();
    if (dataset.empty()) {
        throw std::invalid_argument("calibration dataset must be nonempty");
    }
    const std::string& baseline_id = ladder.baseline().id;

    std::vector<CalibrationScanRow> rows;
    for (const ModelSpec& m : ladder.models()) {
        if (m.is_baseline) continue;
        for (int tau = kTauNever; tau <= kTauAlways; ++tau) {
            CalibrationScanRow row;
            row.model_id = m.id;
            row.tau = tau;
            for (const CalibrationRecord& record : dataset) {
                if (record.difficulty >= tau) continue;
                double gap = quality_of(record, baseline_id) - quality_of(record, m.id);
                if (!row.max_gap || gap > *row.max_gap) row.max_gap = gap;
            }
            row.feasible = !row.max_gap || *row.max_gap < epsilon;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

std::map<std::string, int> calibrate_thresholds(const std::vector<CalibrationRecord>& dataset,
                                                double epsilon, const ModelLadder& ladder) {
    std::map<std::string, int> thresholds;
    for (const CalibrationScanRow& row : calibration_scan(dataset, epsilon, ladder)) {
        auto [it, inserted] = thresholds.try_emplace(row.model_id, kTauNever);
        if (row.feasible && row.tau > it->second) it->second = row.tau;
    }
    thresholds[ladder.baseline().id] = kTauAlways;
    return thresholds;
}

}  // namespace sgd
