#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace ihif {

struct ConfusionCounts {
    std::int64_t true_positive = 0;
    std::int64_t false_positive = 0;
    std::int64_t true_negative = 0;
    std::int64_t false_negative = 0;

    std::int64_t total() const {
        return true_positive + false_positive + true_negative + false_negative;
    }
};

/// Rates with an undefined denominator are reported absent, never as 0.
struct Metrics {
    std::optional<double> sensitivity;         // TP / (TP + FN)
    std::optional<double> specificity;         // TN / (FP + TN)
    std::optional<double> false_positive_rate; // FP / (FP + TN)
    std::optional<double> false_negative_rate; // FN / (TP + FN)
    std::optional<double> accuracy;            // (TP + TN) / total
};

Metrics compute_metrics(const ConfusionCounts& counts);

/// Human-readable multi-line summary of counts and rates.
std::string format_metrics(const ConfusionCounts& counts, const Metrics& m);

} // namespace ihif
