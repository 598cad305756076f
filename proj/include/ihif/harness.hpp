#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ihif/classifier.hpp"
#include "ihif/config.hpp"
#include "ihif/dataset.hpp"
#include "ihif/metrics.hpp"
#include "ihif/model_io.hpp"

namespace ihif {

struct TrainingOutput {
    ModelBundle bundle;
    Split split; // the split that produced the bundle
    int ica_sweeps = 0;
    bool ica_converged = false;
    int ica_restarts = 0;
};

/// load -> split -> resize -> responses -> localize -> fit_global_lengths ->
/// build_vector -> center -> whiten -> fastica_symmetric -> class_means ->
/// calibrate_threshold. Deterministic given (dataset bytes, config). Errors
/// surface with the failing stage and item named.
TrainingOutput run_training(const ExperimentConfig& cfg);

/// Same pipeline on a caller-supplied split (e.g. one pinned by a manifest).
TrainingOutput train_on_split(const ExperimentConfig& cfg, const Split& split);

struct ImageResult {
    std::string subject_id;
    std::string filename;
    bool genuine = false; // drawn from positive_test
    Decision decision;
    std::string outcome; // TP / FN / FP / TN
};

struct EvaluationReport {
    ConfusionCounts counts;
    Metrics metrics;
    std::vector<ImageResult> rows; // positives in input order, then negatives
};

/// Scores every test image against the bundle. A positive image counts TP only
/// when it is accepted AND assigned its true subject; a negative image counts
/// FP whenever it is accepted, whatever the label. The negative set may be
/// empty (specificity then reported absent).
EvaluationReport run_evaluation(const ModelBundle& bundle,
                                const std::vector<LabeledImage>& positive_test,
                                const std::vector<LabeledImage>& negative_test,
                                int threads = 0);

/// End-to-end decision for one raw image (resize -> features -> project -> classify).
Decision classify_image(const ModelBundle& bundle, const Image& img);

/// Fixed-length feature vectors for a set of images, with the length table
/// fitted on exactly these images.
struct FeatureTable {
    GlobalLengths lengths;
    std::vector<FeatureVector> vectors; // parallel to the input images
};

FeatureTable extract_table(const ExperimentConfig& cfg, const std::vector<LabeledImage>& images);

void write_feature_csv(const std::filesystem::path& path,
                       const std::vector<LabeledImage>& images, const FeatureTable& table);

/// Writes report.csv (one row per test image), summary.txt, and metrics.svg
/// into `dir` (created if missing). Byte-identical output for identical inputs.
void write_report(const std::filesystem::path& dir, const EvaluationReport& report,
                  const ExperimentConfig& cfg);

/// Permutation/sign-invariant separation quality of P = W_total * A, scaled to
/// [0, 1]; 0 means P is a scaled permutation (perfect unmixing).
double amari_index(const Eigen::MatrixXd& P);

struct BssReport {
    int n_sources = 0;
    int n_samples = 0;
    std::uint64_t seed = 0;
    double amari = 0.0;
    std::vector<double> correlations; // |corr| with the best-matching true source
    int sweeps = 0;
    bool converged = false;
};

/// Self-check without face data: mixes known kurtotic sources (alternating
/// Laplace and uniform), recovers them with whiten + symmetric FastICA, and
/// reports the Amari index plus per-source correlations.
BssReport bss_demo(int n_sources, int n_samples, std::uint64_t seed);

std::string format_bss_report(const BssReport& report);

} // namespace ihif
