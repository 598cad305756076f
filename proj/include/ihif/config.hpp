#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "ihif/classifier.hpp"
#include "ihif/dataset.hpp"
#include "ihif/features.hpp"
#include "ihif/gabor.hpp"

namespace ihif {

struct IcaSettings {
    int n_ics = 0;    // 0 = auto: min(500, whitened dimension)
    int max_dim = 0;  // 0 = no cap on the whitened dimension
    double tol = 1e-9;
    int max_iter = 500;
    double eigen_floor = 1e-10; // relative to the largest eigenvalue
    std::uint64_t seed = 1;
};

struct ExperimentConfig {
    std::filesystem::path dataset_root;
    int image_width = 92;
    int image_height = 112;
    GaborParams gabor;
    ExtractionParams extraction;
    IcaSettings ica;
    Metric metric = Metric::cosine;
    SplitSpec split;
    int threads = 0;     // 0 = hardware concurrency
    bool strict = false; // non-convergence becomes an error

    void validate() const;
};

/// Flat UTF-8 `key = value` file with dotted keys; '#' starts a comment.
/// Unknown keys are rejected. Every key has a default, so an empty file is a
/// valid config.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Applies `key=value` override strings (same keys as the file) on top of a config.
void apply_override(ExperimentConfig& cfg, const std::string& assignment);

/// The full key set with current values, serializable back to a config file.
std::map<std::string, std::string> config_to_keys(const ExperimentConfig& cfg);

} // namespace ihif
