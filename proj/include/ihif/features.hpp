#pragma once

#include <span>
#include <vector>

#include "ihif/gabor.hpp"

namespace ihif {

struct ExtractionParams {
    int block_size = 4;      // W, square blocks
    double threshold = 3.0;  // spread allowed around the block-subset mean

    void validate() const;
};

/// Per-response result of high-intensity localization: the response mean and,
/// per complete block (row-major block order), the retained values sorted
/// non-increasing. The fallback rules guarantee every block list is non-empty.
struct ResponseFeature {
    double response_mean = 0.0;
    std::vector<std::vector<double>> block_values;
};

struct RaggedFeature {
    int blocks_x = 0;
    int blocks_y = 0;
    int block_size = 0;
    std::vector<ResponseFeature> responses;

    int n_blocks() const { return blocks_x * blocks_y; }
};

/// Retained-count per response used for fixed-length vector assembly.
struct GlobalLengths {
    int blocks_x = 0;
    int blocks_y = 0;
    std::vector<int> lengths; // one per response, each >= 1

    std::size_t vector_length() const;
};

using FeatureVector = std::vector<double>;

/// High-intensity feature point localization. Per response: values above the
/// response mean are collected per block (falling back to the mean itself when
/// a block has none), filtered to those within `threshold` of the block-subset
/// mean (falling back to that mean), and sorted descending. Ties keep
/// row-major scan order.
RaggedFeature localize(const ResponseStack& stack, const ExtractionParams& p);

/// L per response: the minimum over blocks of the retained-list length.
GlobalLengths per_image_lengths(const RaggedFeature& rf);

/// Dataset-global lengths: elementwise minimum of per-image L over all images.
/// Persisted with the trained model so every vector shares one layout.
GlobalLengths fit_global_lengths(std::span<const RaggedFeature> rfs);

/// Concatenates the top L values of every block in
/// (scale, orientation, block, rank) order. A test-image block holding fewer
/// than L values is padded with its last retained value.
FeatureVector build_vector(const RaggedFeature& rf, const GlobalLengths& gl);

} // namespace ihif
