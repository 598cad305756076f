#include "ihif/features.hpp"

#include <algorithm>
#include <climits>
#include <numeric>

#include "ihif/errors.hpp"

namespace ihif {

void ExtractionParams::validate() const {
    if (block_size < 1) throw DataError("features: block_size must be >= 1");
    if (!(threshold > 0.0)) throw DataError("features: threshold must be > 0");
}

std::size_t GlobalLengths::vector_length() const {
    std::size_t total = 0;
    for (int l : lengths) total += static_cast<std::size_t>(l) * blocks_x * blocks_y;
    return total;
}

RaggedFeature localize(const ResponseStack& stack, const ExtractionParams& p) {
    p.validate();
    if (stack.responses.empty()) throw DataError("features: empty response stack");

    const int w = p.block_size;
    RaggedFeature rf;
    rf.block_size = w;
    rf.blocks_x = stack.responses.front().width / w;
    rf.blocks_y = stack.responses.front().height / w;
    if (rf.blocks_x < 1 || rf.blocks_y < 1)
        throw DataError("features: response smaller than one block");

    rf.responses.reserve(stack.responses.size());
    for (const RealGrid& grid : stack.responses) {
        if (grid.width / w != rf.blocks_x || grid.height / w != rf.blocks_y)
            throw DataError("features: responses disagree on block geometry");

        ResponseFeature feat;
        feat.response_mean =
            std::accumulate(grid.values.begin(), grid.values.end(), 0.0) /
            static_cast<double>(grid.values.size());

        feat.block_values.reserve(static_cast<std::size_t>(rf.n_blocks()));
        for (int by = 0; by < rf.blocks_y; ++by) {
            for (int bx = 0; bx < rf.blocks_x; ++bx) {
                // Values above the response mean, in row-major scan order.
                std::vector<double> chi;
                for (int dy = 0; dy < w; ++dy)
                    for (int dx = 0; dx < w; ++dx) {
                        const double v = grid.at(bx * w + dx, by * w + dy);
                        if (v > feat.response_mean) chi.push_back(v);
                    }
                if (chi.empty()) chi.push_back(feat.response_mean);

                const double chi_mean =
                    std::accumulate(chi.begin(), chi.end(), 0.0) / static_cast<double>(chi.size());
                std::vector<double> retained;
                for (double v : chi)
                    if (std::abs(v - chi_mean) < p.threshold) retained.push_back(v);
                if (retained.empty()) retained.push_back(chi_mean);

                std::stable_sort(retained.begin(), retained.end(), std::greater<double>());
                feat.block_values.push_back(std::move(retained));
            }
        }
        rf.responses.push_back(std::move(feat));
    }
    return rf;
}

GlobalLengths per_image_lengths(const RaggedFeature& rf) {
    GlobalLengths gl;
    gl.blocks_x = rf.blocks_x;
    gl.blocks_y = rf.blocks_y;
    gl.lengths.reserve(rf.responses.size());
    for (const auto& feat : rf.responses) {
        int min_len = INT_MAX;
        for (const auto& block : feat.block_values)
            min_len = std::min(min_len, static_cast<int>(block.size()));
        gl.lengths.push_back(min_len);
    }
    return gl;
}

GlobalLengths fit_global_lengths(std::span<const RaggedFeature> rfs) {
    if (rfs.empty()) throw DataError("features: cannot fit lengths from an empty set");
    GlobalLengths gl = per_image_lengths(rfs.front());
    for (std::size_t i = 1; i < rfs.size(); ++i) {
        const GlobalLengths cur = per_image_lengths(rfs[i]);
        if (cur.blocks_x != gl.blocks_x || cur.blocks_y != gl.blocks_y ||
            cur.lengths.size() != gl.lengths.size())
            throw DataError("features: images disagree on block geometry");
        for (std::size_t j = 0; j < gl.lengths.size(); ++j)
            gl.lengths[j] = std::min(gl.lengths[j], cur.lengths[j]);
    }
    return gl;
}

FeatureVector build_vector(const RaggedFeature& rf, const GlobalLengths& gl) {
    if (rf.blocks_x != gl.blocks_x || rf.blocks_y != gl.blocks_y ||
        rf.responses.size() != gl.lengths.size())
        throw DataError("features: block geometry does not match fitted lengths");

    FeatureVector vec;
    vec.reserve(gl.vector_length());
    for (std::size_t r = 0; r < rf.responses.size(); ++r) {
        const int target = gl.lengths[r];
        for (const auto& block : rf.responses[r].block_values) {
            for (int rank = 0; rank < target; ++rank) {
                vec.push_back(rank < static_cast<int>(block.size()) ? block[rank]
                                                                    : block.back());
            }
        }
    }
    return vec;
}

} // namespace ihif
