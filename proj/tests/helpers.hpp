#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ihif/config.hpp"
#include "ihif/dataset.hpp"
#include "ihif/gabor.hpp"
#include "ihif/rng.hpp"

namespace testutil {

/// Unique temporary directory, removed on destruction.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

/// Brute-force double-loop linear convolution with the same center-crop
/// semantics as convolve_fft. O(image * kernel); oracle use only.
ihif::ComplexGrid spatial_convolve(const ihif::Image& img, const ihif::ComplexGrid& kernel);

ihif::Image random_image(int w, int h, ihif::Rng& rng);
ihif::ComplexGrid random_kernel(int w, int h, ihif::Rng& rng);

// Synthetic textures in [0,1]; each adds Gaussian pixel noise (sigma 0.015).
ihif::Image grating(int size, double angle, double freq, ihif::Rng& rng);
ihif::Image rings(int size, double freq, ihif::Rng& rng);
ihif::Image checker(int size, int cell, ihif::Rng& rng);
ihif::Image noise_texture(int size, ihif::Rng& rng);
ihif::Image blobs(int size, ihif::Rng& rng);

/// Four oriented-grating subjects s01..s04 (six images each: five train, one
/// positive probe) plus four single-image impostors x01..x04 with unrelated
/// textures. Deterministic in (size, seed).
ihif::Split make_synthetic_split(int size, std::uint64_t seed);

/// Writes every split image as <root>/<subject>/<filename> (8-bit PGM).
void write_split_tree(const ihif::Split& split, const std::filesystem::path& root);

/// The experiment configuration matching make_synthetic_split geometry.
ihif::ExperimentConfig synthetic_config(const std::filesystem::path& root);

void write_gray_png(const std::filesystem::path& path, int w, int h,
                    const std::vector<unsigned char>& gray);
void write_rgb_png(const std::filesystem::path& path, int w, int h,
                   const std::vector<unsigned char>& rgb);

/// Raw P5 writer with explicit maxval and an optional header comment line.
void write_pgm_raw(const std::filesystem::path& path, int w, int h, int maxval,
                   const std::vector<unsigned char>& data, const std::string& comment = "");

std::string slurp(const std::filesystem::path& path);
std::vector<std::uint8_t> slurp_bytes(const std::filesystem::path& path);

} // namespace testutil
