#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace ihif {

/// Grayscale image, row-major, intensities in [0, 1].
struct Image {
    int width = 0;
    int height = 0;
    std::vector<double> pixels;

    Image() = default;
    Image(int w, int h, double fill = 0.0);

    double& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
    double at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
    std::size_t size() const { return pixels.size(); }

    /// Throws DataError unless dimensions and pixel values satisfy the
    /// type invariants (length = w*h, every value finite in [0,1]).
    void validate() const;
};

/// Loads an 8-bit grayscale PGM (P5) or a grayscale/RGB PNG.
/// RGB is reduced with luma weights 0.299/0.587/0.114; 8-bit values are
/// scaled by the file's maxval (255 for PNG).
Image load_image(const std::filesystem::path& path);

/// Writes an 8-bit binary PGM; values are clamped and rounded to 0..255.
void save_pgm(const Image& img, const std::filesystem::path& path);

/// Bilinear resize with corner-aligned sampling. Output is clamped to [0,1].
Image resize(const Image& img, int out_w, int out_h);

} // namespace ihif
