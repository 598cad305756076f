#pragma once

#include <cstdint>
#include <filesystem>

#include "ihif/classifier.hpp"
#include "ihif/features.hpp"
#include "ihif/gabor.hpp"
#include "ihif/ica.hpp"

namespace ihif {

inline constexpr std::uint32_t kModelVersion = 1;

/// Everything needed to take a raw probe image to an accept/reject decision.
struct ModelBundle {
    std::uint32_t version = kModelVersion;
    int image_width = 0;
    int image_height = 0;
    GaborParams gabor;
    ExtractionParams extraction;
    GlobalLengths lengths;
    IcaModel ica;
    ClassModel classifier;

    /// Cross-checks the dimension chain feature length -> whitening -> W -> means.
    void validate() const;
};

/// Binary container: magic "IHIF", little-endian u32 version, a section table
/// (name, offset, length, CRC32), then the section payloads. All floats are
/// little-endian IEEE 754 doubles; round trips are bit-exact.
void save_model(const ModelBundle& bundle, const std::filesystem::path& path);

/// Throws DataError on bad magic, unsupported version, truncation, or a
/// section whose CRC32 does not match.
ModelBundle load_model(const std::filesystem::path& path);

} // namespace ihif
