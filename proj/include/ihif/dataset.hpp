#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ihif/image.hpp"

namespace ihif {

struct LabeledImage {
    Image image;
    std::string subject_id;
    std::string filename; // basename within the subject directory, may be empty
};

/// Parameters of the deterministic train/test/impostor split.
struct SplitSpec {
    std::uint64_t seed = 1;
    int train_per_subject = 5;
    std::vector<std::string> impostor_subjects;

    void validate() const;
};

struct Split {
    std::vector<LabeledImage> train;
    std::vector<LabeledImage> positive_test;
    std::vector<LabeledImage> negative_test;
};

/// Walks `<root>/<subject_id>/<files>` and loads every .pgm/.png image.
/// Subjects and files are visited in lexicographic order so results do not
/// depend on directory enumeration order.
std::vector<LabeledImage> load_dataset(const std::filesystem::path& root);

/// Seeded without-replacement split. Per enrolled subject exactly
/// train_per_subject images go to train and the rest to positive_test;
/// all images of impostor subjects go to negative_test. Pure function of
/// (data order, seed).
Split split_dataset(const std::vector<LabeledImage>& data, const SplitSpec& spec);

/// Split manifests: one line per image, `subject_id<TAB>filename<TAB>{train|pos|neg}`.
void save_split_manifest(const Split& split, const std::filesystem::path& path);
Split apply_split_manifest(const std::vector<LabeledImage>& data,
                           const std::filesystem::path& path);

} // namespace ihif
