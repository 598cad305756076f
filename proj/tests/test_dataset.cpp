#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <set>

#include "helpers.hpp"
#include "ihif/dataset.hpp"
#include "ihif/errors.hpp"

using namespace ihif;
using testutil::TempDir;

namespace {

std::vector<LabeledImage> fake_subjects(const std::vector<std::pair<std::string, int>>& spec) {
    std::vector<LabeledImage> out;
    for (const auto& [sid, count] : spec) {
        for (int i = 0; i < count; ++i) {
            LabeledImage li;
            li.image = Image(2, 2, 0.5);
            li.subject_id = sid;
            li.filename = "img" + std::to_string(i) + ".pgm";
            out.push_back(std::move(li));
        }
    }
    return out;
}

std::set<std::pair<std::string, std::string>> keys(const std::vector<LabeledImage>& images) {
    std::set<std::pair<std::string, std::string>> out;
    for (const auto& li : images) out.insert({li.subject_id, li.filename});
    return out;
}

} // namespace

TEST_CASE("load_dataset walks subjects and files in lexicographic order") {
    TempDir tmp;
    const Image px(2, 2, 64.0 / 255.0); // exactly representable after 8-bit quantization
    std::filesystem::create_directories(tmp.path() / "s2");
    std::filesystem::create_directories(tmp.path() / "s1");
    save_pgm(px, tmp.path() / "s2" / "b.pgm");
    save_pgm(px, tmp.path() / "s2" / "a.pgm");
    save_pgm(px, tmp.path() / "s1" / "z.pgm");
    std::ofstream(tmp.path() / "s1" / "notes.txt") << "ignored";

    const auto data = load_dataset(tmp.path());
    REQUIRE(data.size() == 3);
    CHECK(data[0].subject_id == "s1");
    CHECK(data[0].filename == "z.pgm");
    CHECK(data[1].subject_id == "s2");
    CHECK(data[1].filename == "a.pgm");
    CHECK(data[2].subject_id == "s2");
    CHECK(data[2].filename == "b.pgm");
    CHECK(data[0].image.pixels == px.pixels);
}

TEST_CASE("load_dataset rejects missing or empty roots") {
    TempDir tmp;
    CHECK_THROWS_AS(load_dataset(tmp.path() / "missing"), DataError);
    std::filesystem::create_directories(tmp.path() / "empty" / "s1");
    CHECK_THROWS_AS(load_dataset(tmp.path() / "empty"), DataError);
}

TEST_CASE("split keeps counts per subject") {
    const auto data = fake_subjects({{"s1", 6}});
    SplitSpec spec;
    spec.train_per_subject = 5;
    const Split split = split_dataset(data, spec);
    CHECK(split.train.size() == 5);
    CHECK(split.positive_test.size() == 1);
    CHECK(split.negative_test.empty());
}

TEST_CASE("split is deterministic in the seed") {
    const auto data = fake_subjects({{"s1", 10}, {"s2", 8}, {"s3", 9}});
    SplitSpec spec;
    spec.seed = 123;
    spec.train_per_subject = 5;
    const Split a = split_dataset(data, spec);
    const Split b = split_dataset(data, spec);
    CHECK(keys(a.train) == keys(b.train));
    CHECK(keys(a.positive_test) == keys(b.positive_test));

    spec.seed = 124;
    const Split c = split_dataset(data, spec);
    CHECK(keys(a.train) != keys(c.train)); // overwhelmingly likely with 27 images
}

TEST_CASE("split handles a 40x10 gallery with 5 training images each") {
    std::vector<std::pair<std::string, int>> shape;
    for (int s = 0; s < 40; ++s)
        shape.push_back({"subj" + std::to_string(100 + s), 10});
    const auto data = fake_subjects(shape);
    SplitSpec spec;
    spec.train_per_subject = 5;
    const Split split = split_dataset(data, spec);
    CHECK(split.train.size() == 200);
    CHECK(split.positive_test.size() == 200);
}

TEST_CASE("split partitions the input exactly") {
    const auto data = fake_subjects({{"s1", 7}, {"s2", 6}, {"x1", 3}});
    SplitSpec spec;
    spec.train_per_subject = 5;
    spec.impostor_subjects = {"x1"};
    const Split split = split_dataset(data, spec);

    CHECK(split.negative_test.size() == 3); // every impostor image
    for (const auto& li : split.negative_test) CHECK(li.subject_id == "x1");

    auto all = keys(split.train);
    for (const auto& k : keys(split.positive_test)) CHECK(all.insert(k).second);
    for (const auto& k : keys(split.negative_test)) CHECK(all.insert(k).second);
    CHECK(all == keys(data));
}

TEST_CASE("split rejects infeasible requests") {
    SplitSpec spec;
    spec.train_per_subject = 5;
    CHECK_THROWS_AS(split_dataset({}, spec), DataError);

    const auto too_few = fake_subjects({{"s1", 5}});
    CHECK_THROWS_AS(split_dataset(too_few, spec), DataError);

    auto unnamed = fake_subjects({{"s1", 6}});
    unnamed[0].subject_id = "";
    CHECK_THROWS_AS(split_dataset(unnamed, spec), DataError);

    spec.train_per_subject = 0;
    CHECK_THROWS_AS(split_dataset(fake_subjects({{"s1", 6}}), spec), DataError);
}

TEST_CASE("split manifest round-trips the partition") {
    TempDir tmp;
    const auto data = fake_subjects({{"s1", 6}, {"s2", 7}, {"x1", 2}});
    SplitSpec spec;
    spec.seed = 9;
    spec.train_per_subject = 5;
    spec.impostor_subjects = {"x1"};
    const Split split = split_dataset(data, spec);

    const auto path = tmp.path() / "split.tsv";
    save_split_manifest(split, path);
    const Split back = apply_split_manifest(data, path);
    CHECK(keys(back.train) == keys(split.train));
    CHECK(keys(back.positive_test) == keys(split.positive_test));
    CHECK(keys(back.negative_test) == keys(split.negative_test));
}

TEST_CASE("split manifest rejects unknown and missing entries") {
    TempDir tmp;
    const auto data = fake_subjects({{"s1", 2}});
    const auto path = tmp.path() / "bad.tsv";

    SUBCASE("missing image") {
        std::ofstream(path) << "s1\timg0.pgm\ttrain\n";
        CHECK_THROWS_AS(apply_split_manifest(data, path), DataError);
    }
    SUBCASE("unknown role") {
        std::ofstream(path) << "s1\timg0.pgm\ttrain\ns1\timg1.pgm\tmaybe\n";
        CHECK_THROWS_AS(apply_split_manifest(data, path), DataError);
    }
    SUBCASE("malformed line") {
        std::ofstream(path) << "s1 img0.pgm train\n";
        CHECK_THROWS_AS(apply_split_manifest(data, path), DataError);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(apply_split_manifest(data, tmp.path() / "none.tsv"), DataError);
    }
}
