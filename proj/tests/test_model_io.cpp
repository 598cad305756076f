#include <doctest.h>

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "ihif/errors.hpp"
#include "ihif/model_io.hpp"

using namespace ihif;

namespace {

// A dimensionally consistent miniature bundle: one 3x3 kernel, one block,
// two retained values, two whitened directions, two enrolled subjects.
ModelBundle tiny_bundle() {
    ModelBundle b;
    b.image_width = 12;
    b.image_height = 10;
    b.gabor.n_scales = 1;
    b.gabor.n_orientations = 1;
    b.gabor.kernel_size = 3;
    b.extraction.block_size = 4;
    b.extraction.threshold = 0.125;
    b.lengths.blocks_x = 1;
    b.lengths.blocks_y = 1;
    b.lengths.lengths = {2};

    b.ica.whitening.mean = Eigen::VectorXd(2);
    b.ica.whitening.mean << 0.5, -1.0 / 3.0;
    b.ica.whitening.eigvals = Eigen::VectorXd(2);
    b.ica.whitening.eigvals << 1.0, 0.5;
    b.ica.whitening.eigvecs = Eigen::MatrixXd(2, 2);
    b.ica.whitening.eigvecs << 0.8, -0.6, 0.6, 0.8;
    b.ica.unmixing = Eigen::MatrixXd(2, 2);
    b.ica.unmixing << 0.1, 0.2, -0.3, 1e-300;

    b.classifier.labels = {"alice", "bob"};
    b.classifier.means = Eigen::MatrixXd(2, 2);
    b.classifier.means << 3.14159, -2.5, 0.0, 42.0;
    b.classifier.accept_threshold = 0.625;
    b.classifier.metric = Metric::l2;
    return b;
}

void flip_byte(const std::filesystem::path& path, std::int64_t offset) {
    std::fstream f(path, std::ios::binary | std::ios::in | std::ios::out);
    REQUIRE(f.good());
    if (offset < 0) {
        f.seekg(0, std::ios::end);
        offset += f.tellg();
    }
    f.seekg(offset);
    char c = 0;
    f.read(&c, 1);
    c = static_cast<char>(c ^ 0xff);
    f.seekp(offset);
    f.write(&c, 1);
}

} // namespace

TEST_CASE("a saved model loads back bit-exact") {
    const testutil::TempDir tmp;
    const auto path = tmp.path() / "tiny.ihif";
    const ModelBundle b = tiny_bundle();
    save_model(b, path);

    const ModelBundle r = load_model(path);
    CHECK(r.version == b.version);
    CHECK(r.image_width == b.image_width);
    CHECK(r.image_height == b.image_height);
    CHECK(r.gabor.sigma == b.gabor.sigma);
    CHECK(r.gabor.k_max == b.gabor.k_max);
    CHECK(r.gabor.f == b.gabor.f);
    CHECK(r.gabor.n_scales == 1);
    CHECK(r.gabor.kernel_size == 3);
    CHECK(r.extraction.block_size == 4);
    CHECK(r.extraction.threshold == 0.125);
    CHECK(r.lengths.blocks_x == 1);
    CHECK(r.lengths.lengths == std::vector<int>{2});
    // Doubles survive exactly, including the subnormal-adjacent 1e-300.
    CHECK((r.ica.whitening.mean.array() == b.ica.whitening.mean.array()).all());
    CHECK((r.ica.whitening.eigvals.array() == b.ica.whitening.eigvals.array()).all());
    CHECK((r.ica.whitening.eigvecs.array() == b.ica.whitening.eigvecs.array()).all());
    CHECK((r.ica.unmixing.array() == b.ica.unmixing.array()).all());
    CHECK(r.classifier.labels == b.classifier.labels);
    CHECK((r.classifier.means.array() == b.classifier.means.array()).all());
    CHECK(r.classifier.accept_threshold == 0.625);
    CHECK(r.classifier.metric == Metric::l2);
}

TEST_CASE("re-saving a loaded model reproduces the file byte for byte") {
    const testutil::TempDir tmp;
    const auto first = tmp.path() / "a.ihif";
    const auto second = tmp.path() / "b.ihif";
    save_model(tiny_bundle(), first);
    save_model(load_model(first), second);
    CHECK(testutil::slurp_bytes(first) == testutil::slurp_bytes(second));
}

TEST_CASE("corruption is detected before any field is trusted") {
    const testutil::TempDir tmp;
    const auto path = tmp.path() / "tiny.ihif";

    SUBCASE("a flipped payload byte fails its section checksum") {
        save_model(tiny_bundle(), path);
        flip_byte(path, -1); // last byte of the classifier payload
        CHECK_THROWS_WITH_AS(load_model(path), doctest::Contains("checksum"), DataError);
    }
    SUBCASE("a bumped version is refused") {
        save_model(tiny_bundle(), path);
        flip_byte(path, 4);
        CHECK_THROWS_WITH_AS(load_model(path), doctest::Contains("version"), DataError);
    }
    SUBCASE("bad magic is refused") {
        save_model(tiny_bundle(), path);
        flip_byte(path, 0);
        CHECK_THROWS_WITH_AS(load_model(path), doctest::Contains("magic"), DataError);
    }
    SUBCASE("a truncated file is refused") {
        save_model(tiny_bundle(), path);
        const auto bytes = testutil::slurp_bytes(path);
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out.write(reinterpret_cast<const char*>(bytes.data()), 40);
        out.close();
        CHECK_THROWS_AS(load_model(path), DataError);
    }
    SUBCASE("a missing file is refused") {
        CHECK_THROWS_AS(load_model(tmp.path() / "nope.ihif"), DataError);
    }
}

TEST_CASE("bundle validation cross-checks the dimension chain") {
    CHECK_NOTHROW(tiny_bundle().validate());

    ModelBundle b = tiny_bundle();
    b.lengths.lengths = {2, 2}; // one response, two length entries
    CHECK_THROWS_AS(b.validate(), DataError);

    b = tiny_bundle();
    b.ica.whitening.mean = Eigen::VectorXd::Zero(3);
    CHECK_THROWS_AS(b.validate(), DataError);

    b = tiny_bundle();
    b.ica.unmixing = Eigen::MatrixXd::Zero(2, 3);
    CHECK_THROWS_AS(b.validate(), DataError);

    b = tiny_bundle();
    b.classifier.means = Eigen::MatrixXd::Zero(3, 2);
    CHECK_THROWS_AS(b.validate(), DataError);

    b = tiny_bundle();
    b.classifier.labels = {"alice"};
    CHECK_THROWS_AS(b.validate(), DataError);
}

TEST_CASE("saving to an unwritable location reports the path") {
    CHECK_THROWS_AS(save_model(tiny_bundle(), "/no-such-dir/model.ihif"), DataError);
}
