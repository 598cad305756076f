#include "helpers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>

#include <png.h>

#include "ihif/errors.hpp"
#include "ihif/image.hpp"

namespace testutil {

using ihif::ComplexGrid;
using ihif::Image;
using ihif::Rng;

TempDir::TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "ihif-test-XXXXXX").string();
    if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

ComplexGrid spatial_convolve(const Image& img, const ComplexGrid& kernel) {
    const int rx = kernel.width / 2;
    const int ry = kernel.height / 2;
    ComplexGrid out(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            std::complex<double> acc{0.0, 0.0};
            for (int krow = 0; krow < kernel.height; ++krow) {
                for (int kcol = 0; kcol < kernel.width; ++kcol) {
                    const int sx = x - (kcol - rx);
                    const int sy = y - (krow - ry);
                    if (sx < 0 || sy < 0 || sx >= img.width || sy >= img.height) continue;
                    acc += kernel.at(kcol, krow) * img.at(sx, sy);
                }
            }
            out.at(x, y) = acc;
        }
    }
    return out;
}

Image random_image(int w, int h, Rng& rng) {
    Image img(w, h);
    for (auto& p : img.pixels) p = rng.uniform();
    return img;
}

ComplexGrid random_kernel(int w, int h, Rng& rng) {
    ComplexGrid k(w, h);
    for (auto& v : k.values) v = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    return k;
}

namespace {

Image finish(Image img, Rng& rng) {
    for (auto& p : img.pixels) p = std::clamp(p + 0.015 * rng.normal(), 0.0, 1.0);
    return img;
}

} // namespace

Image grating(int size, double angle, double freq, Rng& rng) {
    const double phase = rng.uniform(-0.5, 0.5);
    const double cx = std::cos(angle);
    const double cy = std::sin(angle);
    Image img(size, size);
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x)
            img.at(x, y) = 0.5 + 0.45 * std::sin(freq * (x * cx + y * cy) + phase);
    return finish(std::move(img), rng);
}

Image rings(int size, double freq, Rng& rng) {
    const double cx = size / 2.0 + rng.uniform(-2.0, 2.0);
    const double cy = size / 2.0 + rng.uniform(-2.0, 2.0);
    Image img(size, size);
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x)
            img.at(x, y) = 0.5 + 0.45 * std::sin(freq * std::hypot(x - cx, y - cy));
    return finish(std::move(img), rng);
}

Image checker(int size, int cell, Rng& rng) {
    Image img(size, size);
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x)
            img.at(x, y) = ((x / cell + y / cell) % 2) ? 0.95 : 0.05;
    return finish(std::move(img), rng);
}

Image noise_texture(int size, Rng& rng) {
    Image img(size, size);
    for (auto& p : img.pixels) p = rng.uniform();
    return finish(std::move(img), rng);
}

Image blobs(int size, Rng& rng) {
    Image img(size, size, 0.1);
    for (int b = 0; b < 3; ++b) {
        const double cx = rng.uniform(4.0, size - 4.0);
        const double cy = rng.uniform(4.0, size - 4.0);
        for (int y = 0; y < size; ++y)
            for (int x = 0; x < size; ++x)
                img.at(x, y) +=
                    0.9 * std::exp(-((x - cx) * (x - cx) + (y - cy) * (y - cy)) / 18.0);
    }
    return finish(std::move(img), rng);
}

ihif::Split make_synthetic_split(int size, std::uint64_t seed) {
    Rng rng(seed);
    ihif::Split split;

    const double angles[] = {0.0, M_PI / 4.0, M_PI / 2.0, 3.0 * M_PI / 4.0};
    for (int s = 0; s < 4; ++s) {
        const std::string sid = "s0" + std::to_string(s + 1);
        for (int i = 0; i < 6; ++i) {
            ihif::LabeledImage li;
            li.image = grating(size, angles[s], 1.1, rng);
            li.subject_id = sid;
            li.filename = "0" + std::to_string(i + 1) + ".pgm";
            (i < 5 ? split.train : split.positive_test).push_back(std::move(li));
        }
    }

    const auto impostor = [&](const std::string& sid, Image img) {
        ihif::LabeledImage li;
        li.image = std::move(img);
        li.subject_id = sid;
        li.filename = "01.pgm";
        split.negative_test.push_back(std::move(li));
    };
    impostor("x01", rings(size, 0.9, rng));
    impostor("x02", checker(size, 3, rng));
    impostor("x03", noise_texture(size, rng));
    impostor("x04", blobs(size, rng));
    return split;
}

void write_split_tree(const ihif::Split& split, const std::filesystem::path& root) {
    const auto write_all = [&](const std::vector<ihif::LabeledImage>& images) {
        for (const auto& li : images) {
            std::filesystem::create_directories(root / li.subject_id);
            ihif::save_pgm(li.image, root / li.subject_id / li.filename);
        }
    };
    write_all(split.train);
    write_all(split.positive_test);
    write_all(split.negative_test);
}

ihif::ExperimentConfig synthetic_config(const std::filesystem::path& root) {
    ihif::ExperimentConfig cfg;
    cfg.dataset_root = root;
    cfg.image_width = 24;
    cfg.image_height = 24;
    cfg.gabor.n_scales = 3;
    cfg.gabor.n_orientations = 4;
    cfg.gabor.kernel_size = 15;
    cfg.extraction.block_size = 4;
    cfg.extraction.threshold = 0.1;
    cfg.ica.n_ics = 5;
    cfg.ica.max_dim = 5;
    cfg.ica.seed = 42;
    cfg.ica.tol = 1e-8;
    cfg.ica.max_iter = 400;
    cfg.metric = ihif::Metric::cosine;
    cfg.split.seed = 1;
    cfg.split.train_per_subject = 5;
    cfg.split.impostor_subjects = {"x01", "x02", "x03", "x04"};
    return cfg;
}

namespace {

void write_png(const std::filesystem::path& path, int w, int h, png_uint_32 format,
               const unsigned char* data) {
    png_image img;
    std::memset(&img, 0, sizeof(img));
    img.version = PNG_IMAGE_VERSION;
    img.width = static_cast<png_uint_32>(w);
    img.height = static_cast<png_uint_32>(h);
    img.format = format;
    if (!png_image_write_to_file(&img, path.string().c_str(), 0, data, 0, nullptr))
        throw std::runtime_error(std::string("png write failed: ") + img.message);
}

} // namespace

void write_gray_png(const std::filesystem::path& path, int w, int h,
                    const std::vector<unsigned char>& gray) {
    write_png(path, w, h, PNG_FORMAT_GRAY, gray.data());
}

void write_rgb_png(const std::filesystem::path& path, int w, int h,
                   const std::vector<unsigned char>& rgb) {
    write_png(path, w, h, PNG_FORMAT_RGB, rgb.data());
}

void write_pgm_raw(const std::filesystem::path& path, int w, int h, int maxval,
                   const std::vector<unsigned char>& data, const std::string& comment) {
    std::ofstream out(path, std::ios::binary);
    out << "P5\n";
    if (!comment.empty()) out << "# " << comment << "\n";
    out << w << " " << h << "\n" << maxval << "\n";
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size()));
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::uint8_t> slurp_bytes(const std::filesystem::path& path) {
    const std::string s = slurp(path);
    return {s.begin(), s.end()};
}

} // namespace testutil
