#include "ihif/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>

#include <png.h>

#include "ihif/errors.hpp"

namespace ihif {

Image::Image(int w, int h, double fill)
    : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {
    if (w <= 0 || h <= 0) throw DataError("image dimensions must be positive");
}

void Image::validate() const {
    if (width <= 0 || height <= 0) throw DataError("image dimensions must be positive");
    if (pixels.size() != static_cast<std::size_t>(width) * height)
        throw DataError("pixel buffer does not match dimensions");
    for (double v : pixels) {
        if (!std::isfinite(v) || v < 0.0 || v > 1.0)
            throw DataError("pixel intensity outside [0,1]");
    }
}

namespace {

// Reads the next whitespace-separated PGM header token, skipping '#' comments.
std::string next_pgm_token(std::istream& in) {
    std::string tok;
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (std::isspace(c)) {
            // skip
        } else {
            break;
        }
        c = in.get();
    }
    while (c != EOF && !std::isspace(c)) {
        tok.push_back(static_cast<char>(c));
        c = in.get();
    }
    return tok;
}

int parse_pgm_int(std::istream& in, const char* what) {
    const std::string tok = next_pgm_token(in);
    if (tok.empty()) throw DataError(std::string("truncated PGM header: missing ") + what);
    try {
        std::size_t pos = 0;
        const int v = std::stoi(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw DataError(std::string("bad PGM header field '") + tok + "' for " + what);
    }
}

Image load_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());

    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (magic[0] != 'P' || magic[1] != '5')
        throw DataError(path.string() + ": not a binary PGM (P5) file");

    const int w = parse_pgm_int(in, "width");
    const int h = parse_pgm_int(in, "height");
    const int maxval = parse_pgm_int(in, "maxval");
    if (w <= 0 || h <= 0) throw DataError(path.string() + ": zero-dimension image");
    if (maxval <= 0 || maxval > 255)
        throw DataError(path.string() + ": only 8-bit PGM supported (maxval " +
                        std::to_string(maxval) + ")");
    // Exactly one whitespace byte separates the header from the raster;
    // it was already consumed by the maxval token read.

    std::vector<unsigned char> raw(static_cast<std::size_t>(w) * h);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size())
        throw DataError(path.string() + ": truncated PGM raster");

    Image img(w, h);
    // Divide rather than multiply by a reciprocal: k/maxval is then the
    // canonical double for every byte, so write/read cycles are bit-stable.
    const double maxval_d = maxval;
    for (std::size_t i = 0; i < raw.size(); ++i) img.pixels[i] = raw[i] / maxval_d;
    return img;
}

Image load_png(const std::filesystem::path& path) {
    png_image png;
    std::memset(&png, 0, sizeof(png));
    png.version = PNG_IMAGE_VERSION;

    if (!png_image_begin_read_from_file(&png, path.string().c_str()))
        throw DataError(path.string() + ": " + png.message);

    const bool color = (png.format & PNG_FORMAT_FLAG_COLOR) != 0;
    png.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;

    if (png.width == 0 || png.height == 0) {
        png_image_free(&png);
        throw DataError(path.string() + ": zero-dimension image");
    }

    std::vector<unsigned char> buf(PNG_IMAGE_SIZE(png));
    png_color black{0, 0, 0};
    if (!png_image_finish_read(&png, &black, buf.data(), 0, nullptr)) {
        const std::string msg = png.message;
        png_image_free(&png);
        throw DataError(path.string() + ": " + msg);
    }

    Image img(static_cast<int>(png.width), static_cast<int>(png.height));
    if (color) {
        for (std::size_t i = 0; i < img.size(); ++i) {
            const double r = buf[3 * i + 0];
            const double g = buf[3 * i + 1];
            const double b = buf[3 * i + 2];
            img.pixels[i] = std::min(1.0, (0.299 * r + 0.587 * g + 0.114 * b) / 255.0);
        }
    } else {
        for (std::size_t i = 0; i < img.size(); ++i) img.pixels[i] = buf[i] / 255.0;
    }
    return img;
}

} // namespace

Image load_image(const std::filesystem::path& path) {
    std::error_code ec;
    if (!std::filesystem::exists(path, ec))
        throw DataError("no such file: " + path.string());

    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw DataError("cannot open " + path.string());
    unsigned char sig[8] = {0};
    probe.read(reinterpret_cast<char*>(sig), 8);
    probe.close();

    static const unsigned char png_sig[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
    if (std::equal(std::begin(png_sig), std::end(png_sig), sig)) return load_png(path);
    if (sig[0] == 'P' && sig[1] == '5') return load_pgm(path);
    throw DataError(path.string() + ": unsupported format (want PGM P5 or PNG)");
}

void save_pgm(const Image& img, const std::filesystem::path& path) {
    if (img.width <= 0 || img.height <= 0) throw DataError("cannot save empty image");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
    std::vector<unsigned char> raw(img.size());
    for (std::size_t i = 0; i < img.size(); ++i) {
        const double v = std::clamp(img.pixels[i], 0.0, 1.0);
        raw[i] = static_cast<unsigned char>(std::lround(v * 255.0));
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out) throw DataError("short write to " + path.string());
}

Image resize(const Image& img, int out_w, int out_h) {
    if (out_w < 1 || out_h < 1) throw DataError("resize target must be at least 1x1");
    if (img.width <= 0 || img.height <= 0) throw DataError("cannot resize empty image");

    Image out(out_w, out_h);
    // Corner-aligned sampling: source position x*(in-1)/(out-1). A size-1
    // output axis samples the source midpoint.
    const auto src_coord = [](int i, int in_n, int out_n) {
        if (out_n == 1) return (in_n - 1) / 2.0;
        return static_cast<double>(i) * (in_n - 1) / (out_n - 1);
    };

    for (int y = 0; y < out_h; ++y) {
        const double sy = src_coord(y, img.height, out_h);
        const int y0 = std::min(static_cast<int>(sy), img.height - 1);
        const int y1 = std::min(y0 + 1, img.height - 1);
        const double fy = sy - y0;
        for (int x = 0; x < out_w; ++x) {
            const double sx = src_coord(x, img.width, out_w);
            const int x0 = std::min(static_cast<int>(sx), img.width - 1);
            const int x1 = std::min(x0 + 1, img.width - 1);
            const double fx = sx - x0;
            const double top = img.at(x0, y0) * (1 - fx) + img.at(x1, y0) * fx;
            const double bot = img.at(x0, y1) * (1 - fx) + img.at(x1, y1) * fx;
            out.at(x, y) = std::clamp(top * (1 - fy) + bot * fy, 0.0, 1.0);
        }
    }
    return out;
}

} // namespace ihif
