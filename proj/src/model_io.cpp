#include "ihif/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <zlib.h>

#include "ihif/errors.hpp"

namespace ihif {

namespace {

using Bytes = std::vector<std::uint8_t>;

void put_u16(Bytes& b, std::uint16_t v) {
    b.push_back(static_cast<std::uint8_t>(v));
    b.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(Bytes& b, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(Bytes& b, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(Bytes& b, double v) { put_u64(b, std::bit_cast<std::uint64_t>(v)); }

void put_string(Bytes& b, const std::string& s) {
    if (s.size() > 0xffff) throw DataError("model: string too long to encode");
    put_u16(b, static_cast<std::uint16_t>(s.size()));
    b.insert(b.end(), s.begin(), s.end());
}

void put_vector(Bytes& b, const Eigen::VectorXd& v) {
    put_u64(b, static_cast<std::uint64_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) put_f64(b, v(i));
}

void put_matrix(Bytes& b, const Eigen::MatrixXd& m) {
    put_u64(b, static_cast<std::uint64_t>(m.rows()));
    put_u64(b, static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) put_f64(b, m(r, c));
}

class Reader {
public:
    Reader(const std::uint8_t* data, std::size_t size, std::string what)
        : data_(data), size_(size), what_(std::move(what)) {}

    std::uint16_t u16() {
        need(2);
        std::uint16_t v = static_cast<std::uint16_t>(data_[pos_] | (data_[pos_ + 1] << 8));
        pos_ += 2;
        return v;
    }

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }

    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
        pos_ += 8;
        return v;
    }

    double f64() { return std::bit_cast<double>(u64()); }

    std::string string() {
        const std::size_t n = u16();
        need(n);
        std::string s(reinterpret_cast<const char*>(data_ + pos_), n);
        pos_ += n;
        return s;
    }

    Eigen::VectorXd vector() {
        const std::uint64_t n = u64();
        need(n * 8);
        Eigen::VectorXd v(static_cast<Eigen::Index>(n));
        for (std::uint64_t i = 0; i < n; ++i) v(static_cast<Eigen::Index>(i)) = f64();
        return v;
    }

    Eigen::MatrixXd matrix() {
        const std::uint64_t rows = u64();
        const std::uint64_t cols = u64();
        need(rows * cols * 8);
        Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        for (std::uint64_t r = 0; r < rows; ++r)
            for (std::uint64_t c = 0; c < cols; ++c)
                m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = f64();
        return m;
    }

    std::size_t pos() const { return pos_; }
    std::size_t remaining() const { return size_ - pos_; }

private:
    void need(std::uint64_t n) const {
        if (n > size_ - pos_) throw DataError("model: truncated " + what_);
    }

    const std::uint8_t* data_;
    std::size_t size_;
    std::size_t pos_ = 0;
    std::string what_;
};

std::uint32_t crc_of(const Bytes& b) {
    return static_cast<std::uint32_t>(
        ::crc32(0L, b.empty() ? Z_NULL : b.data(), static_cast<uInt>(b.size())));
}

std::uint32_t crc_of(const std::uint8_t* p, std::size_t n) {
    return static_cast<std::uint32_t>(::crc32(0L, n == 0 ? Z_NULL : p, static_cast<uInt>(n)));
}

Bytes encode_meta(const ModelBundle& b) {
    Bytes out;
    put_u32(out, static_cast<std::uint32_t>(b.image_width));
    put_u32(out, static_cast<std::uint32_t>(b.image_height));
    return out;
}

Bytes encode_gabor(const GaborParams& g) {
    Bytes out;
    put_f64(out, g.sigma);
    put_f64(out, g.k_max);
    put_f64(out, g.f);
    put_u32(out, static_cast<std::uint32_t>(g.n_scales));
    put_u32(out, static_cast<std::uint32_t>(g.n_orientations));
    put_u32(out, static_cast<std::uint32_t>(g.kernel_size));
    return out;
}

Bytes encode_extraction(const ExtractionParams& e) {
    Bytes out;
    put_u32(out, static_cast<std::uint32_t>(e.block_size));
    put_f64(out, e.threshold);
    return out;
}

Bytes encode_lengths(const GlobalLengths& gl) {
    Bytes out;
    put_u32(out, static_cast<std::uint32_t>(gl.blocks_x));
    put_u32(out, static_cast<std::uint32_t>(gl.blocks_y));
    put_u64(out, gl.lengths.size());
    for (int v : gl.lengths) put_u32(out, static_cast<std::uint32_t>(v));
    return out;
}

Bytes encode_ica(const IcaModel& m) {
    Bytes out;
    put_vector(out, m.whitening.mean);
    put_vector(out, m.whitening.eigvals);
    put_matrix(out, m.whitening.eigvecs);
    put_matrix(out, m.unmixing);
    put_u32(out, static_cast<std::uint32_t>(m.contrast));
    return out;
}

Bytes encode_classifier(const ClassModel& c) {
    Bytes out;
    put_u64(out, c.labels.size());
    for (const auto& label : c.labels) put_string(out, label);
    put_matrix(out, c.means);
    put_f64(out, c.accept_threshold);
    put_u32(out, c.metric == Metric::l2 ? 0u : 1u);
    return out;
}

} // namespace

void ModelBundle::validate() const {
    gabor.validate();
    extraction.validate();
    const auto n_responses = static_cast<std::size_t>(gabor.bank_size());
    if (lengths.blocks_x < 1 || lengths.blocks_y < 1)
        throw DataError("model: block grid must be at least 1x1");
    if (lengths.lengths.size() != n_responses) // one retained-length per response
        throw DataError("model: length table does not match the filter bank geometry");
    if (static_cast<std::size_t>(ica.whitening.n_features()) != lengths.vector_length())
        throw DataError("model: whitening input size does not match the feature length");
    if (ica.unmixing.cols() != ica.whitening.dim())
        throw DataError("model: unmixing width does not match the whitened dimension");
    if (classifier.means.rows() != ica.unmixing.rows())
        throw DataError("model: class means do not live in the projected space");
    if (static_cast<std::size_t>(classifier.means.cols()) != classifier.labels.size())
        throw DataError("model: one mean per label required");
}

void save_model(const ModelBundle& bundle, const std::filesystem::path& path) {
    const std::vector<std::pair<std::string, Bytes>> sections = {
        {"meta", encode_meta(bundle)},
        {"gabor", encode_gabor(bundle.gabor)},
        {"extraction", encode_extraction(bundle.extraction)},
        {"lengths", encode_lengths(bundle.lengths)},
        {"ica", encode_ica(bundle.ica)},
        {"classifier", encode_classifier(bundle.classifier)},
    };

    Bytes header;
    header.insert(header.end(), {'I', 'H', 'I', 'F'});
    put_u32(header, bundle.version);
    put_u32(header, static_cast<std::uint32_t>(sections.size()));

    std::size_t table_size = 0;
    for (const auto& [name, payload] : sections) table_size += 2 + name.size() + 8 + 8 + 4;

    std::uint64_t offset = header.size() + table_size;
    Bytes table;
    for (const auto& [name, payload] : sections) {
        put_string(table, name);
        put_u64(table, offset);
        put_u64(table, payload.size());
        put_u32(table, crc_of(payload));
        offset += payload.size();
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write model " + path.string());
    const auto write = [&](const Bytes& b) {
        out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
    };
    write(header);
    write(table);
    for (const auto& [name, payload] : sections) write(payload);
    out.flush();
    if (!out) throw DataError("failed writing model " + path.string());
}

ModelBundle load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read model " + path.string());
    Bytes file((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    Reader header(file.data(), file.size(), "header");
    if (file.size() < 12 || std::memcmp(file.data(), "IHIF", 4) != 0)
        throw DataError("not a model file (bad magic): " + path.string());
    header.u32(); // magic already checked
    const std::uint32_t version = header.u32();
    if (version != kModelVersion)
        throw DataError("unsupported model version " + std::to_string(version) + " (expected " +
                        std::to_string(kModelVersion) + ")");
    const std::uint32_t n_sections = header.u32();

    struct Entry {
        std::uint64_t offset;
        std::uint64_t length;
    };
    std::map<std::string, Entry> entries;
    for (std::uint32_t i = 0; i < n_sections; ++i) {
        const std::string name = header.string();
        const std::uint64_t off = header.u64();
        const std::uint64_t len = header.u64();
        const std::uint32_t crc = header.u32();
        if (off > file.size() || len > file.size() - off)
            throw DataError("model: truncated section '" + name + "'");
        if (crc_of(file.data() + off, len) != crc)
            throw DataError("model: checksum failure in section '" + name + "'");
        entries[name] = Entry{off, len};
    }

    const auto section = [&](const std::string& name) -> Reader {
        const auto it = entries.find(name);
        if (it == entries.end()) throw DataError("model: missing section '" + name + "'");
        return Reader(file.data() + it->second.offset, it->second.length, "section '" + name + "'");
    };

    ModelBundle b;
    b.version = version;

    {
        Reader r = section("meta");
        b.image_width = static_cast<int>(r.u32());
        b.image_height = static_cast<int>(r.u32());
    }
    {
        Reader r = section("gabor");
        b.gabor.sigma = r.f64();
        b.gabor.k_max = r.f64();
        b.gabor.f = r.f64();
        b.gabor.n_scales = static_cast<int>(r.u32());
        b.gabor.n_orientations = static_cast<int>(r.u32());
        b.gabor.kernel_size = static_cast<int>(r.u32());
    }
    {
        Reader r = section("extraction");
        b.extraction.block_size = static_cast<int>(r.u32());
        b.extraction.threshold = r.f64();
    }
    {
        Reader r = section("lengths");
        b.lengths.blocks_x = static_cast<int>(r.u32());
        b.lengths.blocks_y = static_cast<int>(r.u32());
        const std::uint64_t n = r.u64();
        b.lengths.lengths.resize(n);
        for (std::uint64_t i = 0; i < n; ++i) b.lengths.lengths[i] = static_cast<int>(r.u32());
    }
    {
        Reader r = section("ica");
        b.ica.whitening.mean = r.vector();
        b.ica.whitening.eigvals = r.vector();
        b.ica.whitening.eigvecs = r.matrix();
        b.ica.unmixing = r.matrix();
        const std::uint32_t contrast = r.u32();
        if (contrast != 0) throw DataError("model: unknown contrast id " + std::to_string(contrast));
        b.ica.contrast = IcaModel::Contrast::quartic;
    }
    {
        Reader r = section("classifier");
        const std::uint64_t n = r.u64();
        b.classifier.labels.resize(n);
        for (std::uint64_t i = 0; i < n; ++i) b.classifier.labels[i] = r.string();
        b.classifier.means = r.matrix();
        b.classifier.accept_threshold = r.f64();
        const std::uint32_t metric = r.u32();
        if (metric > 1) throw DataError("model: unknown metric id " + std::to_string(metric));
        b.classifier.metric = metric == 0 ? Metric::l2 : Metric::cosine;
    }

    b.validate();
    return b;
}

} // namespace ihif
