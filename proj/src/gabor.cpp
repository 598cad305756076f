#include "ihif/gabor.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include <fftw3.h>

#include "ihif/errors.hpp"

namespace ihif {

double GaborParams::carrier(int nu) const { return k_max / std::pow(f, nu); }

void GaborParams::validate() const {
    if (!(sigma > 0.0)) throw DataError("gabor: sigma must be > 0");
    if (!(k_max > 0.0)) throw DataError("gabor: k_max must be > 0");
    if (!(f > 1.0)) throw DataError("gabor: spacing factor f must be > 1");
    if (n_scales < 1 || n_orientations < 1) throw DataError("gabor: need at least 1 scale and orientation");
    if (kernel_size < 1 || kernel_size % 2 == 0) throw DataError("gabor: kernel_size must be odd and positive");
}

ComplexGrid make_kernel(int mu, int nu, const GaborParams& p) {
    p.validate();
    if (mu < 0 || mu >= p.n_orientations) throw DataError("gabor: orientation index out of range");
    if (nu < 0 || nu >= p.n_scales) throw DataError("gabor: scale index out of range");

    const double k = p.carrier(nu);
    const double phi = M_PI * mu / p.n_orientations;
    const double kx = k * std::cos(phi);
    const double ky = k * std::sin(phi);
    const double k2 = k * k;
    const double sigma2 = p.sigma * p.sigma;
    const double dc = std::exp(-sigma2 / 2.0);
    const int r = p.kernel_size / 2;

    ComplexGrid grid(p.kernel_size, p.kernel_size);
    for (int row = 0; row < p.kernel_size; ++row) {
        const double y = row - r;
        for (int col = 0; col < p.kernel_size; ++col) {
            const double x = col - r;
            const double envelope = (k2 / sigma2) * std::exp(-k2 * (x * x + y * y) / (2.0 * sigma2));
            const double phase = kx * x + ky * y;
            grid.at(col, row) =
                envelope * (std::complex<double>(std::cos(phase), std::sin(phase)) - dc);
        }
    }

    // Remove the residual lattice mean; see header.
    std::complex<double> sum{0.0, 0.0};
    for (const auto& v : grid.values) sum += v;
    const std::complex<double> mean = sum / static_cast<double>(grid.values.size());
    for (auto& v : grid.values) v -= mean;
    return grid;
}

GaborBank make_bank(const GaborParams& p) {
    p.validate();
    GaborBank bank;
    bank.params = p;
    bank.kernels.reserve(static_cast<std::size_t>(p.bank_size()));
    for (int nu = 0; nu < p.n_scales; ++nu)
        for (int mu = 0; mu < p.n_orientations; ++mu)
            bank.kernels.push_back(make_kernel(mu, nu, p));
    return bank;
}

namespace {

// FFTW's planner is not thread-safe; executing a plan is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

using cvec = std::vector<std::complex<double>>;

// Plans for one padded workspace size. Plans are created FFTW_UNALIGNED so
// they can execute on any std::vector buffer via the new-array interface.
class Fft2d {
public:
    Fft2d(int width, int height) : width_(width), height_(height) {
        cvec in(area()), out(area());
        std::scoped_lock lock(planner_mutex());
        fwd_ = fftw_plan_dft_2d(height, width, as_fftw(in.data()), as_fftw(out.data()),
                                FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
        inv_ = fftw_plan_dft_2d(height, width, as_fftw(in.data()), as_fftw(out.data()),
                                FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (!fwd_ || !inv_) throw NumericalError("fftw plan creation failed");
    }

    ~Fft2d() {
        std::scoped_lock lock(planner_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(inv_);
    }

    Fft2d(const Fft2d&) = delete;
    Fft2d& operator=(const Fft2d&) = delete;

    std::size_t area() const { return static_cast<std::size_t>(width_) * height_; }
    int width() const { return width_; }
    int height() const { return height_; }

    void forward(cvec& in, cvec& out) const {
        fftw_execute_dft(fwd_, as_fftw(in.data()), as_fftw(out.data()));
    }

    // Unnormalized inverse; callers divide by area().
    void inverse(cvec& in, cvec& out) const {
        fftw_execute_dft(inv_, as_fftw(in.data()), as_fftw(out.data()));
    }

private:
    static fftw_complex* as_fftw(std::complex<double>* p) {
        return reinterpret_cast<fftw_complex*>(p);
    }

    int width_;
    int height_;
    fftw_plan fwd_ = nullptr;
    fftw_plan inv_ = nullptr;
};

void check_conv_dims(int img_w, int img_h, int ker_w, int ker_h) {
    if (img_w <= 0 || img_h <= 0) throw DataError("convolve: empty image");
    if (ker_w <= 0 || ker_h <= 0) throw DataError("convolve: empty kernel");
    const long long pw = static_cast<long long>(img_w) + ker_w - 1;
    const long long ph = static_cast<long long>(img_h) + ker_h - 1;
    if (pw * ph > (1LL << 30)) throw DataError("convolve: workspace dimension overflow");
}

cvec pad_image(const Image& img, std::size_t area, int pad_w) {
    cvec out(area);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            out[static_cast<std::size_t>(y) * pad_w + x] = img.at(x, y);
    return out;
}

cvec pad_kernel(const ComplexGrid& ker, std::size_t area, int pad_w) {
    cvec out(area);
    for (int y = 0; y < ker.height; ++y)
        for (int x = 0; x < ker.width; ++x)
            out[static_cast<std::size_t>(y) * pad_w + x] = ker.at(x, y);
    return out;
}

ComplexGrid crop_result(const cvec& full, int pad_w, int img_w, int img_h, int off_x,
                        int off_y, double scale) {
    ComplexGrid out(img_w, img_h);
    for (int y = 0; y < img_h; ++y)
        for (int x = 0; x < img_w; ++x)
            out.at(x, y) =
                full[static_cast<std::size_t>(y + off_y) * pad_w + (x + off_x)] * scale;
    return out;
}

} // namespace

ComplexGrid convolve_fft(const Image& img, const ComplexGrid& kernel) {
    check_conv_dims(img.width, img.height, kernel.width, kernel.height);
    const int pad_w = img.width + kernel.width - 1;
    const int pad_h = img.height + kernel.height - 1;
    Fft2d fft(pad_w, pad_h);

    cvec a = pad_image(img, fft.area(), pad_w);
    cvec b = pad_kernel(kernel, fft.area(), pad_w);
    cvec fa(fft.area()), fb(fft.area());
    fft.forward(a, fa);
    fft.forward(b, fb);
    for (std::size_t i = 0; i < fa.size(); ++i) fa[i] *= fb[i];
    fft.inverse(fa, fb);

    return crop_result(fb, pad_w, img.width, img.height, kernel.width / 2, kernel.height / 2,
                       1.0 / static_cast<double>(fft.area()));
}

struct ConvolutionEngine::Impl {
    GaborBank bank;
    int img_w;
    int img_h;
    int pad_w;
    int pad_h;
    Fft2d fft;
    std::vector<cvec> kernel_spectra;

    Impl(const GaborBank& b, int w, int h)
        : bank(b),
          img_w(w),
          img_h(h),
          pad_w(w + b.params.kernel_size - 1),
          pad_h(h + b.params.kernel_size - 1),
          fft(pad_w, pad_h) {
        kernel_spectra.reserve(bank.kernels.size());
        for (const auto& ker : bank.kernels) {
            cvec padded = pad_kernel(ker, fft.area(), pad_w);
            cvec spectrum(fft.area());
            fft.forward(padded, spectrum);
            kernel_spectra.push_back(std::move(spectrum));
        }
    }
};

ConvolutionEngine::ConvolutionEngine(const GaborBank& bank, int img_w, int img_h) {
    bank.params.validate();
    check_conv_dims(img_w, img_h, bank.params.kernel_size, bank.params.kernel_size);
    if (bank.kernels.size() != static_cast<std::size_t>(bank.params.bank_size()))
        throw DataError("gabor bank kernel count does not match params");
    impl_ = std::make_unique<Impl>(bank, img_w, img_h);
}

ConvolutionEngine::~ConvolutionEngine() = default;

ResponseStack ConvolutionEngine::responses(const Image& img) const {
    const auto& im = *impl_;
    if (img.width != im.img_w || img.height != im.img_h)
        throw DataError("image geometry does not match convolution engine");

    cvec padded = pad_image(img, im.fft.area(), im.pad_w);
    cvec img_spectrum(im.fft.area());
    im.fft.forward(padded, img_spectrum);

    const int off = im.bank.params.kernel_size / 2;
    const double scale = 1.0 / static_cast<double>(im.fft.area());

    ResponseStack stack;
    stack.n_scales = im.bank.params.n_scales;
    stack.n_orientations = im.bank.params.n_orientations;
    stack.responses.reserve(im.kernel_spectra.size());

    cvec product(im.fft.area()), space(im.fft.area());
    for (const auto& spectrum : im.kernel_spectra) {
        for (std::size_t i = 0; i < product.size(); ++i) product[i] = img_spectrum[i] * spectrum[i];
        im.fft.inverse(product, space);
        RealGrid mag(im.img_w, im.img_h);
        for (int y = 0; y < im.img_h; ++y)
            for (int x = 0; x < im.img_w; ++x)
                mag.at(x, y) =
                    std::abs(space[static_cast<std::size_t>(y + off) * im.pad_w + (x + off)]) * scale;
        stack.responses.push_back(std::move(mag));
    }
    return stack;
}

ResponseStack magnitude_responses(const Image& img, const GaborBank& bank) {
    ConvolutionEngine engine(bank, img.width, img.height);
    return engine.responses(img);
}

void dump_responses(const ResponseStack& stack, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    for (int nu = 0; nu < stack.n_scales; ++nu) {
        for (int mu = 0; mu < stack.n_orientations; ++mu) {
            const RealGrid& grid = stack.response(nu, mu);
            const auto [lo_it, hi_it] = std::minmax_element(grid.values.begin(), grid.values.end());
            const double lo = *lo_it, hi = *hi_it;
            const double span = hi > lo ? hi - lo : 1.0;
            Image img(grid.width, grid.height);
            for (std::size_t i = 0; i < grid.values.size(); ++i)
                img.pixels[i] = (grid.values[i] - lo) / span;
            save_pgm(img, dir / ("response_s" + std::to_string(nu) + "_o" + std::to_string(mu) + ".pgm"));
        }
    }
}

} // namespace ihif
