#pragma once

#include <complex>
#include <filesystem>
#include <memory>
#include <vector>

#include "ihif/image.hpp"

namespace ihif {

/// Parameters of the Gabor wavelet family
///
///   phi(z) = (|k|^2/sigma^2) exp(-|k|^2 |z|^2 / (2 sigma^2))
///            [ exp(i k.z) - exp(-sigma^2/2) ]
///
/// with carrier k = k_max/f^nu * (cos(pi mu/n_orientations),
/// sin(pi mu/n_orientations)) for scale nu and orientation mu.
struct GaborParams {
    double sigma = 2.0 * M_PI;
    double k_max = M_PI / 2.0;
    double f = M_SQRT2;
    int n_scales = 5;
    int n_orientations = 8;
    int kernel_size = 33;

    int bank_size() const { return n_scales * n_orientations; }
    double carrier(int nu) const; // k_nu = k_max / f^nu
    void validate() const;
};

struct ComplexGrid {
    int width = 0;
    int height = 0;
    std::vector<std::complex<double>> values;

    ComplexGrid() = default;
    ComplexGrid(int w, int h)
        : width(w), height(h), values(static_cast<std::size_t>(w) * h) {}

    std::complex<double>& at(int x, int y) {
        return values[static_cast<std::size_t>(y) * width + x];
    }
    std::complex<double> at(int x, int y) const {
        return values[static_cast<std::size_t>(y) * width + x];
    }
};

struct RealGrid {
    int width = 0;
    int height = 0;
    std::vector<double> values;

    RealGrid() = default;
    RealGrid(int w, int h)
        : width(w), height(h), values(static_cast<std::size_t>(w) * h) {}

    double& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
    double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
};

/// The full kernel bank, kernels ordered scale-major: index = nu * n_orientations + mu.
struct GaborBank {
    GaborParams params;
    std::vector<ComplexGrid> kernels;

    const ComplexGrid& kernel(int nu, int mu) const {
        return kernels[static_cast<std::size_t>(nu) * params.n_orientations + mu];
    }
};

/// Magnitude responses of one image under a bank, same ordering as the bank.
struct ResponseStack {
    int n_scales = 0;
    int n_orientations = 0;
    std::vector<RealGrid> responses;

    const RealGrid& response(int nu, int mu) const {
        return responses[static_cast<std::size_t>(nu) * n_orientations + mu];
    }
};

/// Evaluates one kernel on the kernel_size x kernel_size lattice centered at
/// the origin. The analytic DC term exp(-sigma^2/2) cancels the continuous
/// integral only; the residual lattice mean is subtracted afterwards so the
/// discrete entry sum is exactly zero at every scale (coarse scales truncate
/// the envelope hard enough to leave a large residual otherwise).
ComplexGrid make_kernel(int mu, int nu, const GaborParams& p);

GaborBank make_bank(const GaborParams& p);

/// Linear (zero-padded, non-circular) convolution via the FFT, cropped to the
/// image size with the kernel center aligned on each pixel.
ComplexGrid convolve_fft(const Image& img, const ComplexGrid& kernel);

/// |convolve_fft| against every kernel of the bank.
ResponseStack magnitude_responses(const Image& img, const GaborBank& bank);

/// Precomputes kernel spectra for a fixed image geometry; responses() then
/// costs one forward and bank_size inverse transforms per image. Safe to call
/// responses() from several threads at once.
class ConvolutionEngine {
public:
    ConvolutionEngine(const GaborBank& bank, int img_w, int img_h);
    ~ConvolutionEngine();
    ConvolutionEngine(const ConvolutionEngine&) = delete;
    ConvolutionEngine& operator=(const ConvolutionEngine&) = delete;

    ResponseStack responses(const Image& img) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Writes each response as a min-max normalized 8-bit PGM: response_s<nu>_o<mu>.pgm.
void dump_responses(const ResponseStack& stack, const std::filesystem::path& dir);

} // namespace ihif
