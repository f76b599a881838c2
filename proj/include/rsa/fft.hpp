#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <numbers>
#include <span>
#include <vector>

#include "rsa/tensor.hpp"

namespace rsa {

namespace detail {

using cplx = std::complex<double>;

inline bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

/// In-place 1-D transform of fixed length: iterative radix-2 for powers of two,
/// Bluestein's chirp-z (through a power-of-two convolution) otherwise.
/// Forward sign is exp(-2*pi*i*k*n/N); the inverse is unnormalized.
class FftPlan {
public:
    explicit FftPlan(std::size_t n) : n_(n) {
        if (is_power_of_two(n_)) {
            build_radix2(n_, twiddle_, bitrev_);
            return;
        }
        m_ = 1;
        while (m_ < 2 * n_ - 1) m_ <<= 1;
        build_radix2(m_, twiddle_, bitrev_);
        chirp_.resize(n_);
        for (std::size_t k = 0; k < n_; ++k) {
            // k^2 mod 2n keeps the angle argument small for large k.
            const auto k2 = static_cast<double>((k * k) % (2 * n_));
            const double angle = std::numbers::pi * k2 / static_cast<double>(n_);
            chirp_[k] = cplx(std::cos(angle), -std::sin(angle));
        }
        chirp_fft_.assign(m_, cplx{});
        chirp_fft_[0] = std::conj(chirp_[0]);
        for (std::size_t k = 1; k < n_; ++k) {
            chirp_fft_[k] = std::conj(chirp_[k]);
            chirp_fft_[m_ - k] = std::conj(chirp_[k]);
        }
        radix2(chirp_fft_, false);
    }

    [[nodiscard]] std::size_t size() const noexcept { return n_; }

    void execute(std::span<cplx> data, bool inverse) const {
        if (m_ == 0) {
            radix2(data, inverse);
            return;
        }
        // Inverse via conjugation symmetry: conj(F(conj(x))).
        std::vector<cplx> work(m_, cplx{});
        for (std::size_t k = 0; k < n_; ++k) {
            const cplx x = inverse ? std::conj(data[k]) : data[k];
            work[k] = x * chirp_[k];
        }
        radix2(work, false);
        for (std::size_t k = 0; k < m_; ++k) work[k] *= chirp_fft_[k];
        radix2(work, true);
        const double scale = 1.0 / static_cast<double>(m_);
        for (std::size_t k = 0; k < n_; ++k) {
            const cplx y = work[k] * scale * chirp_[k];
            data[k] = inverse ? std::conj(y) : y;
        }
    }

private:
    static void build_radix2(std::size_t n, std::vector<cplx>& twiddle, std::vector<std::size_t>& bitrev) {
        twiddle.resize(n / 2);
        for (std::size_t k = 0; k < n / 2; ++k) {
            const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
            twiddle[k] = cplx(std::cos(angle), std::sin(angle));
        }
        bitrev.resize(n);
        std::size_t bits = 0;
        while ((std::size_t{1} << bits) < n) ++bits;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t r = 0;
            for (std::size_t b = 0; b < bits; ++b) r |= ((i >> b) & 1U) << (bits - 1 - b);
            bitrev[i] = r;
        }
    }

    void radix2(std::span<cplx> a, bool inverse) const {
        const std::size_t n = a.size();
        for (std::size_t i = 0; i < n; ++i) {
            if (i < bitrev_[i]) std::swap(a[i], a[bitrev_[i]]);
        }
        for (std::size_t len = 2; len <= n; len <<= 1) {
            const std::size_t half = len / 2;
            const std::size_t stride = n / len;
            for (std::size_t start = 0; start < n; start += len) {
                for (std::size_t k = 0; k < half; ++k) {
                    cplx w = twiddle_[k * stride];
                    if (inverse) w = std::conj(w);
                    const cplx t = w * a[start + k + half];
                    a[start + k + half] = a[start + k] - t;
                    a[start + k] += t;
                }
            }
        }
    }

    std::size_t n_ = 0;
    std::size_t m_ = 0;  // Bluestein padded length; 0 for the direct radix-2 path
    std::vector<cplx> twiddle_;
    std::vector<std::size_t> bitrev_;
    std::vector<cplx> chirp_;
    std::vector<cplx> chirp_fft_;
};

inline const FftPlan& plan_for(std::size_t n) {
    thread_local std::map<std::size_t, std::unique_ptr<FftPlan>> cache;
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<FftPlan>(n);
    return *slot;
}

/// 2-D transform of one a x b plane in place (rows, then columns).
inline void transform_plane(std::span<cplx> plane, std::size_t a, std::size_t b, bool inverse) {
    const FftPlan& row_plan = plan_for(b);
    for (std::size_t w = 0; w < a; ++w) row_plan.execute(plane.subspan(w * b, b), inverse);
    const FftPlan& col_plan = plan_for(a);
    std::vector<cplx> column(a);
    for (std::size_t h = 0; h < b; ++h) {
        for (std::size_t w = 0; w < a; ++w) column[w] = plane[w * b + h];
        col_plan.execute(column, inverse);
        for (std::size_t w = 0; w < a; ++w) plane[w * b + h] = column[w];
    }
}

}  // namespace detail

/// Channel-wise unnormalized 2-D DFT:
/// X(c,w,h) = sum_{u,v} x(c,u,v) exp[-2 pi i (u w / a + v h / b)].
inline SpectrumTensor dft2(const ImageTensor& x) {
    SpectrumTensor out(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) out.values()[i] = x.values()[i];
    for (std::size_t c = 0; c < x.channels(); ++c) {
        detail::transform_plane(out.channel(c), x.height(), x.width(), false);
    }
    return out;
}

/// Inverse 2-D DFT with the 1/(ab) factor, complex result.
inline SpectrumTensor idft2_complex(const SpectrumTensor& spectrum) {
    SpectrumTensor out = spectrum;
    const double scale = 1.0 / static_cast<double>(spectrum.height() * spectrum.width());
    for (std::size_t c = 0; c < spectrum.channels(); ++c) {
        detail::transform_plane(out.channel(c), spectrum.height(), spectrum.width(), true);
    }
    for (auto& v : out.values()) v *= scale;
    return out;
}

struct InverseResult {
    ImageTensor image;
    double max_imaginary = 0.0;
    [[nodiscard]] bool residue_reported() const noexcept { return max_imaginary > 1e-8; }
};

/// Inverse DFT that keeps the real part and reports the largest discarded imaginary magnitude.
inline InverseResult idft2_checked(const SpectrumTensor& spectrum) {
    const SpectrumTensor complex_out = idft2_complex(spectrum);
    InverseResult result{ImageTensor(spectrum.shape()), 0.0};
    for (std::size_t i = 0; i < complex_out.size(); ++i) {
        result.image.values()[i] = complex_out.values()[i].real();
        result.max_imaginary = std::max(result.max_imaginary, std::abs(complex_out.values()[i].imag()));
    }
    return result;
}

enum class SymmetryMode { lenient, strict };

/// Inverse of dft2. In strict mode an imaginary residue above 1e-8 throws SymmetryViolation.
inline ImageTensor idft2(const SpectrumTensor& spectrum, SymmetryMode mode = SymmetryMode::lenient) {
    InverseResult r = idft2_checked(spectrum);
    if (mode == SymmetryMode::strict && r.residue_reported()) {
        throw SymmetryViolation("inverse DFT imaginary residue " + std::to_string(r.max_imaginary) +
                                " exceeds 1e-8");
    }
    return std::move(r.image);
}

}  // namespace rsa
