#pragma once

#include <cstddef>
#include <string>

#include "rsa/fft.hpp"
#include "rsa/tensor.hpp"

namespace rsa {

enum class Direction { h, v };

namespace detail {

inline std::size_t wrap(long long i, std::size_t n) noexcept {
    const auto m = static_cast<long long>(n);
    long long r = i % m;
    if (r < 0) r += m;
    return static_cast<std::size_t>(r);
}

inline void check_kernel_fits(const GeneralizedKernel& k, const Shape& target) {
    if (k.size() > std::min(target.height, target.width)) {
        throw ShapeError("kernel size " + std::to_string(k.size()) + " exceeds image plane " +
                         std::to_string(target.height) + "x" + std::to_string(target.width));
    }
}

}  // namespace detail

/// Wrap-around placement of a centered kernel onto a C x a x b grid: offset (u, v)
/// lands at (u mod a, v mod b), replicated across every channel.
inline ImageTensor pad_kernel(const GeneralizedKernel& k, const Shape& target) {
    detail::check_kernel_fits(k, target);
    ImageTensor out(target);
    const int r = k.radius();
    for (std::size_t c = 0; c < target.channels; ++c) {
        for (int u = -r; u <= r; ++u) {
            for (int v = -r; v <= r; ++v) {
                out(c, detail::wrap(u, target.height), detail::wrap(v, target.width)) = k.at(u, v);
            }
        }
    }
    return out;
}

/// Single-channel spectrum of the padded kernel on an a x b plane. Every channel of
/// dft2(pad_kernel(k, C x a x b)) equals this plane.
inline SpectrumTensor kernel_spectrum(const GeneralizedKernel& k, std::size_t height, std::size_t width) {
    return dft2(pad_kernel(k, Shape{1, height, width}));
}

/// Periodic convolution evaluated directly in the spatial domain:
/// out(c,w,h) = sum_{u,v} k(u,v) x(c, (w-u) mod a, (h-v) mod b).
inline ImageTensor periodic_convolve(const GeneralizedKernel& k, const ImageTensor& x) {
    detail::check_kernel_fits(k, x.shape());
    ImageTensor out(x.shape());
    const int r = k.radius();
    const std::size_t a = x.height();
    const std::size_t b = x.width();
    for (std::size_t c = 0; c < x.channels(); ++c) {
        for (int u = -r; u <= r; ++u) {
            for (int v = -r; v <= r; ++v) {
                const double kv = k.at(u, v);
                if (kv == 0.0) continue;
                for (std::size_t w = 0; w < a; ++w) {
                    const std::size_t sw = detail::wrap(static_cast<long long>(w) - u, a);
                    for (std::size_t h = 0; h < b; ++h) {
                        const std::size_t sh = detail::wrap(static_cast<long long>(h) - v, b);
                        out(c, w, h) += kv * x(c, sw, sh);
                    }
                }
            }
        }
    }
    return out;
}

/// Same operator through the convolution theorem: F^-1(F(pad(k)) . F(x)).
inline ImageTensor periodic_convolve_fft(const GeneralizedKernel& k, const ImageTensor& x) {
    detail::check_kernel_fits(k, x.shape());
    const SpectrumTensor ks = kernel_spectrum(k, x.height(), x.width());
    SpectrumTensor xs = dft2(x);
    for (std::size_t c = 0; c < x.channels(); ++c) {
        auto plane = xs.channel(c);
        for (std::size_t i = 0; i < plane.size(); ++i) plane[i] *= ks.values()[i];
    }
    return idft2(xs);
}

/// Difference filter G_h = [1, -1] (or its transpose G_v) embedded in a 3 x 3 grid:
/// taps at (0,0) = 1 and (0,1) = -1 for h, (0,0) = 1 and (1,0) = -1 for v.
inline GeneralizedKernel difference_filter(Direction d) {
    GeneralizedKernel g(3);
    g.at(0, 0) = 1.0;
    if (d == Direction::h) {
        g.at(0, 1) = -1.0;
    } else {
        g.at(1, 0) = -1.0;
    }
    return g;
}

/// Circular finite difference: x(c,w,h) - x(c,w,h-1) for h, x(c,w,h) - x(c,w-1,h) for v.
/// Equal to periodic_convolve(difference_filter(d), x), computed without the generic loop.
inline ImageTensor gradient(const ImageTensor& x, Direction d) {
    ImageTensor out(x.shape());
    const std::size_t a = x.height();
    const std::size_t b = x.width();
    for (std::size_t c = 0; c < x.channels(); ++c) {
        for (std::size_t w = 0; w < a; ++w) {
            for (std::size_t h = 0; h < b; ++h) {
                const double prev = d == Direction::h ? x(c, w, (h + b - 1) % b) : x(c, (w + a - 1) % a, h);
                out(c, w, h) = x(c, w, h) - prev;
            }
        }
    }
    return out;
}

/// Adjoint of gradient(): (G^T g)(c,w,h) = g(c,w,h) - g(c,w,h+1) (resp. w+1).
inline ImageTensor gradient_adjoint(const ImageTensor& g, Direction d) {
    ImageTensor out(g.shape());
    const std::size_t a = g.height();
    const std::size_t b = g.width();
    for (std::size_t c = 0; c < g.channels(); ++c) {
        for (std::size_t w = 0; w < a; ++w) {
            for (std::size_t h = 0; h < b; ++h) {
                const double next = d == Direction::h ? g(c, w, (h + 1) % b) : g(c, (w + 1) % a, h);
                out(c, w, h) = g(c, w, h) - next;
            }
        }
    }
    return out;
}

}  // namespace rsa
