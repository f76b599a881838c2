#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "rsa/tensor.hpp"

namespace rsa::oracle {

inline ImageTensor random_image(const Shape& s, std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
    std::uniform_real_distribution<double> d(lo, hi);
    ImageTensor x(s);
    for (double& v : x.values()) v = d(rng);
    return x;
}

inline GeneralizedKernel random_generalized(std::size_t size, std::mt19937_64& rng) {
    std::normal_distribution<double> d(0.0, 1.0);
    GeneralizedKernel k(size);
    for (double& v : k.values()) v = d(rng);
    return k;
}

inline BlurKernel random_blur(std::size_t size, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> d(0.0, 1.0);
    GeneralizedKernel k(size);
    for (double& v : k.values()) v = d(rng);
    return BlurKernel::normalized(std::move(k));
}

/// Direct double sum of the forward DFT, one channel at a time.
inline SpectrumTensor naive_dft(const ImageTensor& x, bool inverse = false) {
    const std::size_t a = x.height(), b = x.width();
    SpectrumTensor out(x.shape());
    const double sign = inverse ? 1.0 : -1.0;
    for (std::size_t c = 0; c < x.channels(); ++c) {
        for (std::size_t w = 0; w < a; ++w) {
            for (std::size_t h = 0; h < b; ++h) {
                std::complex<double> acc = 0.0;
                for (std::size_t u = 0; u < a; ++u) {
                    for (std::size_t v = 0; v < b; ++v) {
                        const double phase = sign * 2.0 * std::numbers::pi *
                                             (static_cast<double>((u * w) % a) / static_cast<double>(a) +
                                              static_cast<double>((v * h) % b) / static_cast<double>(b));
                        acc += x(c, u, v) * std::polar(1.0, phase);
                    }
                }
                out(c, w, h) = acc;
            }
        }
    }
    return out;
}

inline SpectrumTensor naive_idft_complex(const SpectrumTensor& X) {
    const std::size_t a = X.height(), b = X.width();
    SpectrumTensor out(X.shape());
    for (std::size_t c = 0; c < X.channels(); ++c) {
        for (std::size_t w = 0; w < a; ++w) {
            for (std::size_t h = 0; h < b; ++h) {
                std::complex<double> acc = 0.0;
                for (std::size_t u = 0; u < a; ++u) {
                    for (std::size_t v = 0; v < b; ++v) {
                        const double phase = 2.0 * std::numbers::pi *
                                             (static_cast<double>((u * w) % a) / static_cast<double>(a) +
                                              static_cast<double>((v * h) % b) / static_cast<double>(b));
                        acc += X(c, u, v) * std::polar(1.0, phase);
                    }
                }
                out(c, w, h) = acc / static_cast<double>(a * b);
            }
        }
    }
    return out;
}

/// Quadruple loop periodic convolution written from the definition.
inline ImageTensor naive_convolve(const GeneralizedKernel& k, const ImageTensor& x) {
    ImageTensor out(x.shape());
    const int r = k.radius();
    const auto a = static_cast<long long>(x.height()), b = static_cast<long long>(x.width());
    for (std::size_t c = 0; c < x.channels(); ++c) {
        for (long long w = 0; w < a; ++w) {
            for (long long h = 0; h < b; ++h) {
                double acc = 0.0;
                for (int u = -r; u <= r; ++u) {
                    for (int v = -r; v <= r; ++v) {
                        const long long ww = (((w - u) % a) + a) % a;
                        const long long hh = (((h - v) % b) + b) % b;
                        acc += k.at(u, v) * x(c, static_cast<std::size_t>(ww), static_cast<std::size_t>(hh));
                    }
                }
                out(c, static_cast<std::size_t>(w), static_cast<std::size_t>(h)) = acc;
            }
        }
    }
    return out;
}

inline double max_abs_diff(const ImageTensor& a, const ImageTensor& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
    return m;
}

inline double max_abs(const ImageTensor& a) {
    double m = 0.0;
    for (double v : a.values()) m = std::max(m, std::abs(v));
    return m;
}

inline double max_abs_diff(const SpectrumTensor& a, const SpectrumTensor& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
    return m;
}

inline double max_abs(const SpectrumTensor& a) {
    double m = 0.0;
    for (auto v : a.values()) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace rsa::oracle
