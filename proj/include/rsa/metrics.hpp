#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "rsa/tensor.hpp"

namespace rsa {

/// Peak value of intensities rescaled to [0,1].
inline constexpr double kPeak = 1.0;

/// 10 log10(peak^2 / MSE) over all C a b entries; +infinity for identical images.
inline double psnr(const ImageTensor& target, const ImageTensor& reference) {
    require_same_shape(target.shape(), reference.shape(), "psnr");
    const double mse = squared_distance(target, reference) / static_cast<double>(target.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(kPeak * kPeak / mse);
}

struct SsimParams {
    std::size_t window = 11;
    double sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
    double dynamic_range = 1.0;
};

namespace detail {

inline std::vector<double> gaussian_window(const SsimParams& p) {
    std::vector<double> w(p.window * p.window);
    const double c = (static_cast<double>(p.window) - 1.0) / 2.0;
    double total = 0.0;
    for (std::size_t i = 0; i < p.window; ++i) {
        for (std::size_t j = 0; j < p.window; ++j) {
            const double di = static_cast<double>(i) - c;
            const double dj = static_cast<double>(j) - c;
            const double v = std::exp(-(di * di + dj * dj) / (2.0 * p.sigma * p.sigma));
            w[i * p.window + j] = v;
            total += v;
        }
    }
    for (double& v : w) v /= total;
    return w;
}

}  // namespace detail

/// Mean local SSIM over every full window position, averaged over channels.
inline double ssim(const ImageTensor& target, const ImageTensor& reference, const SsimParams& p = {}) {
    require_same_shape(target.shape(), reference.shape(), "ssim");
    if (target.height() < p.window || target.width() < p.window) {
        throw ShapeError("ssim needs images of at least " + std::to_string(p.window) + "x" +
                         std::to_string(p.window) + ", got " + to_string(target.shape()));
    }
    const auto window = detail::gaussian_window(p);
    const double c1 = (p.k1 * p.dynamic_range) * (p.k1 * p.dynamic_range);
    const double c2 = (p.k2 * p.dynamic_range) * (p.k2 * p.dynamic_range);
    const std::size_t rows = target.height() - p.window + 1;
    const std::size_t cols = target.width() - p.window + 1;

    double channel_sum = 0.0;
    for (std::size_t c = 0; c < target.channels(); ++c) {
        double acc = 0.0;
        for (std::size_t w0 = 0; w0 < rows; ++w0) {
            for (std::size_t h0 = 0; h0 < cols; ++h0) {
                double mx = 0.0, my = 0.0, exx = 0.0, eyy = 0.0, exy = 0.0;
                for (std::size_t i = 0; i < p.window; ++i) {
                    for (std::size_t j = 0; j < p.window; ++j) {
                        const double g = window[i * p.window + j];
                        const double x = target(c, w0 + i, h0 + j);
                        const double y = reference(c, w0 + i, h0 + j);
                        mx += g * x;
                        my += g * y;
                        exx += g * (x * x);
                        eyy += g * (y * y);
                        exy += g * (x * y);
                    }
                }
                const double vx = exx - mx * mx;
                const double vy = eyy - my * my;
                const double cxy = exy - mx * my;
                acc += ((2.0 * mx * my + c1) * (2.0 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
            }
        }
        channel_sum += acc / static_cast<double>(rows * cols);
    }
    return channel_sum / static_cast<double>(target.channels());
}

struct QualityReport {
    double psnr_db = 0.0;
    double ssim = 0.0;
    std::string reference_id;
    std::string target_id;
};

inline QualityReport assess(const ImageTensor& target, const ImageTensor& reference, std::string target_id = {},
                            std::string reference_id = {}) {
    return {psnr(target, reference), ssim(target, reference), std::move(reference_id), std::move(target_id)};
}

}  // namespace rsa
