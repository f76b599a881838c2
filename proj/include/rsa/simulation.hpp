#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "rsa/convolution.hpp"
#include "rsa/parallel.hpp"
#include "rsa/tensor.hpp"

namespace rsa {

/// SplitMix64 (Steele, Lea & Flood): 64-bit state, fully specified output function,
/// identical streams on every platform. Gaussian draws use Box-Muller.
class SplitMix64 {
public:
    static constexpr const char* kName = "splitmix64+box-muller";

    explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next() noexcept {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    /// Independent substream for (seed, index) so per-frame work can run in any order.
    static SplitMix64 substream(std::uint64_t seed, std::uint64_t index) noexcept {
        SplitMix64 mixer(seed ^ (0xD1B54A32D192ED03ULL * (index + 1)));
        return SplitMix64(mixer.next());
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

enum class KernelFamily { oriented_line, oriented_sparse };

inline std::string to_string(KernelFamily f) {
    return f == KernelFamily::oriented_line ? "oriented-line" : "oriented-sparse";
}

inline KernelFamily parse_kernel_family(const std::string& s) {
    if (s == "oriented-line") return KernelFamily::oriented_line;
    if (s == "oriented-sparse") return KernelFamily::oriented_sparse;
    throw Error("unknown kernel family '" + s + "'");
}

struct SimulationSpec {
    ImageTensor source;
    std::size_t n_angles = 36;
    std::size_t kernel_size = 25;
    double noise_sigma = 0.05;
    KernelFamily kernel_family = KernelFamily::oriented_line;
    std::uint64_t seed = 0;
};

/// Antialiased line segment of length 0.8 s through the kernel centre at angle theta
/// (radians, 0 = horizontal), normalized to unit mass. The segment is sampled densely
/// and each sample is splatted bilinearly.
inline BlurKernel line_kernel(std::size_t size, double theta) {
    GeneralizedKernel k(size);
    const int r = k.radius();
    const double length = 0.8 * static_cast<double>(size);
    const auto samples = static_cast<long long>(std::ceil(length * 32.0)) | 1LL;  // odd: includes the centre
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    for (long long m = 0; m < samples; ++m) {
        // Integer numerator keeps sample m and its mirror exact negatives of each other.
        const double t = length * static_cast<double>(2 * m - (samples - 1)) / (2.0 * static_cast<double>(samples - 1));
        const double row = t * s;
        const double col = t * c;
        const double r0 = std::floor(row);
        const double c0 = std::floor(col);
        const double fr = row - r0;
        const double fc = col - c0;
        const double weights[2][2] = {{(1 - fr) * (1 - fc), (1 - fr) * fc}, {fr * (1 - fc), fr * fc}};
        for (int dr = 0; dr < 2; ++dr) {
            for (int dc = 0; dc < 2; ++dc) {
                const int u = static_cast<int>(r0) + dr;
                const int v = static_cast<int>(c0) + dc;
                if (u < -r || u > r || v < -r || v > r) continue;
                k.at(u, v) += weights[dr][dc];
            }
        }
    }
    return BlurKernel::normalized(std::move(k));
}

/// Line kernel plus a few seeded speckles of light, renormalized.
inline BlurKernel sparse_kernel(std::size_t size, double theta, SplitMix64& rng) {
    GeneralizedKernel k = line_kernel(size, theta).generalized();
    double peak = 0.0;
    for (double v : k.values()) peak = std::max(peak, v);
    const int r = k.radius();
    const std::size_t speckles = std::max<std::size_t>(1, size / 3);
    for (std::size_t i = 0; i < speckles; ++i) {
        const int u = static_cast<int>(rng.next() % size) - r;
        const int v = static_cast<int>(rng.next() % size) - r;
        k.at(u, v) += 0.5 * peak * rng.uniform();
    }
    return BlurKernel::normalized(std::move(k));
}

/// PSF i sits at angle i * 180 / n degrees.
inline std::vector<BlurKernel> simulate_psfs(const SimulationSpec& spec) {
    if (spec.n_angles == 0) throw Error("at least one angle is required");
    std::vector<BlurKernel> out;
    out.reserve(spec.n_angles);
    for (std::size_t i = 0; i < spec.n_angles; ++i) {
        const double theta = std::numbers::pi * static_cast<double>(i) / static_cast<double>(spec.n_angles);
        if (spec.kernel_family == KernelFamily::oriented_line) {
            out.push_back(line_kernel(spec.kernel_size, theta));
        } else {
            SplitMix64 rng = SplitMix64::substream(spec.seed ^ 0x6B65726E656CULL, i);
            out.push_back(sparse_kernel(spec.kernel_size, theta, rng));
        }
    }
    return out;
}

struct BlurredDataset {
    std::vector<BlurKernel> kernels;
    std::vector<ImageTensor> frames;     // k_i * x + n_i (not clamped)
    std::vector<ImageTensor> convolved;  // k_i * x
};

/// Blurs the source with every PSF and adds i.i.d. Gaussian noise drawn from a
/// per-frame substream of the seed.
inline BlurredDataset blur_dataset(const SimulationSpec& spec) {
    for (double v : spec.source.values()) {
        if (!(v >= 0.0 && v <= 1.0)) throw Error("simulation source must lie in [0, 1]");
    }
    BlurredDataset ds;
    ds.kernels = simulate_psfs(spec);
    const std::size_t n = ds.kernels.size();
    ds.frames.resize(n);
    ds.convolved.resize(n);
    parallel_for(n, [&](std::size_t i) {
        ds.convolved[i] = periodic_convolve(ds.kernels[i], spec.source);
        ImageTensor y = ds.convolved[i];
        if (spec.noise_sigma > 0.0) {
            SplitMix64 rng = SplitMix64::substream(spec.seed, i);
            for (double& v : y.values()) v += spec.noise_sigma * rng.normal();
        }
        ds.frames[i] = std::move(y);
    });
    return ds;
}

/// Deterministic RGB test scene with flat regions, sharp edges at several
/// orientations, smooth shading and a fine periodic texture.
inline ImageTensor synthetic_target(std::size_t size) {
    if (size < 16) throw ShapeError("synthetic target needs at least 16 x 16 pixels");
    ImageTensor x(Shape{3, size, size});
    const double n = static_cast<double>(size);
    for (std::size_t w = 0; w < size; ++w) {
        for (std::size_t h = 0; h < size; ++h) {
            const double yy = (static_cast<double>(w) + 0.5) / n;
            const double xx = (static_cast<double>(h) + 0.5) / n;
            double rgb[3] = {0.25 + 0.35 * xx, 0.30 + 0.25 * yy, 0.55 - 0.25 * xx};
            auto paint = [&](double r, double g, double b) {
                rgb[0] = r;
                rgb[1] = g;
                rgb[2] = b;
            };
            // disc
            if ((xx - 0.30) * (xx - 0.30) + (yy - 0.32) * (yy - 0.32) < 0.04) paint(0.85, 0.70, 0.20);
            // tilted bar
            const double along = 0.8 * (xx - 0.65) + 0.6 * (yy - 0.30);
            const double across = -0.6 * (xx - 0.65) + 0.8 * (yy - 0.30);
            if (std::abs(along) < 0.22 && std::abs(across) < 0.06) paint(0.15, 0.25, 0.75);
            // square with a hole
            if (xx > 0.12 && xx < 0.45 && yy > 0.60 && yy < 0.90 && !(xx > 0.22 && xx < 0.35 && yy > 0.70 && yy < 0.80)) {
                paint(0.80, 0.20, 0.25);
            }
            // striped patch
            if (xx > 0.58 && xx < 0.90 && yy > 0.58 && yy < 0.90) {
                const double stripe = std::sin(2.0 * std::numbers::pi * (xx + yy) * n / 8.0);
                const double v = 0.5 + 0.35 * stripe;
                paint(v, 0.9 * v, 0.3 + 0.4 * v);
            }
            // thin diagonal line
            if (std::abs(xx - yy - 0.05) < 0.6 / n && xx < 0.5) paint(0.95, 0.95, 0.90);
            for (std::size_t c = 0; c < 3; ++c) x(c, w, h) = rgb[c];
        }
    }
    return x;
}

/// Seeded random scene of overlapping discs, rectangles and bars on a shaded
/// background. Used to pick tuning parameters away from the evaluation target.
inline ImageTensor random_scene(std::size_t size, std::uint64_t seed, std::size_t shapes = 10) {
    if (size < 16) throw ShapeError("random scene needs at least 16 x 16 pixels");
    SplitMix64 rng(seed);
    ImageTensor x(Shape{3, size, size});
    double base[3], slope[3];
    for (int c = 0; c < 3; ++c) {
        base[c] = 0.2 + 0.4 * rng.uniform();
        slope[c] = 0.3 * (rng.uniform() - 0.5);
    }
    const double n = static_cast<double>(size);
    for (std::size_t w = 0; w < size; ++w) {
        for (std::size_t h = 0; h < size; ++h) {
            const double t = (static_cast<double>(w) + static_cast<double>(h)) / (2.0 * n);
            for (std::size_t c = 0; c < 3; ++c) x(c, w, h) = base[c] + slope[c] * t;
        }
    }
    for (std::size_t s = 0; s < shapes; ++s) {
        const int kind = static_cast<int>(rng.next() % 3);
        const double cy = rng.uniform(), cx = rng.uniform();
        const double r = 0.05 + 0.15 * rng.uniform();
        const double angle = std::numbers::pi * rng.uniform();
        const double ca = std::cos(angle), sa = std::sin(angle);
        double rgb[3];
        for (double& v : rgb) v = 0.05 + 0.9 * rng.uniform();
        for (std::size_t w = 0; w < size; ++w) {
            for (std::size_t h = 0; h < size; ++h) {
                const double yy = (static_cast<double>(w) + 0.5) / n - cy;
                const double xx = (static_cast<double>(h) + 0.5) / n - cx;
                const double along = ca * xx + sa * yy;
                const double across = -sa * xx + ca * yy;
                bool inside = false;
                if (kind == 0) inside = xx * xx + yy * yy < r * r;
                if (kind == 1) inside = std::abs(along) < r && std::abs(across) < 0.6 * r;
                if (kind == 2) inside = std::abs(along) < 1.5 * r && std::abs(across) < 0.12 * r + 0.6 / n;
                if (inside) {
                    for (std::size_t c = 0; c < 3; ++c) x(c, w, h) = rgb[c];
                }
            }
        }
    }
    return clamp01(x);
}

}  // namespace rsa
