#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "rsa/config.hpp"
#include "rsa/kernel_estimation.hpp"
#include "rsa/parallel.hpp"
#include "rsa/solvers.hpp"
#include "rsa/tensor.hpp"

namespace rsa {

/// Isotropic Gaussian sampled at integer offsets and normalized to unit mass.
inline BlurKernel init_gaussian_kernel(std::size_t size, double sigma) {
    if (!(sigma > 0.0)) throw Error("Gaussian kernel sigma must be positive");
    GeneralizedKernel k(size);
    const int r = k.radius();
    for (int u = -r; u <= r; ++u) {
        for (int v = -r; v <= r; ++v) k.at(u, v) = std::exp(-(u * u + v * v) / (2.0 * sigma * sigma));
    }
    return BlurKernel::normalized(std::move(k));
}

inline double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ShapeError("cosine similarity needs equal lengths");
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

inline double cosine_similarity(const BlurKernel& a, const BlurKernel& b) {
    return cosine_similarity(a.values(), b.values());
}

struct XkIteration {
    int iteration = 0;
    double min_similarity = std::numeric_limits<double>::quiet_NaN();  // undefined at the first iteration
    double objective = 0.0;  // joint penalized objective of x_hat under the kernels it was solved with
};

struct XkResult {
    std::vector<BlurKernel> kernels;
    ImageTensor x_hat;
    std::vector<ImageTensor> deconvolved;
    std::vector<XkIteration> log;

    [[nodiscard]] int iterations() const noexcept { return static_cast<int>(log.size()); }
};

class FrameError : public Error {
public:
    FrameError(std::size_t frame, const std::string& what)
        : Error("frame " + std::to_string(frame) + ": " + what), frame_(frame) {}
    [[nodiscard]] std::size_t frame() const noexcept { return frame_; }

private:
    std::size_t frame_;
};

/// Per-frame penalized deconvolution with a known kernel (single-frame X-step).
inline ImageTensor deconvolve_frame(const ImageTensor& y, const BlurKernel& k, const PipelineConfig& cfg) {
    return solve_penalized_ls(std::span<const ImageTensor>(&y, 1), std::span<const BlurKernel>(&k, 1),
                              cfg.schedule(cfg.lambda1_single), y);
}

/// Alternates the joint image estimate and per-frame kernel estimates, stopping once
/// every kernel's cosine similarity to its previous iterate reaches tau, then
/// deconvolves each frame individually with its final kernel.
inline XkResult run_xk(std::span<const ImageTensor> frames, const PipelineConfig& cfg) {
    cfg.validate();
    if (frames.size() < 2) throw Error("the XK procedure needs at least two frames");
    for (const auto& f : frames) require_same_shape(frames.front().shape(), f.shape(), "frames");

    const std::size_t n = frames.size();
    XkResult result;
    result.kernels.assign(n, init_gaussian_kernel(cfg.kernel_size, cfg.init_sigma()));
    const HqsSchedule joint = cfg.schedule(cfg.lambda1_joint);

    for (int t = 1; t <= cfg.outer_iters; ++t) {
        result.x_hat = solve_penalized_ls(frames, result.kernels, joint, frames.front());

        std::vector<BlurKernel> next(n);
        parallel_for(n, [&](std::size_t i) {
            try {
                next[i] = estimate_kernel(frames[i], result.x_hat, cfg.mu, cfg.kernel_size);
            } catch (const Error& e) {
                throw FrameError(i, e.what());
            }
        });

        XkIteration entry;
        entry.iteration = t;
        if (t > 1) {
            entry.min_similarity = 1.0;
            for (std::size_t i = 0; i < n; ++i) {
                entry.min_similarity = std::min(entry.min_similarity, cosine_similarity(next[i], result.kernels[i]));
            }
        }
        entry.objective = penalized_objective(frames, result.kernels, result.x_hat, cfg.lambda1_joint, cfg.alpha);
        result.kernels = std::move(next);
        result.log.push_back(entry);
        if (t > 1 && entry.min_similarity >= cfg.tau) break;
    }

    result.deconvolved.resize(n);
    parallel_for(n, [&](std::size_t i) {
        try {
            result.deconvolved[i] = deconvolve_frame(frames[i], result.kernels[i], cfg);
        } catch (const Error& e) {
            throw FrameError(i, e.what());
        }
    });
    return result;
}

}  // namespace rsa
