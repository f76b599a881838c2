#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rsa/convolution.hpp"
#include "rsa/fft.hpp"
#include "rsa/tensor.hpp"

namespace rsa {

class SingularSpectrum : public Error {
public:
    using Error::Error;
};

/// Value the auxiliary gradients restart from at each beta stage. `zero` is the
/// literal reset; since gamma = 0 is a fixed point of the IRLS step for alpha < 1,
/// `gradient` seeds the stage with the current gradient images instead.
enum class GammaRestart { zero, gradient };

/// Continuation schedule for half-quadratic splitting plus the prior and data weights.
struct HqsSchedule {
    double beta_init = 1.0;
    double beta_max = 1e20;
    double growth = 2.0;
    int inner_iters = 5;
    double epsilon = 1e-9;
    double alpha = 0.8;
    double lambda1 = 667.0;
    GammaRestart restart = GammaRestart::gradient;

    void validate() const {
        if (!(beta_init > 0.0) || !(beta_max > 0.0) || beta_init > beta_max) {
            throw Error("HQS schedule needs 0 < beta_init <= beta_max");
        }
        if (!(growth > 1.0)) throw Error("HQS growth factor must exceed 1");
        if (inner_iters < 1) throw Error("HQS needs at least one inner iteration");
        if (!(epsilon > 0.0)) throw Error("IRLS epsilon must be positive");
        if (!(alpha > 0.0 && alpha <= 2.0)) throw Error("prior exponent alpha must lie in (0, 2]");
        if (!(lambda1 > 0.0)) throw Error("data weight lambda1 must be positive");
    }

    /// Number of beta stages the continuation loop runs (beta <= beta_max, beta *= growth).
    [[nodiscard]] std::size_t stage_count() const {
        std::size_t n = 0;
        for (double beta = beta_init; beta <= beta_max; beta *= growth) ++n;
        return n;
    }
};

struct AuxiliaryPair {
    ImageTensor gamma_h;
    ImageTensor gamma_v;

    static AuxiliaryPair zeros(const Shape& shape) { return {ImageTensor(shape), ImageTensor(shape)}; }
    [[nodiscard]] const ImageTensor& get(Direction d) const { return d == Direction::h ? gamma_h : gamma_v; }
    ImageTensor& get(Direction d) { return d == Direction::h ? gamma_h : gamma_v; }
};

/// Added to every splitting-update denominator.
inline constexpr double kDenominatorGuard = 1e-12;

namespace detail {

using cplx = std::complex<double>;

inline void check_frames(std::span<const ImageTensor> frames, std::size_t n_kernels) {
    if (frames.empty()) throw Error("at least one frame is required");
    if (frames.size() != n_kernels) {
        throw ShapeError("got " + std::to_string(frames.size()) + " frames but " + std::to_string(n_kernels) +
                         " kernels");
    }
    for (const auto& f : frames) require_same_shape(frames.front().shape(), f.shape(), "frame list");
}

/// Frequency-domain sufficient statistics of the data term:
/// kernel_power = sum_i |K_i|^2 (one a x b plane), cross = sum_i conj(K_i) Y_i (C x a x b).
struct DataSpectra {
    Shape shape;
    std::vector<double> kernel_power;
    SpectrumTensor cross;
};

inline DataSpectra data_spectra(std::span<const ImageTensor> frames, std::span<const BlurKernel> kernels) {
    check_frames(frames, kernels.size());
    const Shape shape = frames.front().shape();
    DataSpectra ds{shape, std::vector<double>(shape.plane(), 0.0), SpectrumTensor(shape)};
    // Fixed summation order (frame index ascending) keeps results bit-reproducible.
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const SpectrumTensor ks = kernel_spectrum(kernels[i], shape.height, shape.width);
        const SpectrumTensor ys = dft2(frames[i]);
        for (std::size_t p = 0; p < shape.plane(); ++p) ds.kernel_power[p] += std::norm(ks.values()[p]);
        for (std::size_t c = 0; c < shape.channels; ++c) {
            auto dst = ds.cross.channel(c);
            auto src = ys.channel(c);
            for (std::size_t p = 0; p < shape.plane(); ++p) dst[p] += std::conj(ks.values()[p]) * src[p];
        }
    }
    return ds;
}

struct GradientSpectra {
    SpectrumTensor gh;
    SpectrumTensor gv;
    std::vector<double> power;  // |G_h|^2 + |G_v|^2
};

inline GradientSpectra gradient_spectra(std::size_t a, std::size_t b) {
    GradientSpectra gs{kernel_spectrum(difference_filter(Direction::h), a, b),
                       kernel_spectrum(difference_filter(Direction::v), a, b), std::vector<double>(a * b)};
    for (std::size_t p = 0; p < a * b; ++p) gs.power[p] = std::norm(gs.gh.values()[p]) + std::norm(gs.gv.values()[p]);
    return gs;
}

inline ImageTensor x_update(const DataSpectra& ds, const GradientSpectra& gs, const AuxiliaryPair& aux,
                            double lambda, double beta) {
    const SpectrumTensor fh = dft2(aux.gamma_h);
    const SpectrumTensor fv = dft2(aux.gamma_v);
    SpectrumTensor out(ds.shape);
    const std::size_t plane = ds.shape.plane();
    for (std::size_t c = 0; c < ds.shape.channels; ++c) {
        auto dst = out.channel(c);
        auto cross = ds.cross.channel(c);
        auto ph = fh.channel(c);
        auto pv = fv.channel(c);
        for (std::size_t p = 0; p < plane; ++p) {
            const cplx num = 2.0 * lambda * cross[p] +
                             beta * (std::conj(gs.gh.values()[p]) * ph[p] + std::conj(gs.gv.values()[p]) * pv[p]);
            const double den = 2.0 * lambda * ds.kernel_power[p] + beta * gs.power[p] + kDenominatorGuard;
            dst[p] = num / den;
        }
    }
    return idft2(out);
}

}  // namespace detail

/// Least-squares multi-frame combination
/// F^-1( sum_i conj(K_i) Y_i / (sum_i |K_i|^2 + ridge) ).
/// With ridge = 0 this minimizes sum_i ||y_i - k_i * x||_F^2.
inline ImageTensor multiframe_wiener(std::span<const ImageTensor> frames, std::span<const BlurKernel> kernels,
                                     double ridge = 0.0) {
    if (ridge < 0.0) throw Error("ridge must be nonnegative");
    const auto ds = detail::data_spectra(frames, kernels);
    if (ridge == 0.0) {
        for (double p : ds.kernel_power) {
            if (p < 1e-12) throw SingularSpectrum("kernel spectra vanish jointly; supply a positive ridge");
        }
    }
    SpectrumTensor out(ds.shape);
    for (std::size_t c = 0; c < ds.shape.channels; ++c) {
        auto dst = out.channel(c);
        auto cross = ds.cross.channel(c);
        for (std::size_t p = 0; p < ds.shape.plane(); ++p) dst[p] = cross[p] / (ds.kernel_power[p] + ridge);
    }
    return idft2(out);
}

/// Closed-form minimizer over x of
/// lambda sum_i ||y_i - k_i * x||^2 + beta/2 sum_j ||gamma_j - G_j * x||^2.
inline ImageTensor hqs_x_update(std::span<const ImageTensor> frames, std::span<const BlurKernel> kernels,
                                const AuxiliaryPair& aux, const HqsSchedule& sched, double beta) {
    if (!(beta > 0.0)) throw Error("beta must be positive");
    const auto ds = detail::data_spectra(frames, kernels);
    require_same_shape(ds.shape, aux.gamma_h.shape(), "auxiliary gamma_h");
    require_same_shape(ds.shape, aux.gamma_v.shape(), "auxiliary gamma_v");
    const auto gs = detail::gradient_spectra(ds.shape.height, ds.shape.width);
    return detail::x_update(ds, gs, aux, sched.lambda1, beta);
}

/// One IRLS step for the L_alpha shrinkage subproblem, elementwise:
/// gamma = beta gx / (beta + alpha (gamma_prev^2 + eps)^(alpha/2 - 1)).
inline ImageTensor irls_gamma_update(const ImageTensor& gx, const ImageTensor& gamma_prev, double beta,
                                     const HqsSchedule& sched) {
    require_same_shape(gx.shape(), gamma_prev.shape(), "IRLS update");
    if (!(beta > 0.0)) throw Error("beta must be positive");
    const double exponent = sched.alpha / 2.0 - 1.0;
    ImageTensor out(gx.shape());
    for (std::size_t i = 0; i < gx.size(); ++i) {
        const double g = gamma_prev.values()[i];
        const double weight = sched.alpha * std::pow(g * g + sched.epsilon, exponent);
        out.values()[i] = beta * gx.values()[i] / (beta + weight);
    }
    return out;
}

/// sum_i ||y_i - k_i * x||_F^2
inline double data_misfit(std::span<const ImageTensor> frames, std::span<const BlurKernel> kernels,
                          const ImageTensor& x) {
    detail::check_frames(frames, kernels.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < frames.size(); ++i) {
        acc += squared_distance(frames[i], periodic_convolve_fft(kernels[i], x));
    }
    return acc;
}

/// sum_j ||vec(grad_j x)||_alpha^alpha
inline double gradient_prior(const ImageTensor& x, double alpha) {
    double acc = 0.0;
    for (Direction d : {Direction::h, Direction::v}) {
        for (const auto t = gradient(x, d); double g : t.values()) acc += std::pow(std::abs(g), alpha);
    }
    return acc;
}

/// lambda sum_i ||y_i - k_i * x||^2 + sum_j ||grad_j x||_alpha^alpha
inline double penalized_objective(std::span<const ImageTensor> frames, std::span<const BlurKernel> kernels,
                                  const ImageTensor& x, double lambda, double alpha) {
    return lambda * data_misfit(frames, kernels, x) + gradient_prior(x, alpha);
}

/// Split objective at fixed beta with the prior in its epsilon-smoothed form
/// sum (gamma^2 + eps)^(alpha/2), which is what the IRLS step majorizes.
inline double splitting_objective(std::span<const ImageTensor> frames, std::span<const BlurKernel> kernels,
                                  const ImageTensor& x, const AuxiliaryPair& aux, const HqsSchedule& sched,
                                  double beta) {
    double prior = 0.0;
    double coupling = 0.0;
    for (Direction d : {Direction::h, Direction::v}) {
        const ImageTensor gx = gradient(x, d);
        const ImageTensor& gamma = aux.get(d);
        for (std::size_t i = 0; i < gx.size(); ++i) {
            const double g = gamma.values()[i];
            prior += std::pow(g * g + sched.epsilon, sched.alpha / 2.0);
            const double diff = g - gx.values()[i];
            coupling += diff * diff;
        }
    }
    return sched.lambda1 * data_misfit(frames, kernels, x) + prior + 0.5 * beta * coupling;
}

/// Emitted after every inner iteration when an observer is attached.
struct HqsEvent {
    std::size_t stage;
    int inner;
    double beta;
    const ImageTensor& x;
    const AuxiliaryPair& aux;
};

using HqsObserver = std::function<void(const HqsEvent&)>;

/// Half-quadratic splitting with beta continuation: at each stage run the IRLS
/// gamma update and the closed-form x update `inner_iters` times, then grow beta.
/// Each stage restarts gamma per `sched.restart`: zero is a fixed point of the IRLS
/// update, so the default seeds it with the current gradient instead.
inline ImageTensor solve_penalized_ls(std::span<const ImageTensor> frames, std::span<const BlurKernel> kernels,
                                      const HqsSchedule& sched, const ImageTensor& x0,
                                      const HqsObserver& observer = {}) {
    sched.validate();
    const auto ds = detail::data_spectra(frames, kernels);
    require_same_shape(ds.shape, x0.shape(), "initial image");
    const auto gs = detail::gradient_spectra(ds.shape.height, ds.shape.width);

    ImageTensor x = x0;
    AuxiliaryPair aux = AuxiliaryPair::zeros(ds.shape);
    std::size_t stage = 0;
    for (double beta = sched.beta_init; beta <= sched.beta_max; beta *= sched.growth, ++stage) {
        if (sched.restart == GammaRestart::gradient) aux = {gradient(x, Direction::h), gradient(x, Direction::v)};
        for (int t = 0; t < sched.inner_iters; ++t) {
            for (Direction d : {Direction::h, Direction::v}) {
                aux.get(d) = irls_gamma_update(gradient(x, d), aux.get(d), beta, sched);
            }
            x = detail::x_update(ds, gs, aux, sched.lambda1, beta);
            if (!all_finite(x)) {
                throw NonFinite("non-finite iterate at beta stage " + std::to_string(stage));
            }
            if (observer) observer(HqsEvent{stage, t, beta, x, aux});
        }
        aux = AuxiliaryPair::zeros(ds.shape);
    }
    return x;
}

}  // namespace rsa
