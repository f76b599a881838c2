#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "rsa/convolution.hpp"
#include "rsa/fft.hpp"
#include "rsa/tensor.hpp"

namespace rsa {

class NotPositiveDefinite : public Error {
public:
    using Error::Error;
};

class NoConvergence : public Error {
public:
    using Error::Error;
};

/// Normal-equation system of the kernel least-squares problem restricted to the
/// s^2 kernel-support unknowns. `matrix` is the Gram matrix A (autocorrelation of the
/// design image at support-offset differences); `cholesky` is the upper factor B with
/// B^T B = A + ridge I.
struct GramOperator {
    std::size_t kernel_size = 1;
    Eigen::MatrixXd matrix;
    double ridge = 0.0;
    Eigen::MatrixXd cholesky;
    Eigen::VectorXd rhs;

    [[nodiscard]] std::size_t dim() const noexcept { return kernel_size * kernel_size; }

    /// A + ridge I, the quadratic actually minimized.
    [[nodiscard]] Eigen::MatrixXd regularized() const {
        return matrix + ridge * Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(dim()),
                                                          static_cast<Eigen::Index>(dim()));
    }
};

/// Relative ridge added to the Gram diagonal before factorization.
inline constexpr double kGramRidge = 1e-10;

namespace detail {

/// Support offsets (u, v) in storage order of GeneralizedKernel.
inline std::vector<std::pair<int, int>> support_offsets(std::size_t s) {
    const int r = static_cast<int>(s / 2);
    std::vector<std::pair<int, int>> out;
    out.reserve(s * s);
    for (int u = -r; u <= r; ++u) {
        for (int v = -r; v <= r; ++v) out.emplace_back(u, v);
    }
    return out;
}

/// R(d) = sum_c IDFT(|X_c|^2)(d): circular autocorrelation summed over channels.
inline ImageTensor autocorrelation(const ImageTensor& x) {
    const SpectrumTensor xs = dft2(x);
    SpectrumTensor power(Shape{1, x.height(), x.width()});
    for (std::size_t c = 0; c < x.channels(); ++c) {
        auto src = xs.channel(c);
        for (std::size_t p = 0; p < src.size(); ++p) power.values()[p] += std::norm(src[p]);
    }
    return idft2(power);
}

/// C(d) = sum_c Re IDFT(conj(Y_c) X_c)(d).
inline ImageTensor cross_correlation(const ImageTensor& x, const ImageTensor& y) {
    require_same_shape(x.shape(), y.shape(), "cross-correlation");
    const SpectrumTensor xs = dft2(x);
    const SpectrumTensor ys = dft2(y);
    SpectrumTensor prod(Shape{1, x.height(), x.width()});
    for (std::size_t c = 0; c < x.channels(); ++c) {
        auto px = xs.channel(c);
        auto py = ys.channel(c);
        for (std::size_t p = 0; p < px.size(); ++p) prod.values()[p] += std::conj(py[p]) * px[p];
    }
    return idft2(prod);
}

inline void factorize(GramOperator& g) {
    Eigen::LLT<Eigen::MatrixXd> llt(g.regularized());
    if (llt.info() != Eigen::Success) {
        throw NotPositiveDefinite("Gram matrix is not positive definite (degenerate design image)");
    }
    g.cholesky = llt.matrixU();
}

}  // namespace detail

/// Gram operator summed over design images (one image gives the pixel-domain problem,
/// the two gradient images give the gradient-domain problem). Built from the
/// autocorrelation in O(s^4 + ab log ab).
inline GramOperator build_gram(std::span<const ImageTensor> designs, std::size_t kernel_size) {
    if (designs.empty()) throw Error("build_gram needs at least one design image");
    if (kernel_size == 0 || kernel_size % 2 == 0) throw ShapeError("kernel size must be odd");
    const Shape shape = designs.front().shape();
    if (kernel_size > std::min(shape.height, shape.width)) throw ShapeError("kernel larger than image plane");

    const auto offsets = detail::support_offsets(kernel_size);
    const auto n = static_cast<Eigen::Index>(offsets.size());
    GramOperator g;
    g.kernel_size = kernel_size;
    g.matrix = Eigen::MatrixXd::Zero(n, n);
    double energy = 0.0;
    for (const auto& x : designs) {
        require_same_shape(shape, x.shape(), "design images");
        energy += squared_norm(x);
        const ImageTensor r = detail::autocorrelation(x);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                const auto [u, v] = offsets[static_cast<std::size_t>(i)];
                const auto [p, q] = offsets[static_cast<std::size_t>(j)];
                g.matrix(i, j) += r(0, detail::wrap(u - p, shape.height), detail::wrap(v - q, shape.width));
            }
        }
    }
    g.matrix = 0.5 * (g.matrix + g.matrix.transpose()).eval();
    if (!(energy > 0.0)) throw NotPositiveDefinite("design image is identically zero");
    g.ridge = kGramRidge * energy;
    detail::factorize(g);
    return g;
}

inline GramOperator build_gram(const ImageTensor& x_hat, std::size_t kernel_size) {
    return build_gram(std::span<const ImageTensor>(&x_hat, 1), kernel_size);
}

/// z'(u,v) = sum_c sum_p y(c,p) x(c, p - (u,v)) over the support, summed over pairs.
inline Eigen::VectorXd build_rhs(std::span<const ImageTensor> designs, std::span<const ImageTensor> targets,
                                 const GramOperator& gram) {
    if (designs.size() != targets.size()) throw ShapeError("design/target count mismatch");
    const auto offsets = detail::support_offsets(gram.kernel_size);
    Eigen::VectorXd z = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(offsets.size()));
    for (std::size_t k = 0; k < designs.size(); ++k) {
        const ImageTensor cc = detail::cross_correlation(designs[k], targets[k]);
        const std::size_t a = cc.height();
        const std::size_t b = cc.width();
        for (std::size_t i = 0; i < offsets.size(); ++i) {
            const auto [u, v] = offsets[i];
            z(static_cast<Eigen::Index>(i)) += cc(0, detail::wrap(-u, a), detail::wrap(-v, b));
        }
    }
    return z;
}

inline Eigen::VectorXd build_rhs(const ImageTensor& x_hat, const ImageTensor& y, const GramOperator& gram) {
    return build_rhs(std::span<const ImageTensor>(&x_hat, 1), std::span<const ImageTensor>(&y, 1), gram);
}

struct LassoOptions {
    double update_tolerance = 1e-10;
    double gap_tolerance = 1e-9;
    std::size_t max_sweeps = 500;           // coordinate-descent sweeps before the active-set finish
    std::size_t gap_check_interval = 10;
    std::size_t max_active_set_steps = 0;   // 0: 50 * dimension
};

struct LassoResult {
    GeneralizedKernel kernel;
    std::size_t sweeps = 0;
    double duality_gap = 0.0;
};

/// ||z - B q||^2 + mu ||q||_1, evaluated through A and z' without forming z.
inline double lasso_objective(const GramOperator& gram, const Eigen::VectorXd& q, double mu) {
    const Eigen::MatrixXd a = gram.regularized();
    const Eigen::VectorXd z = gram.cholesky.transpose().triangularView<Eigen::Lower>().solve(gram.rhs);
    return q.dot(a * q) - 2.0 * q.dot(gram.rhs) + z.squaredNorm() + mu * q.lpNorm<1>();
}

/// Largest violation of the lasso optimality conditions: with grad = 2(Aq - z'),
/// |grad + mu sign(q)| on the support and max(|grad| - mu, 0) off it.
inline double lasso_kkt_residual(const GramOperator& gram, const Eigen::VectorXd& q, double mu) {
    const Eigen::VectorXd grad = 2.0 * (gram.regularized() * q - gram.rhs);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < q.size(); ++i) {
        const double r = q(i) != 0.0 ? std::abs(grad(i) + mu * (q(i) > 0.0 ? 1.0 : -1.0))
                                     : std::max(0.0, std::abs(grad(i)) - mu);
        worst = std::max(worst, r);
    }
    return worst;
}

namespace detail {

/// Exact minimizer on a fixed support with fixed signs: A_SS q_S = z'_S - (mu/2) sign_S.
/// Returns false when the solve flips a sign or a zero coordinate violates |grad| <= mu.
inline bool polish_support(const Eigen::MatrixXd& a, const Eigen::VectorXd& zp, double mu, Eigen::VectorXd& q) {
    std::vector<Eigen::Index> support;
    for (Eigen::Index i = 0; i < q.size(); ++i) {
        if (q(i) != 0.0) support.push_back(i);
    }
    const auto m = static_cast<Eigen::Index>(support.size());
    Eigen::VectorXd candidate = Eigen::VectorXd::Zero(q.size());
    if (m > 0) {
        Eigen::MatrixXd sub(m, m);
        Eigen::VectorXd rhs(m);
        for (Eigen::Index r = 0; r < m; ++r) {
            for (Eigen::Index c = 0; c < m; ++c) sub(r, c) = a(support[r], support[c]);
            rhs(r) = zp(support[r]) - 0.5 * mu * (q(support[r]) > 0.0 ? 1.0 : -1.0);
        }
        const Eigen::LLT<Eigen::MatrixXd> llt(sub);
        if (llt.info() != Eigen::Success) return false;
        const Eigen::VectorXd sol = llt.solve(rhs);
        for (Eigen::Index r = 0; r < m; ++r) {
            if (sol(r) * q(support[r]) <= 0.0) return false;
            candidate(support[r]) = sol(r);
        }
    }
    const Eigen::VectorXd grad = 2.0 * (a * candidate - zp);
    const double slack = 1e-12 * std::max(1.0, zp.lpNorm<Eigen::Infinity>());
    for (Eigen::Index i = 0; i < q.size(); ++i) {
        if (candidate(i) == 0.0 && std::abs(grad(i)) > mu + slack) return false;
    }
    q = candidate;
    return true;
}

/// Feature-sign search: exact active-set finish from a warm start. Each step solves
/// the smooth problem on the active set with fixed signs and line-searches back to
/// the first objective-decreasing sign change. Returns false if the step budget runs out.
inline bool feature_sign(const Eigen::MatrixXd& a, const Eigen::VectorXd& zp, double mu, Eigen::VectorXd& q,
                         std::size_t max_steps) {
    const Eigen::Index n = q.size();
    const double slack = 1e-12 * std::max(1.0, zp.lpNorm<Eigen::Infinity>());
    auto objective = [&](const Eigen::VectorXd& v) { return v.dot(a * v) - 2.0 * v.dot(zp) + mu * v.lpNorm<1>(); };
    Eigen::VectorXd theta = q.unaryExpr([](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });

    for (std::size_t step = 0; step < max_steps; ++step) {
        Eigen::VectorXd grad = 2.0 * (a * q - zp);
        // Optimality on the active set first, then activation of the worst zero.
        bool active_ok = true;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (theta(i) != 0.0 && std::abs(grad(i) + mu * theta(i)) > 1e3 * slack) active_ok = false;
        }
        if (active_ok) {
            Eigen::Index worst = -1;
            double worst_val = mu + slack;
            for (Eigen::Index i = 0; i < n; ++i) {
                if (theta(i) == 0.0 && std::abs(grad(i)) > worst_val) {
                    worst = i;
                    worst_val = std::abs(grad(i));
                }
            }
            if (worst < 0) return true;
            theta(worst) = grad(worst) > 0.0 ? -1.0 : 1.0;
        }

        std::vector<Eigen::Index> act;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (theta(i) != 0.0) act.push_back(i);
        }
        const auto m = static_cast<Eigen::Index>(act.size());
        Eigen::MatrixXd sub(m, m);
        Eigen::VectorXd rhs(m);
        for (Eigen::Index r = 0; r < m; ++r) {
            for (Eigen::Index c = 0; c < m; ++c) sub(r, c) = a(act[r], act[c]);
            rhs(r) = zp(act[r]) - 0.5 * mu * theta(act[r]);
        }
        const Eigen::LLT<Eigen::MatrixXd> llt(sub);
        if (llt.info() != Eigen::Success) return false;
        const Eigen::VectorXd sol = llt.solve(rhs);

        Eigen::VectorXd target = Eigen::VectorXd::Zero(n);
        for (Eigen::Index r = 0; r < m; ++r) target(act[r]) = sol(r);
        // Candidate points: the full step and every zero crossing along the segment.
        Eigen::VectorXd best = target;
        double best_obj = objective(target);
        for (Eigen::Index r = 0; r < m; ++r) {
            const Eigen::Index i = act[r];
            if (q(i) * target(i) < 0.0) {
                const double t = q(i) / (q(i) - target(i));
                Eigen::VectorXd cand = q + t * (target - q);
                cand(i) = 0.0;
                const double obj = objective(cand);
                if (obj < best_obj) {
                    best_obj = obj;
                    best = cand;
                }
            }
        }
        q = best;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (std::abs(q(i)) <= 1e-300) q(i) = 0.0;
            theta(i) = q(i) > 0.0 ? 1.0 : (q(i) < 0.0 ? -1.0 : 0.0);
        }
    }
    return false;
}

}  // namespace detail

/// Cyclic coordinate descent with soft thresholding on the reduced lasso problem.
/// Every `gap_check_interval` sweeps the current support is polished by an exact
/// solve and returned if it passes the optimality conditions. Coordinate descent
/// also stops on a small coordinate step or a small duality gap. Ill-conditioned
/// Gram matrices can stall it; after `max_sweeps` a feature-sign search finishes
/// from the current iterate.
inline LassoResult solve_lasso_detailed(const GramOperator& gram, double mu, const LassoOptions& opts = {}) {
    if (mu < 0.0) throw Error("lasso penalty must be nonnegative");
    const auto n = static_cast<Eigen::Index>(gram.dim());
    if (gram.rhs.size() != n) throw ShapeError("Gram operator has no matching right-hand side");
    const Eigen::MatrixXd a = gram.regularized();
    const Eigen::VectorXd& zp = gram.rhs;
    const Eigen::VectorXd z = gram.cholesky.transpose().triangularView<Eigen::Lower>().solve(zp);
    const double z_norm2 = z.squaredNorm();
    const double threshold = 0.5 * mu;

    Eigen::VectorXd q = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd aq = Eigen::VectorXd::Zero(n);

    auto gap_at = [&](const Eigen::VectorXd& v, const Eigen::VectorXd& av) {
        const Eigen::VectorXd corr = zp - av;  // B^T (z - B q)
        const double qz = v.dot(zp);
        const double resid2 = std::max(0.0, z_norm2 - 2.0 * qz + v.dot(av));
        const double primal = resid2 + mu * v.lpNorm<1>();
        const double m = corr.lpNorm<Eigen::Infinity>();
        const double scale = m > 0.0 ? std::min(1.0, mu / (2.0 * m)) : 1.0;
        const double dual = 2.0 * scale * (z_norm2 - qz) - scale * scale * resid2;
        return std::max(0.0, primal - dual);
    };
    auto finish = [&](const Eigen::VectorXd& v, std::size_t sweep) {
        LassoResult r;
        r.sweeps = sweep;
        r.duality_gap = gap_at(v, a * v);
        r.kernel = GeneralizedKernel(gram.kernel_size, std::vector<double>(v.data(), v.data() + n));
        return r;
    };

    for (std::size_t sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
        double max_step = 0.0;
        for (Eigen::Index g = 0; g < n; ++g) {
            const double diag = a(g, g);
            const double partial = zp(g) - aq(g) + diag * q(g);
            double next = 0.0;
            if (partial > threshold) {
                next = (partial - threshold) / diag;
            } else if (partial < -threshold) {
                next = (partial + threshold) / diag;
            }
            const double step = next - q(g);
            if (step != 0.0) {
                aq += step * a.col(g);
                q(g) = next;
                max_step = std::max(max_step, std::abs(step));
            }
        }
        const bool small_step = max_step < opts.update_tolerance;
        if (small_step || sweep % opts.gap_check_interval == 0) {
            Eigen::VectorXd polished = q;
            if (detail::polish_support(a, zp, mu, polished)) return finish(polished, sweep);
            if (small_step || gap_at(q, aq) < opts.gap_tolerance) return finish(q, sweep);
        }
    }
    const std::size_t budget = opts.max_active_set_steps > 0 ? opts.max_active_set_steps
                                                             : 50 * static_cast<std::size_t>(n) + 100;
    if (detail::feature_sign(a, zp, mu, q, budget)) return finish(q, opts.max_sweeps);
    throw NoConvergence("lasso did not converge: " + std::to_string(opts.max_sweeps) +
                        " coordinate sweeps and " + std::to_string(budget) + " active-set steps");
}

inline GeneralizedKernel solve_lasso(const GramOperator& gram, double mu) {
    return solve_lasso_detailed(gram, mu).kernel;
}

/// Euclidean projection onto the probability simplex (sort-based, O(m log m)).
inline std::vector<double> project_simplex(std::span<const double> q) {
    if (q.empty()) throw ShapeError("cannot project an empty vector");
    std::vector<double> sorted(q.begin(), q.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>{});
    double running = 0.0;
    double theta = 0.0;
    for (std::size_t j = 0; j < sorted.size(); ++j) {
        running += sorted[j];
        const double candidate = (running - 1.0) / static_cast<double>(j + 1);
        if (sorted[j] - candidate > 0.0) theta = candidate;
    }
    std::vector<double> out(q.size());
    std::transform(q.begin(), q.end(), out.begin(), [theta](double v) { return std::max(v - theta, 0.0); });
    return out;
}

inline BlurKernel project_simplex(const GeneralizedKernel& q) {
    return BlurKernel(GeneralizedKernel(q.size(), project_simplex(q.values())));
}

/// K-step for one frame: gradient-domain lasso fit of a generalized kernel, then
/// projection onto the simplex.
inline BlurKernel estimate_kernel(const ImageTensor& y, const ImageTensor& x_hat, double mu, std::size_t support) {
    require_same_shape(y.shape(), x_hat.shape(), "estimate_kernel");
    const std::vector<ImageTensor> designs{gradient(x_hat, Direction::h), gradient(x_hat, Direction::v)};
    const std::vector<ImageTensor> targets{gradient(y, Direction::h), gradient(y, Direction::v)};
    GramOperator gram = build_gram(designs, support);
    gram.rhs = build_rhs(designs, targets, gram);
    return project_simplex(solve_lasso(gram, mu));
}

}  // namespace rsa
