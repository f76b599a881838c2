#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "rsa/parallel.hpp"
#include "rsa/tensor.hpp"

namespace rsa {

class NoNeighbors : public Error {
public:
    explicit NoNeighbors(std::vector<std::size_t> indices)
        : Error(describe(indices)), indices_(std::move(indices)) {}
    [[nodiscard]] const std::vector<std::size_t>& indices() const noexcept { return indices_; }

private:
    static std::string describe(const std::vector<std::size_t>& indices) {
        std::string s = "no neighbours inside the contraction neighbourhood for sample(s)";
        for (std::size_t i : indices) s += " " + std::to_string(i);
        return s;
    }
    std::vector<std::size_t> indices_;
};

class DegenerateDirection : public Error {
public:
    using Error::Error;
};

/// n vectorized images z_i in R^D, D = C a b.
class SampleSet {
public:
    SampleSet() = default;

    SampleSet(std::vector<std::vector<double>> points, Shape shape) : shape_(shape), points_(std::move(points)) {
        for (const auto& p : points_) {
            if (p.size() != shape_.size()) throw ShapeError("sample dimension does not match shape " + to_string(shape_));
        }
    }

    static SampleSet from_images(std::span<const ImageTensor> images) {
        if (images.empty()) throw Error("empty sample set");
        std::vector<std::vector<double>> pts;
        pts.reserve(images.size());
        for (const auto& im : images) {
            require_same_shape(images.front().shape(), im.shape(), "sample set");
            pts.push_back(vectorize(im));
        }
        return SampleSet(std::move(pts), images.front().shape());
    }

    [[nodiscard]] std::vector<ImageTensor> to_images() const {
        std::vector<ImageTensor> out;
        out.reserve(points_.size());
        for (const auto& p : points_) out.push_back(devectorize(p, shape_));
        return out;
    }

    [[nodiscard]] std::size_t size() const noexcept { return points_.size(); }
    [[nodiscard]] std::size_t dim() const noexcept { return shape_.size(); }
    [[nodiscard]] const Shape& shape() const noexcept { return shape_; }
    [[nodiscard]] std::span<const double> operator[](std::size_t i) const noexcept { return points_[i]; }
    [[nodiscard]] const std::vector<std::vector<double>>& points() const noexcept { return points_; }

private:
    Shape shape_{};
    std::vector<std::vector<double>> points_;
};

struct ManifoldParams {
    double r1 = 1.0;
    double r2 = 10.0;
    int k_exp = 2;
    std::size_t min_neighbors = 5;  // diagnostic only

    void validate() const {
        if (!(r1 > 0.0)) throw Error("r1 must be positive");
        if (!(r2 >= 2.0 * r1)) throw Error("r2 must be at least 2 * r1");
        if (k_exp < 2) throw Error("k must be an integer >= 2");
    }
};

namespace detail {

inline double dist2(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

inline double ipow(double x, int k) {
    double r = 1.0;
    for (int i = 0; i < k; ++i) r *= x;
    return r;
}

inline std::vector<double> weighted_average(const SampleSet& set, std::span<const double> weights) {
    std::vector<double> out(set.dim(), 0.0);
    for (std::size_t j = 0; j < set.size(); ++j) {
        if (weights[j] == 0.0) continue;
        const auto z = set[j];
        for (std::size_t d = 0; d < out.size(); ++d) out[d] += weights[j] * z[d];
    }
    return out;
}

inline void normalize_or_throw(std::vector<double>& w, std::size_t i) {
    double total = 0.0;
    for (double v : w) total += v;
    if (!(total > 0.0)) throw NoNeighbors({i});
    for (double& v : w) v /= total;
}

}  // namespace detail

/// Normalized ball weights alpha_j(z_i): (1 - |z_i - z_j|^2 / r1^2)^k inside r1, j != i.
inline std::vector<double> contraction_weights(const SampleSet& set, std::size_t i, const ManifoldParams& p) {
    std::vector<double> w(set.size(), 0.0);
    const double r1sq = p.r1 * p.r1;
    for (std::size_t j = 0; j < set.size(); ++j) {
        if (j == i) continue;
        const double d2 = detail::dist2(set[i], set[j]);
        if (d2 <= r1sq) w[j] = detail::ipow(1.0 - d2 / r1sq, p.k_exp);
    }
    detail::normalize_or_throw(w, i);
    return w;
}

/// F(z_i): the ball-weighted average of the other samples.
inline std::vector<double> contraction_target(const SampleSet& set, std::size_t i, const ManifoldParams& p) {
    return detail::weighted_average(set, contraction_weights(set, i, p));
}

/// Rank-one orthogonal projector onto span(F(z_i) - z_i), kept as its unit vector.
class ContractionProjector {
public:
    ContractionProjector(std::span<const double> z_i, std::span<const double> f_zi) : unit_(z_i.size()) {
        if (z_i.size() != f_zi.size()) throw ShapeError("contraction direction needs equal dimensions");
        double norm2 = 0.0;
        for (std::size_t d = 0; d < unit_.size(); ++d) {
            unit_[d] = f_zi[d] - z_i[d];
            norm2 += unit_[d] * unit_[d];
        }
        length_ = std::sqrt(norm2);
        if (length_ < 1e-12) throw DegenerateDirection("contraction direction has (near) zero length");
        for (double& v : unit_) v /= length_;
    }

    [[nodiscard]] std::span<const double> direction() const noexcept { return unit_; }
    [[nodiscard]] double length() const noexcept { return length_; }

    /// Signed coordinate of w along the direction; U w = coordinate * direction.
    [[nodiscard]] double coordinate(std::span<const double> w) const {
        double acc = 0.0;
        for (std::size_t d = 0; d < unit_.size(); ++d) acc += unit_[d] * w[d];
        return acc;
    }

    [[nodiscard]] std::vector<double> apply(std::span<const double> w) const {
        const double c = coordinate(w);
        std::vector<double> out(unit_.size());
        for (std::size_t d = 0; d < unit_.size(); ++d) out[d] = c * unit_[d];
        return out;
    }

private:
    std::vector<double> unit_;
    double length_ = 0.0;
};

inline ContractionProjector contraction_matrix(std::span<const double> z_i, std::span<const double> f_zi) {
    return ContractionProjector(z_i, f_zi);
}

/// Along-direction weight: 1 up to r2/2 (inclusive), smooth falloff to zero at r2.
inline double along_weight(double norm_u, double r2, int k) {
    if (norm_u <= 0.5 * r2) return 1.0;
    if (norm_u < r2) {
        const double t = (2.0 * norm_u - r2) / r2;
        return detail::ipow(1.0 - t * t, k);
    }
    return 0.0;
}

/// Across-direction weight: (1 - |v|^2 / r1^2)^k inside r1.
inline double across_weight(double norm_v, double r1, int k) {
    if (norm_v <= r1) return detail::ipow(1.0 - (norm_v * norm_v) / (r1 * r1), k);
    return 0.0;
}

/// Normalized cylinder weights beta_j(z_i) for a given contraction direction.
inline std::vector<double> local_contraction_weights(const SampleSet& set, std::size_t i, const ManifoldParams& p,
                                                     const ContractionProjector& proj) {
    std::vector<double> w(set.size(), 0.0);
    std::vector<double> diff(set.dim());
    const auto zi = set[i];
    for (std::size_t j = 0; j < set.size(); ++j) {
        if (j == i) continue;
        const auto zj = set[j];
        double total2 = 0.0;
        for (std::size_t d = 0; d < diff.size(); ++d) {
            diff[d] = zj[d] - zi[d];
            total2 += diff[d] * diff[d];
        }
        const double along = proj.coordinate(diff);
        const double norm_u = std::abs(along);
        const double norm_v = std::sqrt(std::max(0.0, total2 - along * along));
        w[j] = along_weight(norm_u, p.r2, p.k_exp) * across_weight(norm_v, p.r1, p.k_exp);
    }
    detail::normalize_or_throw(w, i);
    return w;
}

/// G(z_i) for a given contraction direction.
inline std::vector<double> local_contraction(const SampleSet& set, std::size_t i, const ManifoldParams& p,
                                             const ContractionProjector& proj) {
    return detail::weighted_average(set, local_contraction_weights(set, i, p, proj));
}

struct ProjectionInfo {
    std::vector<double> value;
    bool degenerate = false;  // F(z_i) == z_i, value is F(z_i)
};

/// G(z_i) with the direction estimated from F(z_i); falls back to F(z_i) when the
/// direction is degenerate.
inline ProjectionInfo project_sample(const SampleSet& set, std::size_t i, const ManifoldParams& p) {
    std::vector<double> f = contraction_target(set, i, p);
    try {
        const ContractionProjector proj(set[i], f);
        return {local_contraction(set, i, p, proj), false};
    } catch (const DegenerateDirection&) {
        return {std::move(f), true};
    }
}

inline std::vector<double> local_contraction(const SampleSet& set, std::size_t i, const ManifoldParams& p) {
    return project_sample(set, i, p).value;
}

struct PointDiagnostics {
    std::size_t neighbors = 0;  // others within r1
    double displacement = 0.0;  // |G(z_i) - z_i|
    bool under_sampled = false; // neighbors < min_neighbors
    bool degenerate = false;
};

struct ManifoldFit {
    SampleSet points;
    std::vector<PointDiagnostics> diagnostics;
};

inline std::size_t count_neighbors(const SampleSet& set, std::size_t i, double radius) {
    std::size_t n = 0;
    const double r2 = radius * radius;
    for (std::size_t j = 0; j < set.size(); ++j) {
        if (j != i && detail::dist2(set[i], set[j]) <= r2) ++n;
    }
    return n;
}

/// Projects every sample onto the estimated manifold. Every projection reads the
/// original set. Points without neighbours are collected into one NoNeighbors error.
inline ManifoldFit fit_manifold(const SampleSet& set, const ManifoldParams& p) {
    p.validate();
    if (set.size() < 2) throw Error("manifold fitting needs at least two samples");
    const std::size_t n = set.size();
    std::vector<std::vector<double>> out(n);
    std::vector<PointDiagnostics> diag(n);
    std::vector<char> isolated(n, 0);
    parallel_for(n, [&](std::size_t i) {
        diag[i].neighbors = count_neighbors(set, i, p.r1);
        diag[i].under_sampled = diag[i].neighbors < p.min_neighbors;
        try {
            ProjectionInfo info = project_sample(set, i, p);
            diag[i].degenerate = info.degenerate;
            diag[i].displacement = std::sqrt(detail::dist2(info.value, set[i]));
            out[i] = std::move(info.value);
        } catch (const NoNeighbors&) {
            isolated[i] = 1;
        }
    });
    std::vector<std::size_t> failed;
    for (std::size_t i = 0; i < n; ++i) {
        if (isolated[i]) failed.push_back(i);
    }
    if (!failed.empty()) throw NoNeighbors(std::move(failed));
    return {SampleSet(std::move(out), set.shape()), std::move(diag)};
}

/// Smallest radius giving every sample at least `min_neighbors` others within it
/// (the largest min_neighbors-th nearest-neighbour distance), enlarged by 1%.
inline double suggest_radius(const SampleSet& set, std::size_t min_neighbors) {
    if (min_neighbors == 0 || set.size() <= min_neighbors) {
        throw Error("suggest_radius needs 0 < min_neighbors < number of samples");
    }
    double worst = 0.0;
    std::vector<double> d(set.size() - 1);
    for (std::size_t i = 0; i < set.size(); ++i) {
        std::size_t m = 0;
        for (std::size_t j = 0; j < set.size(); ++j) {
            if (j != i) d[m++] = std::sqrt(detail::dist2(set[i], set[j]));
        }
        std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(min_neighbors - 1), d.end());
        worst = std::max(worst, d[min_neighbors - 1]);
    }
    return 1.01 * worst;
}

}  // namespace rsa
