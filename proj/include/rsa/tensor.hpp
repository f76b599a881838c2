#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rsa {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class SymmetryViolation : public Error {
public:
    using Error::Error;
};

class NonFinite : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

struct Shape {
    std::size_t channels = 1;
    std::size_t height = 1;
    std::size_t width = 1;

    [[nodiscard]] constexpr std::size_t plane() const noexcept { return height * width; }
    [[nodiscard]] constexpr std::size_t size() const noexcept { return channels * height * width; }
    friend constexpr bool operator==(const Shape&, const Shape&) = default;
};

inline std::string to_string(const Shape& s) {
    return std::to_string(s.channels) + "x" + std::to_string(s.height) + "x" + std::to_string(s.width);
}

inline void require_same_shape(const Shape& a, const Shape& b, const char* what) {
    if (!(a == b)) {
        throw ShapeError(std::string(what) + ": shape mismatch " + to_string(a) + " vs " + to_string(b));
    }
}

/// Dense C x a x b array over the domain {(c,w,h)}, stored row-major in (c,w,h) order.
/// `w` runs over the height a and `h` over the width b.
template <class T>
class Tensor3 {
public:
    using value_type = T;

    Tensor3() = default;

    explicit Tensor3(Shape shape, T fill = T{}) : shape_(shape), data_(shape.size(), fill) {
        if (shape.channels == 0 || shape.height == 0 || shape.width == 0) {
            throw ShapeError("tensor dimensions must be positive, got " + to_string(shape));
        }
    }

    Tensor3(Shape shape, std::vector<T> data) : shape_(shape), data_(std::move(data)) {
        if (shape.channels == 0 || shape.height == 0 || shape.width == 0) {
            throw ShapeError("tensor dimensions must be positive, got " + to_string(shape));
        }
        if (data_.size() != shape_.size()) {
            throw ShapeError("tensor data length " + std::to_string(data_.size()) + " does not match shape " +
                             to_string(shape_));
        }
    }

    [[nodiscard]] const Shape& shape() const noexcept { return shape_; }
    [[nodiscard]] std::size_t channels() const noexcept { return shape_.channels; }
    [[nodiscard]] std::size_t height() const noexcept { return shape_.height; }
    [[nodiscard]] std::size_t width() const noexcept { return shape_.width; }
    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }

    [[nodiscard]] std::size_t index(std::size_t c, std::size_t w, std::size_t h) const noexcept {
        return (c * shape_.height + w) * shape_.width + h;
    }

    T& operator()(std::size_t c, std::size_t w, std::size_t h) noexcept { return data_[index(c, w, h)]; }
    const T& operator()(std::size_t c, std::size_t w, std::size_t h) const noexcept {
        return data_[index(c, w, h)];
    }

    [[nodiscard]] std::span<T> values() noexcept { return data_; }
    [[nodiscard]] std::span<const T> values() const noexcept { return data_; }

    [[nodiscard]] std::span<T> channel(std::size_t c) noexcept {
        return std::span<T>(data_).subspan(c * shape_.plane(), shape_.plane());
    }
    [[nodiscard]] std::span<const T> channel(std::size_t c) const noexcept {
        return std::span<const T>(data_).subspan(c * shape_.plane(), shape_.plane());
    }

    [[nodiscard]] const std::vector<T>& storage() const noexcept { return data_; }

    friend bool operator==(const Tensor3&, const Tensor3&) = default;

private:
    Shape shape_{};
    std::vector<T> data_;
};

using ImageTensor = Tensor3<double>;
using SpectrumTensor = Tensor3<std::complex<double>>;

// Elementwise helpers used throughout the solvers.

inline ImageTensor operator+(const ImageTensor& a, const ImageTensor& b) {
    require_same_shape(a.shape(), b.shape(), "add");
    ImageTensor out(a.shape());
    std::transform(a.values().begin(), a.values().end(), b.values().begin(), out.values().begin(), std::plus<>{});
    return out;
}

inline ImageTensor operator-(const ImageTensor& a, const ImageTensor& b) {
    require_same_shape(a.shape(), b.shape(), "subtract");
    ImageTensor out(a.shape());
    std::transform(a.values().begin(), a.values().end(), b.values().begin(), out.values().begin(), std::minus<>{});
    return out;
}

inline ImageTensor operator*(double s, const ImageTensor& a) {
    ImageTensor out(a.shape());
    std::transform(a.values().begin(), a.values().end(), out.values().begin(), [s](double v) { return s * v; });
    return out;
}

inline double sum(const ImageTensor& x) {
    return std::accumulate(x.values().begin(), x.values().end(), 0.0);
}

inline double squared_norm(const ImageTensor& x) {
    double acc = 0.0;
    for (double v : x.values()) acc += v * v;
    return acc;
}

inline double squared_distance(const ImageTensor& a, const ImageTensor& b) {
    require_same_shape(a.shape(), b.shape(), "distance");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a.values()[i] - b.values()[i];
        acc += d * d;
    }
    return acc;
}

inline bool all_finite(const ImageTensor& x) {
    return std::all_of(x.values().begin(), x.values().end(), [](double v) { return std::isfinite(v); });
}

inline ImageTensor clamp01(const ImageTensor& x) {
    ImageTensor out(x.shape());
    std::transform(x.values().begin(), x.values().end(), out.values().begin(),
                   [](double v) { return std::clamp(v, 0.0, 1.0); });
    return out;
}

/// Flattens in storage order; devectorize is its exact inverse.
inline std::vector<double> vectorize(const ImageTensor& x) { return x.storage(); }

inline ImageTensor devectorize(std::span<const double> v, const Shape& shape) {
    if (v.size() != shape.size()) {
        throw ShapeError("devectorize: length " + std::to_string(v.size()) + " does not match " + to_string(shape));
    }
    return ImageTensor(shape, std::vector<double>(v.begin(), v.end()));
}

/// Square s x s kernel with odd s = 2r + 1, indexed by offsets (u, v) in [-r, r]^2.
/// Entries are unconstrained (the lasso iterate before simplex projection).
class GeneralizedKernel {
public:
    GeneralizedKernel() = default;

    explicit GeneralizedKernel(std::size_t size) : size_(size), data_(size * size, 0.0) { check_size(); }

    GeneralizedKernel(std::size_t size, std::vector<double> data) : size_(size), data_(std::move(data)) {
        check_size();
        if (data_.size() != size_ * size_) {
            throw ShapeError("kernel data length " + std::to_string(data_.size()) + " does not match size " +
                             std::to_string(size_));
        }
        for (double v : data_) {
            if (!std::isfinite(v)) throw NonFinite("kernel entries must be finite");
        }
    }

    [[nodiscard]] std::size_t size() const noexcept { return size_; }
    [[nodiscard]] int radius() const noexcept { return static_cast<int>(size_ / 2); }

    double& at(int u, int v) noexcept { return data_[offset(u, v)]; }
    [[nodiscard]] double at(int u, int v) const noexcept { return data_[offset(u, v)]; }

    /// Row-major over (u, v), u = -r..r outer.
    [[nodiscard]] std::span<const double> values() const noexcept { return data_; }
    [[nodiscard]] std::span<double> values() noexcept { return data_; }

    friend bool operator==(const GeneralizedKernel&, const GeneralizedKernel&) = default;

private:
    [[nodiscard]] std::size_t offset(int u, int v) const noexcept {
        const int r = radius();
        return static_cast<std::size_t>(u + r) * size_ + static_cast<std::size_t>(v + r);
    }

    void check_size() const {
        if (size_ == 0 || size_ % 2 == 0) {
            throw ShapeError("kernel size must be odd and positive, got " + std::to_string(size_));
        }
    }

    std::size_t size_ = 1;
    std::vector<double> data_{1.0};
};

class SimplexViolation : public Error {
public:
    using Error::Error;
};

/// A point-spread function: nonnegative entries summing to one.
class BlurKernel {
public:
    static constexpr double kSumTolerance = 1e-12;

    BlurKernel() = default;

    explicit BlurKernel(GeneralizedKernel k) : k_(std::move(k)) {
        double total = 0.0;
        for (double v : k_.values()) {
            if (v < 0.0) throw SimplexViolation("blur kernel has a negative entry");
            total += v;
        }
        if (std::abs(total - 1.0) > kSumTolerance) {
            throw SimplexViolation("blur kernel sums to " + std::to_string(total) + ", expected 1");
        }
    }

    /// Rescales a nonnegative array to unit mass.
    static BlurKernel normalized(GeneralizedKernel k) {
        double total = 0.0;
        for (double v : k.values()) {
            if (v < 0.0) throw SimplexViolation("cannot normalize a kernel with negative entries");
            total += v;
        }
        if (!(total > 0.0)) throw SimplexViolation("cannot normalize a zero kernel");
        for (double& v : k.values()) v /= total;
        return BlurKernel(std::move(k));
    }

    static BlurKernel delta(std::size_t size) {
        GeneralizedKernel k(size);
        k.at(0, 0) = 1.0;
        return BlurKernel(std::move(k));
    }

    [[nodiscard]] std::size_t size() const noexcept { return k_.size(); }
    [[nodiscard]] int radius() const noexcept { return k_.radius(); }
    [[nodiscard]] double at(int u, int v) const noexcept { return k_.at(u, v); }
    [[nodiscard]] std::span<const double> values() const noexcept { return k_.values(); }
    [[nodiscard]] const GeneralizedKernel& generalized() const noexcept { return k_; }
    operator const GeneralizedKernel&() const noexcept { return k_; }  // NOLINT(google-explicit-constructor)

    friend bool operator==(const BlurKernel&, const BlurKernel&) = default;

private:
    GeneralizedKernel k_{};
};

/// Kernel as a 1 x s x s tensor (row u + r, column v + r) for file exchange.
inline ImageTensor kernel_to_tensor(const GeneralizedKernel& k) {
    return ImageTensor(Shape{1, k.size(), k.size()}, std::vector<double>(k.values().begin(), k.values().end()));
}

inline GeneralizedKernel kernel_from_tensor(const ImageTensor& t) {
    if (t.channels() != 1 || t.height() != t.width()) {
        throw ShapeError("kernel tensor must be 1 x s x s, got " + to_string(t.shape()));
    }
    return GeneralizedKernel(t.height(), t.storage());
}

}  // namespace rsa
