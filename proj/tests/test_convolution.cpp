#include <gtest/gtest.h>

#include "rsa/convolution.hpp"
#include "test_support.hpp"

using namespace rsa;

TEST(Pad, IdentityKernel) {
    const ImageTensor p = pad_kernel(BlurKernel::delta(1), Shape{3, 4, 5});
    for (std::size_t c = 0; c < 3; ++c) {
        EXPECT_EQ(p(c, 0, 0), 1.0);
        EXPECT_DOUBLE_EQ(sum(p), 3.0);
    }
}

TEST(Pad, WrapAroundPlacement) {
    std::mt19937_64 rng(8);
    const GeneralizedKernel k = oracle::random_generalized(3, rng);
    const ImageTensor p = pad_kernel(k, Shape{1, 4, 4});
    EXPECT_EQ(p(0, 3, 3), k.at(-1, -1));
    EXPECT_EQ(p(0, 1, 1), k.at(1, 1));
    EXPECT_EQ(p(0, 0, 3), k.at(0, -1));
    EXPECT_EQ(p(0, 3, 0), k.at(-1, 0));
    EXPECT_EQ(p(0, 2, 2), 0.0);
    double ks = 0.0;
    for (double v : k.values()) ks += v;
    EXPECT_NEAR(sum(p), ks, 1e-14);
}

TEST(Pad, RejectsOversizedKernel) {
    EXPECT_THROW((void)pad_kernel(BlurKernel::delta(5), Shape{1, 4, 8}), ShapeError);
    EXPECT_THROW((void)periodic_convolve(BlurKernel::delta(5), ImageTensor(Shape{1, 8, 3})), ShapeError);
}

TEST(Convolve, DeltaIsIdentity) {
    std::mt19937_64 rng(9);
    const ImageTensor x = oracle::random_image(Shape{3, 6, 7}, rng);
    EXPECT_EQ(periodic_convolve(BlurKernel::delta(5), x), x);
}

TEST(Convolve, UniformKernelKeepsConstantImage) {
    GeneralizedKernel k(3);
    for (double& v : k.values()) v = 1.0 / 9.0;
    const ImageTensor x(Shape{1, 5, 5}, 0.7);
    for (const auto t = periodic_convolve(k, x); double v : t.values()) EXPECT_NEAR(v, 0.7, 1e-15);
}

TEST(Convolve, MatchesDirectSumOracle) {
    std::mt19937_64 rng(10);
    const GeneralizedKernel k = oracle::random_generalized(5, rng);
    const ImageTensor x = oracle::random_image(Shape{1, 8, 8}, rng);
    EXPECT_LE(oracle::max_abs_diff(periodic_convolve(k, x), oracle::naive_convolve(k, x)), 1e-14);
}

TEST(Convolve, ConvolutionTheoremAcrossShapes) {
    std::mt19937_64 rng(11);
    for (std::size_t s : {1u, 3u, 5u, 7u}) {
        for (std::size_t a = std::max<std::size_t>(4, s); a <= 16; a += 3) {
            for (std::size_t b = std::max<std::size_t>(4, s); b <= 16; b += 4) {
                const GeneralizedKernel k = oracle::random_generalized(s, rng);
                const ImageTensor x = oracle::random_image(Shape{2, a, b}, rng, -1.0, 1.0);
                const ImageTensor spatial = periodic_convolve(k, x);
                // Independent FFT path: pad, transform, multiply, invert.
                const SpectrumTensor K = dft2(pad_kernel(k, x.shape()));
                SpectrumTensor X = dft2(x);
                for (std::size_t i = 0; i < X.size(); ++i) X.values()[i] *= K.values()[i];
                const ImageTensor via_fft = idft2(X);
                EXPECT_LE(oracle::max_abs_diff(via_fft, spatial), 1e-9 * std::max(1.0, oracle::max_abs(spatial)));
                EXPECT_LE(oracle::max_abs_diff(periodic_convolve_fft(k, x), spatial),
                          1e-9 * std::max(1.0, oracle::max_abs(spatial)));
            }
        }
    }
}

TEST(Convolve, Linearity) {
    std::mt19937_64 rng(12);
    const GeneralizedKernel k = oracle::random_generalized(3, rng);
    const ImageTensor x = oracle::random_image(Shape{2, 7, 9}, rng);
    const ImageTensor y = oracle::random_image(Shape{2, 7, 9}, rng);
    const ImageTensor lhs = periodic_convolve(k, 1.7 * x + (-0.3) * y);
    const ImageTensor rhs = 1.7 * periodic_convolve(k, x) + (-0.3) * periodic_convolve(k, y);
    EXPECT_LE(oracle::max_abs_diff(lhs, rhs), 1e-10);
}

TEST(Convolve, BrightnessPreserved) {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        const BlurKernel k = oracle::random_blur(5, rng);
        const ImageTensor x = oracle::random_image(Shape{3, 9, 11}, rng);
        EXPECT_NEAR(sum(periodic_convolve(k, x)), sum(x), 1e-9 * sum(x));
    }
}

TEST(Gradient, ConstantImageHasNoGradient) {
    const ImageTensor x(Shape{2, 4, 5}, 0.4);
    for (Direction d : {Direction::h, Direction::v}) {
        for (const auto t = gradient(x, d); double v : t.values()) EXPECT_EQ(v, 0.0);
    }
}

TEST(Gradient, CircularDifferenceExample) {
    const ImageTensor x(Shape{1, 1, 4}, std::vector<double>{0, 1, 2, 3});
    EXPECT_EQ(gradient(x, Direction::h).storage(), (std::vector<double>{-3, 1, 1, 1}));
    const ImageTensor col(Shape{1, 4, 1}, std::vector<double>{0, 1, 2, 3});
    EXPECT_EQ(gradient(col, Direction::v).storage(), (std::vector<double>{-3, 1, 1, 1}));
}

TEST(Gradient, EqualsConvolutionWithDifferenceFilter) {
    std::mt19937_64 rng(14);
    const ImageTensor x = oracle::random_image(Shape{3, 6, 5}, rng);
    for (Direction d : {Direction::h, Direction::v}) {
        const GeneralizedKernel f = difference_filter(d);
        EXPECT_EQ(f.size(), 3u);
        EXPECT_LE(oracle::max_abs_diff(gradient(x, d), oracle::naive_convolve(f, x)), 1e-15);
    }
}

TEST(Gradient, AdjointIdentity) {
    std::mt19937_64 rng(15);
    const ImageTensor x = oracle::random_image(Shape{2, 5, 6}, rng, -1, 1);
    const ImageTensor g = oracle::random_image(Shape{2, 5, 6}, rng, -1, 1);
    for (Direction d : {Direction::h, Direction::v}) {
        double lhs = 0.0, rhs = 0.0;
        const ImageTensor gx = gradient(x, d), gtg = gradient_adjoint(g, d);
        for (std::size_t i = 0; i < x.size(); ++i) {
            lhs += gx.values()[i] * g.values()[i];
            rhs += x.values()[i] * gtg.values()[i];
        }
        EXPECT_NEAR(lhs, rhs, 1e-12);
    }
}

TEST(Gradient, ParsevalOnGradientImage) {
    std::mt19937_64 rng(16);
    const ImageTensor x = oracle::random_image(Shape{3, 8, 10}, rng);
    const ImageTensor g = gradient(x, Direction::h);
    double spectral = 0.0;
    for (const auto t = dft2(g); auto v : t.values()) spectral += std::norm(v);
    EXPECT_NEAR(spectral / 80.0, squared_norm(g), 1e-9 * squared_norm(g));
}

TEST(Convolve, KernelSpectrumMatchesPaddedTransform) {
    std::mt19937_64 rng(17);
    const GeneralizedKernel k = oracle::random_generalized(3, rng);
    const SpectrumTensor a = kernel_spectrum(k, 6, 7);
    const SpectrumTensor b = oracle::naive_dft(pad_kernel(k, Shape{1, 6, 7}));
    EXPECT_LE(oracle::max_abs_diff(a, b), 1e-12);
}
