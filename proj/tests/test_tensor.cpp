#include <gtest/gtest.h>

#include "rsa/tensor.hpp"
#include "test_support.hpp"

using namespace rsa;

TEST(Tensor, IndexingFollowsChannelRowColumnOrder) {
    ImageTensor x(Shape{2, 3, 4});
    x(1, 2, 3) = 5.0;
    EXPECT_EQ(x.values()[(1 * 3 + 2) * 4 + 3], 5.0);
    EXPECT_EQ(x.size(), 24u);
    EXPECT_EQ(x.channel(1).size(), 12u);
}

TEST(Tensor, RejectsEmptyAndMismatchedShapes) {
    EXPECT_THROW(ImageTensor(Shape{0, 2, 2}), ShapeError);
    EXPECT_THROW(ImageTensor(Shape{1, 2, 2}, std::vector<double>(3)), ShapeError);
    ImageTensor a(Shape{1, 2, 2}), b(Shape{1, 2, 3});
    EXPECT_THROW((void)(a + b), ShapeError);
}

TEST(Tensor, VectorizeRoundTripsExactly) {
    std::mt19937_64 rng(1);
    const ImageTensor x = oracle::random_image(Shape{3, 5, 7}, rng, -2.0, 2.0);
    const auto v = vectorize(x);
    EXPECT_EQ(v.size(), x.size());
    EXPECT_EQ(devectorize(v, x.shape()), x);
    EXPECT_THROW(devectorize(std::vector<double>(4), x.shape()), ShapeError);
}

TEST(Tensor, ArithmeticHelpers) {
    ImageTensor a(Shape{1, 1, 3}, std::vector<double>{1, 2, 3});
    ImageTensor b(Shape{1, 1, 3}, std::vector<double>{0.5, -1, 4});
    EXPECT_EQ((a + b).storage(), (std::vector<double>{1.5, 1, 7}));
    EXPECT_EQ((a - b).storage(), (std::vector<double>{0.5, 3, -1}));
    EXPECT_EQ((2.0 * a).storage(), (std::vector<double>{2, 4, 6}));
    EXPECT_DOUBLE_EQ(sum(a), 6.0);
    EXPECT_DOUBLE_EQ(squared_norm(a), 14.0);
    EXPECT_DOUBLE_EQ(squared_distance(a, b), 0.25 + 9 + 1);
    EXPECT_EQ(clamp01(b).storage(), (std::vector<double>{0.5, 0, 1}));
}

TEST(Kernel, OffsetsAreCentered) {
    GeneralizedKernel k(3);
    k.at(-1, -1) = 1.0;
    k.at(1, 0) = 2.0;
    EXPECT_EQ(k.values()[0], 1.0);
    EXPECT_EQ(k.values()[2 * 3 + 1], 2.0);
    EXPECT_EQ(k.radius(), 1);
    EXPECT_THROW(GeneralizedKernel(4), ShapeError);
    EXPECT_THROW(GeneralizedKernel(1, std::vector<double>{std::nan("")}), NonFinite);
}

TEST(Kernel, BlurKernelEnforcesSimplex) {
    EXPECT_NO_THROW(BlurKernel::delta(5));
    GeneralizedKernel neg(3);
    neg.at(0, 0) = 1.5;
    neg.at(0, 1) = -0.5;
    EXPECT_THROW(BlurKernel{neg}, SimplexViolation);
    GeneralizedKernel heavy(3);
    heavy.at(0, 0) = 1.0 + 1e-9;
    EXPECT_THROW(BlurKernel{heavy}, SimplexViolation);
    GeneralizedKernel loose(3);
    for (double& v : loose.values()) v = 2.0;
    const BlurKernel k = BlurKernel::normalized(loose);
    for (double v : k.values()) EXPECT_NEAR(v, 1.0 / 9.0, 1e-15);
    EXPECT_THROW(BlurKernel::normalized(GeneralizedKernel(3)), SimplexViolation);
}

TEST(Kernel, TensorExchangeRoundTrips) {
    std::mt19937_64 rng(2);
    const GeneralizedKernel k = oracle::random_generalized(5, rng);
    const ImageTensor t = kernel_to_tensor(k);
    EXPECT_EQ(t.shape(), (Shape{1, 5, 5}));
    EXPECT_EQ(t(0, 0, 4), k.at(-2, 2));
    EXPECT_EQ(kernel_from_tensor(t), k);
    EXPECT_THROW(kernel_from_tensor(ImageTensor(Shape{1, 3, 5})), ShapeError);
}
