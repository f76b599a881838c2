#include <gtest/gtest.h>

#include <numbers>

#include "rsa/metrics.hpp"
#include "rsa/simulation.hpp"

using namespace rsa;

TEST(SplitMix, ReferenceStream) {
    SplitMix64 g(0);
    EXPECT_EQ(g.next(), 0xE220A8397B1DCDAFULL);
    EXPECT_EQ(g.next(), 0x6E789E6AA1B965F4ULL);
}

TEST(SplitMix, NormalMoments) {
    SplitMix64 g(7);
    double s = 0.0, s2 = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double v = g.normal();
        s += v;
        s2 += v * v;
    }
    EXPECT_NEAR(s / n, 0.0, 0.01);
    EXPECT_NEAR(s2 / n, 1.0, 0.01);
}

TEST(Psfs, HorizontalLineIsMirrorSymmetric) {
    SimulationSpec spec;
    spec.n_angles = 1;
    spec.kernel_size = 9;
    const BlurKernel k = simulate_psfs(spec).front();
    for (int u = -4; u <= 4; ++u) {
        for (int v = -4; v <= 4; ++v) EXPECT_NEAR(k.at(u, v), k.at(u, -v), 1e-15);
    }
    EXPECT_GT(k.at(0, 3), 0.0);
    EXPECT_EQ(k.at(2, 0), 0.0);
}

TEST(Psfs, AllOnSimplex) {
    for (KernelFamily fam : {KernelFamily::oriented_line, KernelFamily::oriented_sparse}) {
        SimulationSpec spec;
        spec.kernel_family = fam;
        spec.seed = 5;
        for (const auto& k : simulate_psfs(spec)) {
            double total = 0.0;
            for (double v : k.values()) {
                EXPECT_GE(v, 0.0);
                total += v;
            }
            EXPECT_NEAR(total, 1.0, 1e-12);
        }
    }
}

TEST(Psfs, QuarterTurnIsTransposeAndFlip) {
    SimulationSpec spec;
    spec.n_angles = 12;
    spec.kernel_size = 11;
    const auto ks = simulate_psfs(spec);
    for (std::size_t i = 0; i < 6; ++i) {
        const BlurKernel& a = ks[i];
        const BlurKernel& b = ks[i + 6];
        for (int u = -5; u <= 5; ++u) {
            for (int v = -5; v <= 5; ++v) EXPECT_NEAR(b.at(u, v), a.at(-v, u), 1e-12) << i;
        }
    }
}

TEST(Psfs, Anisotropic) {
    SimulationSpec spec;
    spec.n_angles = 8;
    spec.kernel_size = 15;
    for (const auto& k : simulate_psfs(spec)) {
        double suu = 0, svv = 0, suv = 0;
        for (int u = -7; u <= 7; ++u) {
            for (int v = -7; v <= 7; ++v) {
                suu += k.at(u, v) * u * u;
                svv += k.at(u, v) * v * v;
                suv += k.at(u, v) * u * v;
            }
        }
        const double tr = suu + svv;
        const double disc = std::sqrt((suu - svv) * (suu - svv) + 4 * suv * suv);
        const double major = 0.5 * (tr + disc), minor = 0.5 * (tr - disc);
        EXPECT_GT(std::sqrt(major / minor), 3.0);
    }
}

TEST(Psfs, SparseFamilyIsSeeded) {
    SimulationSpec spec;
    spec.kernel_family = KernelFamily::oriented_sparse;
    spec.seed = 11;
    EXPECT_EQ(simulate_psfs(spec), simulate_psfs(spec));
    SimulationSpec other = spec;
    other.seed = 12;
    EXPECT_NE(simulate_psfs(spec), simulate_psfs(other));
    EXPECT_EQ(parse_kernel_family(to_string(KernelFamily::oriented_sparse)), KernelFamily::oriented_sparse);
    EXPECT_THROW((void)parse_kernel_family("gaussian"), Error);
}

TEST(Blur, NoiselessFramesAreExact) {
    SimulationSpec spec;
    spec.source = synthetic_target(32);
    spec.n_angles = 4;
    spec.kernel_size = 5;
    spec.noise_sigma = 0.0;
    const BlurredDataset ds = blur_dataset(spec);
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_EQ(ds.frames[i], ds.convolved[i]);
        EXPECT_EQ(ds.convolved[i], periodic_convolve(ds.kernels[i], spec.source));
    }
}

TEST(Blur, NoiseLevel) {
    SimulationSpec spec;
    spec.source = synthetic_target(64);
    spec.n_angles = 12;
    spec.kernel_size = 7;
    spec.seed = 2024;
    const BlurredDataset ds = blur_dataset(spec);
    double s = 0.0, s2 = 0.0, count = 0.0;
    for (std::size_t i = 0; i < ds.frames.size(); ++i) {
        EXPECT_NEAR(psnr(ds.frames[i], ds.convolved[i]), 10.0 * std::log10(1.0 / 0.0025), 0.2);
        for (std::size_t p = 0; p < ds.frames[i].size(); ++p) {
            const double e = ds.frames[i].values()[p] - ds.convolved[i].values()[p];
            s += e;
            s2 += e * e;
            count += 1.0;
        }
    }
    const double sd = std::sqrt(s2 / count - (s / count) * (s / count));
    EXPECT_NEAR(sd, 0.05, 3.0 * 0.05 / std::sqrt(count));
}

TEST(Blur, Deterministic) {
    SimulationSpec spec;
    spec.source = synthetic_target(32);
    spec.n_angles = 5;
    spec.kernel_size = 5;
    spec.seed = 9;
    const BlurredDataset a = blur_dataset(spec);
    const BlurredDataset b = blur_dataset(spec);
    EXPECT_EQ(a.frames, b.frames);
    EXPECT_EQ(a.kernels, b.kernels);
    spec.seed = 10;
    EXPECT_NE(blur_dataset(spec).frames, a.frames);
}

TEST(Blur, SourceRangeChecked) {
    SimulationSpec spec;
    spec.source = ImageTensor(Shape{1, 16, 16}, 1.5);
    spec.kernel_size = 3;
    EXPECT_THROW((void)blur_dataset(spec), Error);
}

TEST(Scenes, InRangeAndSeeded) {
    const ImageTensor t = synthetic_target(64);
    EXPECT_EQ(t.shape(), (Shape{3, 64, 64}));
    for (double v : t.values()) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
    }
    EXPECT_EQ(random_scene(32, 4), random_scene(32, 4));
    EXPECT_NE(random_scene(32, 4), random_scene(32, 5));
    EXPECT_THROW((void)synthetic_target(8), ShapeError);
}
