#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>

#include "rsa/io.hpp"
#include "test_support.hpp"

using namespace rsa;

namespace {

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "rsa_io_test";
    std::filesystem::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST(Ptf, HeaderLayout) {
    const ImageTensor x(Shape{2, 3, 4}, 0.25);
    const auto bytes = encode_ptf(x);
    ASSERT_EQ(bytes.size(), 20u + 8u * 24u);
    EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "RSAT");
    EXPECT_EQ(bytes[4], 1);  // version, little-endian
    EXPECT_EQ(bytes[8], 2);
    EXPECT_EQ(bytes[12], 3);
    EXPECT_EQ(bytes[16], 4);
    // 0.25 = 0x3FD0000000000000, least significant byte first
    EXPECT_EQ(bytes[20 + 7], 0x3F);
    EXPECT_EQ(bytes[20 + 6], 0xD0);
}

TEST(Ptf, RoundTripIsBitExact) {
    std::mt19937_64 rng(21);
    ImageTensor x = oracle::random_image(Shape{3, 5, 6}, rng, -1e3, 1e3);
    x(0, 0, 0) = -0.0;
    x(1, 1, 1) = 1e-310;
    const auto path = scratch("round.ptf");
    write_ptf(path, x);
    const ImageTensor back = read_ptf(path);
    EXPECT_EQ(back.shape(), x.shape());
    EXPECT_EQ(std::memcmp(back.values().data(), x.values().data(), 8 * x.size()), 0);
}

TEST(Ptf, RejectsCorruptInput) {
    auto bytes = encode_ptf(ImageTensor(Shape{1, 2, 2}));
    auto bad_magic = bytes;
    bad_magic[0] = 'X';
    EXPECT_THROW((void)decode_ptf(bad_magic), IoError);
    auto truncated = bytes;
    truncated.pop_back();
    EXPECT_THROW((void)decode_ptf(truncated), IoError);
    auto bad_version = bytes;
    bad_version[4] = 9;
    EXPECT_THROW((void)decode_ptf(bad_version), IoError);
    EXPECT_THROW((void)read_ptf(scratch("does_not_exist.ptf")), IoError);
}

TEST(Png, ByteConversionClampsAndRoundsHalfUp) {
    EXPECT_EQ(to_byte(-0.5), 0);
    EXPECT_EQ(to_byte(2.0), 255);
    EXPECT_EQ(to_byte(0.5), 128);  // 127.5 rounds up
    EXPECT_EQ(to_byte(1.0 / 255.0), 1);
}

TEST(Png, RgbRoundTripAtEightBits) {
    std::mt19937_64 rng(22);
    const ImageTensor x = oracle::random_image(Shape{3, 7, 5}, rng);
    const auto path = scratch("rgb.png");
    write_png(path, x);
    const ImageTensor back = read_image(path);
    ASSERT_EQ(back.shape(), x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) {
        EXPECT_EQ(back.values()[i], to_byte(x.values()[i]) / 255.0);
    }
}

TEST(Png, GrayAndKernelExport) {
    GeneralizedKernel k(3);
    k.at(0, 0) = 0.5;
    k.at(1, 1) = 0.25;
    const auto path = scratch("kernel.png");
    write_kernel_png(path, k);
    const ImageTensor img = read_png(path);
    EXPECT_EQ(img.shape(), (Shape{1, 3, 3}));
    EXPECT_EQ(img(0, 1, 1), 1.0);
    EXPECT_EQ(img(0, 2, 2), 128.0 / 255.0);
    EXPECT_THROW(write_png(scratch("bad.png"), ImageTensor(Shape{2, 3, 3})), ShapeError);
}

TEST(Files, ListedInNameOrder) {
    const auto dir = std::filesystem::temp_directory_path() / "rsa_io_list";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    for (const char* n : {"b.ptf", "a.ptf", "c.txt"}) std::ofstream(dir / n) << "x";
    const auto files = list_files(dir, ".ptf");
    ASSERT_EQ(files.size(), 2u);
    EXPECT_EQ(files[0].filename(), "a.ptf");
    EXPECT_EQ(files[1].filename(), "b.ptf");
}
