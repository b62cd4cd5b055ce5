#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "coarse.hpp"
#include "ddpgd/archive.hpp"

using namespace ddpgd;
namespace fs = std::filesystem;

namespace {

class ArchiveTest : public ::testing::Test {
protected:
  static void SetUpTestSuite() {
    Problem pb(coarse::stokes_darcy());
    auto opt = pb.offline_options();
    sur_ = new SubdomainSurrogate(build_surrogate(*pb.sd[1], pb.op_of(1), opt));
  }
  static void TearDownTestSuite() {
    delete sur_;
    sur_ = nullptr;
  }
  std::string path(const std::string& name) const { return (fs::temp_directory_path() / ("ddpgd_" + name)).string(); }
  static std::vector<char> bytes(const std::string& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), {}};
  }
  static void put(const std::string& p, const std::vector<char>& b) {
    std::ofstream f(p, std::ios::binary);
    f.write(b.data(), static_cast<std::streamsize>(b.size()));
  }

  static SubdomainSurrogate* sur_;
};

SubdomainSurrogate* ArchiveTest::sur_ = nullptr;

bool same_bits(const SepVector& a, const SepVector& b) {
  if (a.rank() != b.rank() || a.param_sizes() != b.param_sizes()) return false;
  for (std::size_t r = 0; r < a.rank(); ++r) {
    const auto &x = a[r], &y = b[r];
    if (x.space.size() != y.space.size() ||
        std::memcmp(x.space.data(), y.space.data(), sizeof(double) * static_cast<std::size_t>(x.space.size())))
      return false;
    for (std::size_t k = 0; k < x.params.size(); ++k)
      if (x.params[k].size() != y.params[k].size() ||
          std::memcmp(x.params[k].data(), y.params[k].data(), sizeof(double) * static_cast<std::size_t>(x.params[k].size())))
        return false;
  }
  return true;
}

}  // namespace

TEST_F(ArchiveTest, RoundTripIsBitExact) {
  auto p = path("roundtrip.bin");
  save_surrogate(*sur_, p);
  auto s = load_surrogate(p);
  EXPECT_EQ(s.name, sur_->name);
  EXPECT_EQ(s.physics, sur_->physics);
  EXPECT_EQ(s.ndofs, sur_->ndofs);
  EXPECT_EQ(s.free, sur_->free);
  EXPECT_EQ(s.trace, sur_->trace);
  EXPECT_EQ(s.global_axes, sur_->global_axes);
  ASSERT_EQ(s.params.axes.size(), sur_->params.axes.size());
  for (std::size_t a = 0; a < s.params.axes.size(); ++a) {
    EXPECT_EQ(s.params.axes[a].name, sur_->params.axes[a].name);
    EXPECT_EQ(s.params.axes[a].points, sur_->params.axes[a].points);
  }
  EXPECT_TRUE(same_bits(s.data, sur_->data));
  EXPECT_TRUE(same_bits(s.lifting, sur_->lifting));
  ASSERT_EQ(s.traces.size(), sur_->traces.size());
  for (std::size_t j = 0; j < s.traces.size(); ++j) EXPECT_TRUE(same_bits(s.traces[j], sur_->traces[j])) << j;
  EXPECT_EQ(s.modes_raw, sur_->modes_raw);
  EXPECT_EQ(s.modes_compressed, sur_->modes_compressed);
  // saving the loaded surrogate reproduces the file byte for byte
  auto q = path("roundtrip2.bin");
  save_surrogate(s, q);
  EXPECT_EQ(bytes(p), bytes(q));
  fs::remove(p);
  fs::remove(q);
}

TEST_F(ArchiveTest, CorruptedHeaderIsRejected) {
  auto p = path("corrupt.bin");
  save_surrogate(*sur_, p);
  auto b = bytes(p);
  b[8 + 4 + 8 + 20] ^= 0x20;
  put(p, b);
  EXPECT_THROW(load_surrogate(p), ArchiveError);
  fs::remove(p);
}

TEST_F(ArchiveTest, CorruptedPayloadIsRejected) {
  auto p = path("payload.bin");
  save_surrogate(*sur_, p);
  auto b = bytes(p);
  b[b.size() - 3] ^= 0x01;
  put(p, b);
  EXPECT_THROW(load_surrogate(p), ArchiveError);
  fs::remove(p);
}

TEST_F(ArchiveTest, VersionMismatchIsRejected) {
  auto p = path("version.bin");
  save_surrogate(*sur_, p);
  auto b = bytes(p);
  b[8] = static_cast<char>(archive::kVersion + 1);
  put(p, b);
  try {
    load_surrogate(p);
    FAIL() << "version mismatch not detected";
  } catch (const ArchiveError& e) {
    EXPECT_NE(std::string(e.what()).find("version"), std::string::npos);
  }
  fs::remove(p);
}

TEST_F(ArchiveTest, TruncatedAndForeignFilesAreRejected) {
  auto p = path("trunc.bin");
  save_surrogate(*sur_, p);
  auto b = bytes(p);
  b.resize(b.size() / 2);
  put(p, b);
  EXPECT_THROW(load_surrogate(p), ArchiveError);
  put(p, {'n', 'o', 't', ' ', 'a', 'n', ' ', 'a', 'r', 'c', 'h', 'i', 'v', 'e', '!', '!'});
  EXPECT_THROW(load_surrogate(p), ArchiveError);
  fs::remove(p);
  EXPECT_THROW(load_surrogate(p), ArchiveError);
}
