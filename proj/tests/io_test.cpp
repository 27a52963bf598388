#include <gtest/gtest.h>

#include <bit>
#include <cstring>
#include <random>
#include <sstream>

#include "splatbudget/image_io.hpp"
#include "splatbudget/serialization.hpp"
#include "test_support.hpp"

namespace sb = splatbudget;
namespace sbt = splatbudget::testing;

TEST(ReadPnm, PlainAndBinaryGray) {
  std::istringstream plain("P2\n# comment\n3 2\n4\n0 1 2\n3 4 0\n");
  const auto a = sb::read_pnm(plain);
  ASSERT_EQ(a.height(), 2u);
  ASSERT_EQ(a.width(), 3u);
  EXPECT_EQ(a(0, 1), 0.25);
  EXPECT_EQ(a(1, 1), 1.0);

  std::string bin = "P5 2 2 255\n";
  bin += std::string("\x00\xff\x80\x40", 4);
  std::istringstream binary(bin);
  const auto b = sb::read_pnm(binary);
  EXPECT_EQ(b(0, 0), 0.0);
  EXPECT_EQ(b(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(b(1, 0), 128.0 / 255.0);
}

TEST(ReadPnm, ColorUsesBt601Luminance) {
  std::istringstream in("P3 1 1 255\n255 0 0\n");
  EXPECT_DOUBLE_EQ(sb::read_pnm(in)(0, 0), 0.299);
}

TEST(ReadPnm, RejectsMalformedInput) {
  std::istringstream bad_magic("P7 1 1 255\n0");
  EXPECT_THROW(sb::read_pnm(bad_magic), sb::IoError);
  std::istringstream truncated("P5 2 2 255\nab");
  EXPECT_THROW(sb::read_pnm(truncated), sb::IoError);
  std::istringstream over("P2 1 1 4\n9\n");
  EXPECT_THROW(sb::read_pnm(over), sb::IoError);
}

TEST(WritePgm, MaskRoundTrip) {
  const sb::MaskGrid mask(2, 3, {0, 1, 1, 0, 0, 1});
  std::stringstream buf;
  sb::write_pgm(buf, mask);
  EXPECT_EQ(buf.str().substr(0, 11), "P5\n3 2\n255\n");
  const auto back = sb::read_pnm(buf);
  for (std::size_t i = 0; i < mask.size(); ++i) EXPECT_EQ(back.values()[i], mask.values()[i] ? 1.0 : 0.0);
}

TEST(PyramidJson, RoundTripProperty) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = sbt::random_pyramid(rng, sbt::random_spec(rng, 2, 4, 3, 4));
    const auto text = sb::pyramid_to_json(p).dump();
    EXPECT_EQ(sb::pyramid_from_json(sb::json::parse(text)), p);
  }
}

TEST(PyramidJson, Schema) {
  const auto j = sb::pyramid_to_json(sbt::single_view(2, {{0.9, 0.2, 0.5, 0.7}}, {2, 2}));
  EXPECT_EQ(j["num_views"], 1);
  EXPECT_EQ(j["num_levels"], 2);
  EXPECT_EQ(j["grids"][0][0]["h"], 2);
  EXPECT_EQ(j["grids"][0][0]["w"], 2);
  EXPECT_EQ(j["grids"][0][0]["values"][0], 0.9);
  EXPECT_THROW(sb::pyramid_from_json(sb::json::parse(R"({"num_views":1})")), sb::InvalidArgument);
  EXPECT_THROW(sb::pyramid_from_json(sb::json::parse(
                   R"({"num_views":1,"num_levels":2,"grids":[[{"h":2,"w":2,"values":[1,2,3]}]]})")),
               sb::InvalidArgument);
}

TEST(TableBinary, ExactByteLayout) {
  const auto table = sb::build_table(sbt::single_view(2, {{0.9, 0.2, 0.5, 0.7}}, {2, 2}));
  std::stringstream buf;
  sb::write_table_binary(buf, table);
  const std::string bytes = buf.str();
  ASSERT_EQ(bytes.size(), 8u * (1 + 4 + 4 + 2));

  auto u64_at = [&](std::size_t word) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(bytes[word * 8 + i]);
    return v;
  };
  EXPECT_EQ(u64_at(0), 4u);
  EXPECT_EQ(std::bit_cast<double>(u64_at(1)), 0.9);
  EXPECT_EQ(std::bit_cast<double>(u64_at(4)), 0.2);
  EXPECT_EQ(u64_at(5), 7u);
  EXPECT_EQ(u64_at(8), 16u);
  EXPECT_EQ(u64_at(9), 4u);
  EXPECT_EQ(u64_at(10), 16u);

  EXPECT_EQ(sb::read_table_binary(buf), table);
}

TEST(TableBinary, RoundTripPropertyAndCorruption) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const auto table = sb::build_table(sbt::random_pyramid(rng, sbt::random_spec(rng, 2, 4, 3, 4)));
    std::stringstream buf;
    sb::write_table_binary(buf, table);
    EXPECT_EQ(sb::read_table_binary(buf), table);
  }
  const auto table = sb::build_table(sbt::single_view(2, {{0.9, 0.2, 0.5, 0.7}}, {2, 2}));
  std::stringstream buf;
  sb::write_table_binary(buf, table);
  std::string bytes = buf.str();
  std::istringstream truncated(bytes.substr(0, bytes.size() - 3));
  EXPECT_THROW(sb::read_table_binary(truncated), sb::IoError);
  bytes[8 * 5] = 99;  // counts[0] now above counts[1]
  std::istringstream corrupt(bytes);
  EXPECT_THROW(sb::read_table_binary(corrupt), sb::IoError);
}

TEST(Manifest, InfiniteTauAsString) {
  const auto p = sbt::single_view(2, {{0.9, 0.2, 0.5, 0.7}}, {2, 2});
  const auto m = sb::mask_manifest(sb::compute_masks(p, std::numeric_limits<double>::infinity()),
                                   std::numeric_limits<double>::infinity());
  EXPECT_EQ(m["tau"], "inf");
  EXPECT_EQ(m["total"], 4);
  EXPECT_EQ(m["counts_per_level"], (std::vector<std::int64_t>{4, 0}));
  EXPECT_EQ(sb::real_from_json(m["tau"]), std::numeric_limits<double>::infinity());
}

TEST(Placements, CsvHeaderAndRows) {
  const std::vector<sb::GaussianPlacement> ps{{0, 1, 0, 1}, {1, 2, 3, 4}};
  EXPECT_EQ(sb::placements_csv(ps), "view,level,row,col\n0,1,0,1\n1,2,3,4\n");
}

TEST(PoseJson, NestedAndFlat) {
  const auto nested = sb::json::parse("[[1,0,0,1],[0,1,0,2],[0,0,1,3],[0,0,0,1]]");
  const auto flat = sb::json::parse("[1,0,0,1, 0,1,0,2, 0,0,1,3, 0,0,0,1]");
  const auto a = sb::pose_from_json(nested);
  EXPECT_EQ(a.center(), Eigen::Vector3d(1, 2, 3));
  EXPECT_EQ(sb::pose_from_json(flat).matrix(), a.matrix());
  EXPECT_EQ(sb::pose_to_json(a), nested);
  EXPECT_THROW(sb::pose_from_json(sb::json::parse("[[1,0,0],[0,1,0]]")), sb::InvalidArgument);
}
