#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include "eqlab/error.hpp"
#include "eqlab/io.hpp"
#include "eqlab/rng.hpp"

namespace io = eqlab::io;

TEST(FormatDouble, RoundTripsExactly) {
  eqlab::CounterStream s(1, 0, 0, 0);
  for (int i = 0; i < 20000; ++i) {
    const double v = std::ldexp(s.uniform() - 0.5, static_cast<int>(s.next_u64() % 60) - 30);
    double back = 0.0;
    ASSERT_TRUE(io::parse_double(io::format_double(v), back));
    ASSERT_EQ(back, v);
  }
  EXPECT_EQ(io::format_double(0.5), "0.5");
  EXPECT_EQ(io::format_double(3.0), "3");
}

TEST(ParseNumbers, Strict) {
  double d = 0;
  EXPECT_FALSE(io::parse_double("", d));
  EXPECT_FALSE(io::parse_double("1.5x", d));
  EXPECT_FALSE(io::parse_double("1.5 x", d));
  EXPECT_TRUE(io::parse_double(" 1.5 ", d));  // surrounding blanks are tolerated
  EXPECT_EQ(d, 1.5);
  EXPECT_TRUE(io::parse_double("-2.25", d));
  EXPECT_EQ(d, -2.25);
  std::int64_t i = 0;
  EXPECT_FALSE(io::parse_int64("3.0", i));
  EXPECT_TRUE(io::parse_int64("-12", i));
  EXPECT_EQ(i, -12);
  std::uint64_t u = 0;
  EXPECT_FALSE(io::parse_uint64("-1", u));
  EXPECT_TRUE(io::parse_uint64("18446744073709551615", u));
  EXPECT_EQ(u, std::numeric_limits<std::uint64_t>::max());
}

TEST(SplitCsv, Fields) {
  const auto f = io::split_csv_line("a,,b");
  ASSERT_EQ(f.size(), 3u);
  EXPECT_EQ(f[0], "a");
  EXPECT_EQ(f[1], "");
  EXPECT_EQ(f[2], "b");
}

TEST(ParseDoubleList, ValuesAndErrors) {
  const auto v = io::parse_double_list("0.1,0.5,1");
  ASSERT_EQ(v.size(), 3u);
  EXPECT_EQ(v[1], 0.5);
  EXPECT_THROW(io::parse_double_list("0.1,abc"), eqlab::ValidationError);
}

TEST(AtomicWrite, ReplacesContents) {
  const auto dir = std::filesystem::temp_directory_path() / "eqlab_io_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "f.txt";
  io::write_file_atomic(path, "one");
  io::write_file_atomic(path, "two");
  EXPECT_EQ(io::read_file(path), "two");
  EXPECT_FALSE(std::filesystem::exists(dir / "f.txt.tmp"));
  std::filesystem::remove_all(dir);
}
