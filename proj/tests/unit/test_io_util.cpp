#include <array>
#include <cmath>
#include <cstring>
#include <limits>

#include <gtest/gtest.h>

#include "plantsite/io_util.hpp"
#include "test_support.hpp"

using namespace plantsite;

TEST(FormatNumber, RoundTripsRandomDoubles)
{
    Rng rng(3);
    for (int i = 0; i < 20000; ++i) {
        double v;
        const auto bits = rng.next();
        std::memcpy(&v, &bits, sizeof v);
        if (!std::isfinite(v)) continue;
        EXPECT_EQ(parse_number(format_number(v)), v == 0.0 ? 0.0 : v);
    }
}

TEST(FormatNumber, ShortestForm)
{
    EXPECT_EQ(format_number(0.1), "0.1");
    EXPECT_EQ(format_number(65.2), "65.2");
    EXPECT_EQ(format_number(100.0), "100");
    EXPECT_EQ(format_number(-0.0), "0");
    EXPECT_EQ(format_number(std::numeric_limits<double>::infinity()), "inf");
}

TEST(ParseNumber, RejectsTrailingGarbage)
{
    EXPECT_THROW(parse_number("1.5x"), std::invalid_argument);
    EXPECT_THROW(parse_number(""), std::invalid_argument);
    EXPECT_THROW(parse_number("  "), std::invalid_argument);
    EXPECT_DOUBLE_EQ(parse_number(" 2.5 "), 2.5);
    EXPECT_DOUBLE_EQ(parse_number("+3"), 3.0);
    EXPECT_THROW(parse_integer("1.0"), std::invalid_argument);
    EXPECT_EQ(parse_integer("-17"), -17);
}

TEST(SplitLines, HandlesCrLfAndTrailingNewline)
{
    const auto lines = split_lines("a,b\r\nc,d\n");
    ASSERT_EQ(lines.size(), 2u);
    EXPECT_EQ(lines[0], "a,b");
    EXPECT_EQ(lines[1], "c,d");
}

TEST(CsvTable, ReportsMissingColumnAndBadRow)
{
    CsvTable t("a,b\n1,2\n3,x\n", "t.csv");
    EXPECT_EQ(t.rows(), 2u);
    EXPECT_EQ(t.number(0, t.column("b")), 2.0);
    EXPECT_THROW(t.column("c"), IoError);
    try {
        t.number(1, 1);
        FAIL();
    } catch (const IoError& e) {
        EXPECT_NE(std::string(e.what()).find("t.csv row 2"), std::string::npos);
    }
    EXPECT_THROW(CsvTable("a,b\n1,2,3\n", "x"), IoError);
    EXPECT_THROW(CsvTable("a,a\n", "x"), IoError);
    EXPECT_THROW(CsvTable("", "x"), IoError);
}

TEST(Rng, MatchesReferenceSequence)
{
    // Reference values from an independent splitmix64 + xoshiro256** implementation.
    Rng rng(42);
    EXPECT_EQ(rng.next(), 0x15780b2e0c2ec716ULL);
    EXPECT_EQ(rng.next(), 0x6104d9866d113a7eULL);
    EXPECT_EQ(rng.next(), 0xae17533239e499a1ULL);
}

TEST(Rng, DistributionsStayInRange)
{
    Rng rng(9);
    std::array<int, 7> hits{};
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < 50000; ++i) {
        const double u = rng.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        const auto b = rng.below(7);
        ASSERT_LT(b, 7u);
        ++hits[b];
        const double z = rng.normal();
        sum += z;
        sq += z * z;
    }
    for (int h : hits) EXPECT_NEAR(h / 50000.0, 1.0 / 7.0, 0.01);
    EXPECT_NEAR(sum / 50000.0, 0.0, 0.02);
    EXPECT_NEAR(sq / 50000.0, 1.0, 0.03);
}

TEST(WriteFileAtomic, ReplacesContentAndLeavesNoTemp)
{
    plantsite::testing::TempDir dir;
    const auto p = dir / "out.txt";
    write_file_atomic(p, "first");
    write_file_atomic(p, "second");
    EXPECT_EQ(read_file(p), "second");
    int entries = 0;
    for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir.path())) ++entries;
    EXPECT_EQ(entries, 1);
    EXPECT_THROW(write_file_atomic(dir / "missing/sub/out.txt", "x"), IoError);
    EXPECT_THROW(read_file(dir / "nope"), IoError);
}
