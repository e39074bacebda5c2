#include <atomic>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "bwi/common/csv.hpp"
#include "bwi/common/hash.hpp"
#include "bwi/common/parallel.hpp"
#include "bwi/common/rng.hpp"
#include "bwi/timestamp.hpp"
#include "support.hpp"

namespace bwi {
namespace {

TEST(Csv, ReadsRowsAfterExactHeader) {
  std::istringstream in("\xEF\xBB\xBF" "a,b\r\n1, 2\n\n3,4\n");
  const auto rows = csv::read(in, {"a", "b"});
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0][1], "2");
  EXPECT_EQ(rows[1].line, 4u);
}

TEST(Csv, RejectsWrongHeaderAndFieldCount) {
  std::istringstream wrong("a,c\n1,2\n");
  try {
    csv::read(wrong, {"a", "b"});
    FAIL();
  } catch (const csv::CsvError& e) {
    EXPECT_EQ(e.kind(), csv::CsvErrorKind::WrongHeader);
  }
  std::istringstream short_row("a,b\n1\n");
  try {
    csv::read(short_row, {"a", "b"});
    FAIL();
  } catch (const csv::CsvError& e) {
    EXPECT_EQ(e.kind(), csv::CsvErrorKind::FieldCount);
  }
  std::istringstream empty("");
  EXPECT_THROW(csv::read(empty, {"a"}), csv::CsvError);
}

TEST(Csv, ParsesNumbersStrictly) {
  EXPECT_EQ(csv::parse_double(" 2.5 "), 2.5);
  EXPECT_EQ(csv::parse_double("+1e3"), 1000.0);
  EXPECT_TRUE(std::isinf(*csv::parse_double("inf")));
  EXPECT_FALSE(csv::parse_double("2.5x"));
  EXPECT_FALSE(csv::parse_double(""));
  EXPECT_EQ(csv::parse_int("-12"), -12);
  EXPECT_FALSE(csv::parse_int("1.0"));
}

TEST(Csv, ShortestFormattingRoundTrips) {
  Rng rng(7);
  for (int k = 0; k < 2000; ++k) {
    const double v = std::ldexp(rng.uniform(-1.0, 1.0), static_cast<int>(rng.integer(-40, 40)));
    EXPECT_EQ(*csv::parse_double(csv::num(v)), v);
  }
  EXPECT_EQ(csv::num(0.1), "0.1");
  EXPECT_EQ(csv::num(3.0), "3");
}

TEST(Csv, WriterJoinsMixedFields) {
  std::ostringstream out;
  csv::Writer w(out);
  w.row(std::string("x"), 1.5, 3, 4LL);
  EXPECT_EQ(out.str(), "x,1.5,3,4\n");
}

TEST(Hash, MatchesFnv1aReferenceVectors) {
  EXPECT_EQ(Fnv1a{}.hex(), "cbf29ce484222325");
  EXPECT_EQ(Fnv1a{}.update("a").hex(), "af63dc4c8601ec8c");
  EXPECT_EQ(Fnv1a{}.update("foobar").hex(), "85944171f73967e8");
  EXPECT_EQ(Fnv1a{}.update("foo").update("bar").value(), Fnv1a{}.update("foobar").value());
}

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int k = 0; k < 100; ++k) {
    const double x = a.normal();
    EXPECT_EQ(x, b.normal());
    differs |= x != c.normal();
  }
  EXPECT_TRUE(differs);
}

TEST(Rng, DrawsStayInRange) {
  Rng rng(3);
  double sum = 0.0;
  for (int k = 0; k < 20000; ++k) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    const auto i = rng.integer(-2, 5);
    ASSERT_GE(i, -2);
    ASSERT_LE(i, 5);
  }
  EXPECT_NEAR(sum / 20000.0, 0.5, 0.01);
}

TEST(Parallel, VisitsEveryIndexOnce) {
  for (unsigned threads : {1u, 3u, 8u}) {
    std::vector<std::atomic<int>> hits(1001);
    parallel_for(hits.size(), [&](std::size_t k) { hits[k].fetch_add(1); }, threads);
    for (const auto& h : hits) ASSERT_EQ(h.load(), 1);
  }
}

TEST(Timestamp, ParsesOffsetsAndFractions) {
  const auto z = parse_rfc3339("2011-03-04T12:00:00Z");
  const auto off = parse_rfc3339("2011-03-04T14:00:00+02:00");
  ASSERT_TRUE(z && off);
  EXPECT_EQ(*z, *off);
  const auto frac = parse_rfc3339("2011-03-04T12:00:00.25Z");
  EXPECT_EQ((*frac - *z).count(), 250000);
  EXPECT_EQ(format_rfc3339(*frac), "2011-03-04T12:00:00.250000Z");
  EXPECT_EQ(calendar_year(*parse_rfc3339("2011-01-01T00:30:00+01:00")), 2010);
}

TEST(Timestamp, RejectsMalformedText) {
  for (const char* bad : {"2011-03-04", "2011-03-04T12:00:00", "2011-02-30T00:00:00Z",
                          "2011-03-04T25:00:00Z", "2011-03-04T12:00:00+0200",
                          "2011-03-04T12:00:00Zjunk", "2011-3-04T12:00:00Z"}) {
    EXPECT_FALSE(parse_rfc3339(bad)) << bad;
  }
}

TEST(Timestamp, FormatParseRoundTripProperty) {
  Rng rng(11);
  for (int k = 0; k < 1000; ++k) {
    const Timestamp t{std::chrono::microseconds(rng.integer(0, 4'000'000'000'000'000LL))};
    const auto back = parse_rfc3339(format_rfc3339(t));
    ASSERT_TRUE(back);
    EXPECT_EQ(*back, t);
  }
}

}  // namespace
}  // namespace bwi
