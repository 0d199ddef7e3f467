#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "mmtc/finite_field.hpp"
#include "oracles.hpp"

using namespace mmtc;
using namespace mmtc::test_support;

namespace {

// Carry-less multiply then reduce; independent of the log/exp tables.
FfElem slow_gf2n_mul(FfElem a, FfElem b, unsigned n) {
  std::uint64_t r = 0;
  for (unsigned i = 0; i < n; ++i)
    if (b >> i & 1u) r ^= static_cast<std::uint64_t>(a) << i;
  const std::uint64_t poly = primitive_polynomial(n);
  for (int bit = 2 * static_cast<int>(n) - 2; bit >= static_cast<int>(n); --bit)
    if (r >> bit & 1u) r ^= poly << (bit - static_cast<int>(n));
  return static_cast<FfElem>(r);
}

FfMatrix from_rows(std::initializer_list<std::vector<FfElem>> rows) {
  FfMatrix m(0, rows.begin()->size());
  for (const auto& r : rows) m.append_row(r);
  return m;
}

const std::vector<FieldSpec> kFields = {{2, 1}, {3, 1}, {5, 1}, {257, 1}, {2, 2}, {2, 4}, {2, 8}, {2, 12}};

}  // namespace

TEST(FieldSpec, ParseForms) {
  EXPECT_EQ(FieldSpec::parse("GF(2^8)"), (FieldSpec{2, 8}));
  EXPECT_EQ(FieldSpec::parse("GF(257)"), (FieldSpec{257, 1}));
  EXPECT_EQ(FieldSpec::parse("gf(4)"), (FieldSpec{2, 2}));
  EXPECT_EQ(FieldSpec::parse("GF(2)"), (FieldSpec{2, 1}));
  EXPECT_EQ((FieldSpec{2, 8}).to_string(), "GF(2^8)");
  EXPECT_EQ((FieldSpec{2, 8}).order(), 256u);
  EXPECT_THROW(FieldSpec::parse("GF(x)"), std::invalid_argument);
  EXPECT_THROW(FieldSpec::parse("257"), std::invalid_argument);
}

TEST(Field, RejectsNonPrimeCharacteristic) {
  EXPECT_THROW(Field(FieldSpec{6, 1}), std::invalid_argument);
  EXPECT_THROW(Field(FieldSpec{3, 2}), std::invalid_argument);
}

TEST(Field, Gf2IsXorAnd) {
  Field f({2, 1});
  for (FfElem a = 0; a < 2; ++a)
    for (FfElem b = 0; b < 2; ++b) {
      EXPECT_EQ(f.add(a, b), a ^ b);
      EXPECT_EQ(f.mul(a, b), a & b);
    }
}

TEST(Field, ExtensionMultiplyMatchesPolynomialArithmetic) {
  for (unsigned n : {2u, 3u, 4u, 8u}) {
    Field f({2, n});
    const FfElem q = 1u << n;
    for (FfElem a = 0; a < q; a += (n == 8 ? 7 : 1))
      for (FfElem b = 0; b < q; b += (n == 8 ? 5 : 1)) ASSERT_EQ(f.mul(a, b), slow_gf2n_mul(a, b, n)) << n;
  }
  Field f({2, 12});
  Rng rng = make_stream(1, "gf4096");
  for (int i = 0; i < 2000; ++i) {
    FfElem a = f.random(rng), b = f.random(rng);
    ASSERT_EQ(f.mul(a, b), slow_gf2n_mul(a, b, 12));
  }
}

TEST(Field, PrimeMultiplyIsModular) {
  Field f({257, 1});
  for (FfElem a = 0; a < 257; a += 3)
    for (FfElem b = 0; b < 257; b += 2) ASSERT_EQ(f.mul(a, b), (a * b) % 257);
}

TEST(Field, Gf4MultiplicationTable) {
  // Elements 0, 1, g = x, g^2 = x + 1 under x^2 + x + 1.
  Field f({2, 2});
  const FfElem g = 2, g2 = 3;
  EXPECT_EQ(f.mul(g, g), g2);
  EXPECT_EQ(f.mul(g, g2), 1u);
  EXPECT_EQ(f.mul(g2, g2), g);
  EXPECT_EQ(f.generator(), g);
}

TEST(Field, AxiomsOnRandomTriples) {
  Rng rng = make_stream(7, "axioms");
  for (const auto& spec : kFields) {
    Field f(spec);
    for (int i = 0; i < 500; ++i) {
      FfElem a = f.random(rng), b = f.random(rng), c = f.random(rng);
      ASSERT_EQ(f.add(f.add(a, b), c), f.add(a, f.add(b, c))) << spec.to_string();
      ASSERT_EQ(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c))) << spec.to_string();
      ASSERT_EQ(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c))) << spec.to_string();
      ASSERT_EQ(f.add(a, f.neg(a)), 0u);
      ASSERT_EQ(f.mul(a, b), f.mul(b, a));
      if (a != 0) {
        ASSERT_EQ(f.mul(a, f.inv(a)), 1u) << spec.to_string();
      }
    }
  }
}

TEST(Field, GeneratorHasFullOrder) {
  for (const auto& spec : kFields) {
    Field f(spec);
    if (f.order() == 2) continue;
    FfElem g = f.generator();
    FfElem x = 1;
    for (std::uint32_t k = 1; k < f.order() - 1; ++k) {
      x = f.mul(x, g);
      ASSERT_NE(x, 1u) << spec.to_string() << " order divides " << k;
    }
    EXPECT_EQ(f.mul(x, g), 1u);
  }
}

TEST(Field, InverseOfZeroThrows) { EXPECT_THROW(Field({5, 1}).inv(0), std::domain_error); }

TEST(FfRank, SmallCases) {
  Field f2({2, 1});
  EXPECT_EQ(ff_rank(f2, FfMatrix::identity(3)), 3u);
  EXPECT_EQ(ff_rank(f2, from_rows({{1, 1}, {1, 1}})), 1u);
  EXPECT_EQ(ff_rank(f2, FfMatrix(3, 4)), 0u);
  EXPECT_EQ(ff_rank(f2, FfMatrix(0, 0)), 0u);
}

TEST(FfRank, MatchesBitmaskOracleOverGf2) {
  Field f({2, 1});
  Rng rng = make_stream(11, "rank");
  for (int t = 0; t < 2000; ++t) {
    std::size_t r = 1 + t % 7, c = 1 + (t / 7) % 9;
    FfMatrix m = FfMatrix::random(f, r, c, rng);
    std::vector<std::uint32_t> rows(r, 0);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) rows[i] |= m(i, j) << j;
    ASSERT_EQ(ff_rank(f, m), bitmask_rank(rows));
  }
}

TEST(FfRank, InvariantUnderRowSwapAndScaling) {
  Rng rng = make_stream(12, "rank-inv");
  for (const auto& spec : kFields) {
    Field f(spec);
    for (int t = 0; t < 50; ++t) {
      FfMatrix m = FfMatrix::random(f, 4, 5, rng);
      if (t % 3 == 0)
        for (std::size_t j = 0; j < 5; ++j) m(3, j) = f.add(m(0, j), m(1, j));
      std::size_t r0 = ff_rank(f, m);
      FfMatrix s = m;
      s.swap_rows(0, 2);
      FfElem a = f.random_nonzero(rng);
      for (std::size_t j = 0; j < 5; ++j) s(1, j) = f.mul(a, s(1, j));
      ASSERT_EQ(ff_rank(f, s), r0);
      ASSERT_LE(r0, 4u);
    }
  }
}

TEST(FfRank, ExhaustiveGf2TwoByTwoInvertibleIsSixOfSixteen) {
  Field f({2, 1});
  int invertible = 0;
  for (unsigned bits = 0; bits < 16; ++bits) {
    FfMatrix m(2, 2);
    for (unsigned k = 0; k < 4; ++k) m(k / 2, k % 2) = bits >> k & 1u;
    invertible += ff_rank(f, m) == 2;
  }
  EXPECT_EQ(invertible, 6);
}

TEST(FfSolve, IdentityReturnsRhs) {
  Field f({257, 1});
  Rng rng = make_stream(3, "id");
  FfMatrix u = FfMatrix::random(f, 4, 3, rng);
  SolveResult s = ff_solve(f, {FfMatrix::identity(4), u});
  ASSERT_TRUE(s.solved());
  EXPECT_EQ(s.messages, u);
}

TEST(FfSolve, HandCheckedGf5System) {
  Field f({5, 1});
  FfMatrix B = from_rows({{1, 2}, {3, 4}});
  FfMatrix w = from_rows({{4, 0, 2}, {1, 3, 3}});
  SolveResult s = ff_solve(f, {B, ff_mul(f, B, w)});
  ASSERT_TRUE(s.solved());
  EXPECT_EQ(s.rank, 2u);
  EXPECT_EQ(s.messages, w);
}

TEST(FfSolve, EqualRowsReportRankDeficiency) {
  Field f({2, 1});
  FfMatrix B = from_rows({{1, 1}, {1, 1}});
  FfMatrix u = from_rows({{1}, {1}});
  SolveResult s = ff_solve(f, {B, u});
  EXPECT_EQ(s.status, SolveStatus::RankDeficient);
  EXPECT_EQ(s.rank, 1u);
  EXPECT_FALSE(s.determined[0]);
  EXPECT_FALSE(s.determined[1]);
}

TEST(FfSolve, InconsistentOverdeterminedIsFlagged) {
  Field f({257, 1});
  FfMatrix B = from_rows({{1, 0}, {0, 1}, {1, 1}});
  FfMatrix u = from_rows({{5}, {7}, {13}});
  EXPECT_EQ(ff_solve(f, {B, u}).status, SolveStatus::Inconsistent);
  u(2, 0) = 12;
  EXPECT_TRUE(ff_solve(f, {B, u}).solved());
}

TEST(FfSolve, PartialRecoveryReportsDeterminedUnknowns) {
  Field f({2, 8});
  // w0 alone, w1 + w2 combined: only w0 is determined.
  FfMatrix B = from_rows({{1, 0, 0}, {0, 3, 7}});
  FfMatrix w = from_rows({{9}, {100}, {201}});
  SolveResult s = ff_solve(f, {B, ff_mul(f, B, w)});
  EXPECT_EQ(s.status, SolveStatus::RankDeficient);
  EXPECT_EQ(s.determined, (std::vector<bool>{true, false, false}));
  EXPECT_EQ(s.messages(0, 0), 9u);
  EXPECT_EQ(ff_determined_unknowns(f, B), s.determined);
}

TEST(FfSolve, RoundTripsRandomSolvableSystems) {
  Rng rng = make_stream(21, "solve");
  for (const auto& spec : kFields) {
    Field f(spec);
    int solved = 0;
    for (int t = 0; t < 300; ++t) {
      std::size_t M = 1 + t % 5, extra = t % 3;
      FfMatrix B = FfMatrix::random(f, M + extra, M, rng);
      if (ff_rank(f, B) != M) continue;
      FfMatrix w = FfMatrix::random(f, M, 2, rng);
      SolveResult s = ff_solve(f, {B, ff_mul(f, B, w)});
      ASSERT_TRUE(s.solved());
      ASSERT_EQ(s.messages, w);
      ++solved;
    }
    EXPECT_GT(solved, 50) << spec.to_string();
  }
}

TEST(FfSolve, RejectsEntriesOutsideField) {
  Field f({5, 1});
  FfMatrix B = from_rows({{7}});
  EXPECT_THROW(ff_solve(f, {B, from_rows({{1}})}), std::invalid_argument);
}

TEST(Precode, IdentityAndGf4Example) {
  Field f({2, 2});
  std::vector<FfElem> msg = {1, 2};
  EXPECT_EQ(precode(f, msg, 1), msg);
  EXPECT_EQ(precode(f, msg, 2), (std::vector<FfElem>{2, 3}));
  EXPECT_THROW(precode(f, msg, 0), std::invalid_argument);
}

TEST(Precode, RoundTrip) {
  Field f({2, 8});
  Rng rng = make_stream(5, "precode");
  for (int t = 0; t < 1000; ++t) {
    std::vector<FfElem> msg(6);
    for (auto& x : msg) x = f.random(rng);
    FfElem a = f.random_nonzero(rng);
    ASSERT_EQ(unprecode(f, precode(f, msg, a), a), msg);
  }
}

TEST(MatrixCsv, RoundTripWithFieldHeader) {
  Field f({2, 8});
  Rng rng = make_stream(9, "csv");
  FfMatrix m = FfMatrix::random(f, 3, 4, rng);
  std::stringstream ss;
  write_matrix_csv(ss, f, m);
  EXPECT_EQ(ss.str().substr(0, ss.str().find('\n')), "field=GF(2^8),rows=3,cols=4");
  FieldMatrix back = read_matrix_csv(ss);
  EXPECT_EQ(back.field, (FieldSpec{2, 8}));
  EXPECT_EQ(back.matrix, m);
}

TEST(MatrixCsv, RejectsOutOfFieldEntry) {
  std::stringstream ss("field=GF(5),rows=1,cols=2\n1,9\n");
  EXPECT_THROW(read_matrix_csv(ss), std::runtime_error);
}
