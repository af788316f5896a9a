#include <catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <numbers>

#include "spectracode/ensemble.hpp"

using namespace spectracode;
using namespace spectracode::ensemble;
using Catch::Matchers::WithinAbs;

TEST_CASE("character values")
{
    const auto f2 = galois::GaloisField::prime(2);
    CHECK(character(*f2, 0) == cdouble(1.0, 0.0));
    CHECK(character(*f2, 1) == cdouble(-1.0, 0.0));

    const auto f3 = galois::GaloisField::prime(3);
    const auto w = character(*f3, 1);
    CHECK_THAT(w.real(), WithinAbs(std::cos(2 * std::numbers::pi / 3), 1e-15));
    CHECK_THAT(w.imag(), WithinAbs(std::sin(2 * std::numbers::pi / 3), 1e-15));
    CHECK(std::abs(std::pow(w, 3) - cdouble(1.0, 0.0)) < 1e-12);

    const auto f8 = galois::GaloisField::binary(3);
    for (std::uint32_t a = 0; a < 8; ++a) {
        const double expected = f8->trace(a) ? -1.0 : 1.0;
        CHECK(character(galois::FieldElement{f8, a}) == cdouble(expected, 0.0));
    }
}

TEST_CASE("character is additive-to-multiplicative")
{
    for (const auto& f : {galois::GaloisField::binary(4), galois::GaloisField::prime(5), galois::GaloisField::prime(7)})
        for (std::uint32_t x = 0; x < f->order(); ++x)
            for (std::uint32_t y = 0; y < f->order(); ++y) {
                const auto lhs = character(*f, f->add(x, y));
                const auto rhs = character(*f, x) * character(*f, y);
                REQUIRE(std::abs(lhs - rhs) < 1e-12);
                REQUIRE(std::abs(std::abs(lhs) - 1.0) < 1e-12);
            }
}

TEST_CASE("epsilon rows")
{
    const std::vector<std::uint32_t> zero(4, 0);
    for (auto z : epsilon_row(zero, 3)) CHECK(z == cdouble(1.0, 0.0));
    const std::vector<std::uint32_t> c{1, 0, 1};
    CHECK(epsilon_row(c, 2) == std::vector<cdouble>{{-1, 0}, {1, 0}, {-1, 0}});
    const std::vector<std::uint32_t> c5{4, 2, 0, 3, 1};
    const auto row = epsilon_row(c5, 5);
    cdouble ip = 0;
    for (auto z : row) ip += z * std::conj(z);
    CHECK_THAT(ip.real(), WithinAbs(5.0, 1e-12));
    const std::vector<std::uint32_t> bad{2};
    CHECK_THROWS_AS(epsilon_row(bad, 2), UsageError);
}

TEST_CASE("sample_phi rows are character images of codewords")
{
    const auto code = codes::build_random_code(6, 3, 3, 9);
    const auto s = sample_phi(code, 20, 1234);
    REQUIRE(s.entries.rows() == 20);
    REQUIRE(s.entries.cols() == 6);
    for (std::size_t i = 0; i < s.N; ++i) {
        const auto word = code.encode_index(s.messages[i]);
        const auto expected = epsilon_row(word, 3);
        for (std::size_t t = 0; t < s.n; ++t) REQUIRE(std::abs(s.entries(i, t) - expected[t]) < 1e-15);
    }
}

TEST_CASE("message-0 hook gives the all-ones row")
{
    const auto s = phi_from_messages(codes::build_simplex(3), {0});
    for (std::size_t t = 0; t < s.n; ++t) CHECK(s.entries(0, t) == cdouble(1.0, 0.0));
}

TEST_CASE("sampling is deterministic and seed-sensitive")
{
    const auto code = codes::build_gold(5, 1);
    const auto a = sample_phi(code, 40, 77);
    const auto b = sample_phi(code, 40, 77);
    const auto c = sample_phi(code, 40, 78);
    CHECK(a.messages == b.messages);
    CHECK(a.entries == b.entries);
    CHECK(a.messages != c.messages);
}

TEST_CASE("sampling is with replacement")
{
    // 50 rows from a 4-word code must repeat rows.
    const auto s = sample_phi(codes::build_simplex(2), 50, 3);
    CHECK(s.N == 50);
    std::map<std::uint64_t, int> counts;
    for (auto m : s.messages) ++counts[m];
    CHECK(counts.size() <= 4);
}

TEST_CASE("codeword frequencies are uniform (chi-square)")
{
    const auto s = sample_phi(codes::build_simplex(2), 100000, 2024);
    std::array<double, 4> counts{};
    for (auto m : s.messages) counts[m] += 1.0;
    double chi2 = 0.0;
    for (double c : counts) chi2 += (c - 25000.0) * (c - 25000.0) / 25000.0;
    // 3 degrees of freedom; 0.9999 quantile is about 21.1.
    CHECK(chi2 < 21.1);
}

TEST_CASE("real view agrees with complex entries")
{
    const auto s = sample_phi(codes::build_gold(5, 1), 10, 5);
    const auto r = s.real_entries();
    for (std::size_t i = 0; i < s.N; ++i)
        for (std::size_t t = 0; t < s.n; ++t) CHECK(cdouble(r(i, t), 0.0) == s.entries(i, t));
    const auto s3 = sample_phi(codes::build_random_code(4, 2, 3, 1), 3, 5);
    CHECK_THROWS_AS(s3.real_entries(), UsageError);
}

TEST_CASE("CSV export")
{
    const auto s = phi_from_messages(codes::build_simplex(2), {0, 3});
    CHECK(phi_to_csv(s) == "c1,c2,c3\n1,1,1\n-1,-1,1\n");
    const auto s3 = phi_from_messages(codes::LinearCode::from_rows(3, {{1}}), {1});
    CHECK(phi_to_csv(s3).rfind("re1,im1\n", 0) == 0);
}

TEST_CASE("seed derivation")
{
    const SeedSpec spec{42};
    CHECK(spec.child(0, MatrixRole::a) != spec.child(0, MatrixRole::b));
    CHECK(spec.child(0, MatrixRole::a) != spec.child(1, MatrixRole::a));
    CHECK(spec.child(5, MatrixRole::b) == SeedSpec{42}.child(5, MatrixRole::b));
}

TEST_CASE("rng bounded draws are uniform")
{
    Rng rng(99);
    std::array<double, 7> counts{};
    for (int i = 0; i < 70000; ++i) counts[rng.uniform(7)] += 1.0;
    double chi2 = 0.0;
    for (double c : counts) chi2 += (c - 10000.0) * (c - 10000.0) / 10000.0;
    CHECK(chi2 < 27.9); // 6 dof, 0.9999 quantile
    double s = 0.0, ss = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double x = rng.normal();
        s += x;
        ss += x * x;
    }
    CHECK(std::abs(s / 1e5) < 0.02);
    CHECK(std::abs(ss / 1e5 - 1.0) < 0.03);
}
