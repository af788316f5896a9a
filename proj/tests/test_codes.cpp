#include <catch_amalgamated.hpp>

#include <map>
#include <set>
#include <vector>

#include "spectracode/codes.hpp"

using namespace spectracode;
using namespace spectracode::codes;

namespace {

// Dual code enumerated directly: all y in F(q)^n with sum_t y_t h_t = 0.
WeightEnumerator brute_force_dual(const LinearCode& code)
{
    const auto q = code.q();
    const auto n = static_cast<std::size_t>(code.n());
    std::uint64_t total = 1;
    for (std::size_t t = 0; t < n; ++t) total *= q;
    std::vector<WeightEnumerator::Count> counts(n + 1, 0);
    std::vector<std::uint32_t> y(n, 0);
    for (std::uint64_t idx = 0; idx < total; ++idx) {
        std::uint64_t rest = idx;
        for (std::size_t t = 0; t < n; ++t) {
            y[t] = static_cast<std::uint32_t>(rest % q);
            rest /= q;
        }
        std::vector<std::uint32_t> sum(static_cast<std::size_t>(code.k()), 0);
        for (std::size_t t = 0; t < n; ++t)
            for (int j = 0; j < code.k(); ++j)
                sum[static_cast<std::size_t>(j)] =
                    (sum[static_cast<std::size_t>(j)] + y[t] * code.space().digit(code.rows()[t], j)) % q;
        bool zero = true;
        for (auto s : sum) zero = zero && s == 0;
        if (!zero) continue;
        std::size_t weight = 0;
        for (auto v : y) weight += v != 0;
        ++counts[weight];
    }
    return WeightEnumerator(counts);
}

int min_nonzero_weight(const WeightEnumerator& w)
{
    for (std::size_t j = 1; j < w.counts.size(); ++j)
        if (w.counts[j] != 0) return static_cast<int>(j);
    return static_cast<int>(w.counts.size());
}

LinearCode hamming7()
{
    // Columns of the parity-check matrix: all nonzero vectors of F(2)^3 as rows of a [7,4] generator.
    return LinearCode::from_rows(2, {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1},
                                     {1, 1, 0, 1}, {1, 0, 1, 1}, {0, 1, 1, 1}},
                                 "hamming(7,4)");
}

} // namespace

TEST_CASE("encode")
{
    const auto s2 = build_simplex(2);
    const std::vector<std::uint32_t> x{1, 1};
    CHECK(encode(s2, x) == std::vector<std::uint32_t>{1, 1, 0});
    const std::vector<std::uint32_t> zero{0, 0};
    CHECK(encode(s2, zero) == std::vector<std::uint32_t>{0, 0, 0});
    const std::vector<std::uint32_t> bad{1};
    CHECK_THROWS_AS(encode(s2, bad), UsageError);

    const auto id = LinearCode::from_rows(3, {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}});
    const std::vector<std::uint32_t> m{2, 0, 1};
    CHECK(encode(id, m) == m);
}

TEST_CASE("encode is injective")
{
    for (const auto& code : {build_simplex(4), build_even_weight(9), build_gold(5, 1),
                             build_random_code(9, 5, 3, 11)}) {
        std::set<std::vector<std::uint32_t>> seen;
        enumerate_codewords(code, [&](std::uint64_t, std::span<const std::uint32_t> w) {
            seen.emplace(w.begin(), w.end());
        });
        CHECK(seen.size() == code.size());
    }
}

TEST_CASE("enumeration")
{
    std::set<std::vector<std::uint32_t>> words;
    enumerate_codewords(build_simplex(2), [&](std::uint64_t, std::span<const std::uint32_t> w) {
        words.emplace(w.begin(), w.end());
    });
    CHECK(words == std::set<std::vector<std::uint32_t>>{{0, 0, 0}, {1, 0, 1}, {0, 1, 1}, {1, 1, 0}});

    std::uint64_t count = 0;
    enumerate_codewords(build_gold(5, 1), [&](std::uint64_t, std::span<const std::uint32_t>) { ++count; });
    CHECK(count == 1024);

    const auto rep = LinearCode::from_rows(3, {{1}, {1}, {1}});
    count = 0;
    enumerate_codewords(rep, [&](std::uint64_t, std::span<const std::uint32_t>) { ++count; });
    CHECK(count == 3);

    CHECK_THROWS_AS(weight_enumerator(build_even_weight(30)), ResourceError);
}

TEST_CASE("weight enumerators")
{
    CHECK(weight_enumerator(build_simplex(2)) == WeightEnumerator{1, 0, 3, 0});
    const auto rep5 = LinearCode::from_rows(2, {{1}, {1}, {1}, {1}, {1}});
    CHECK(weight_enumerator(rep5) == WeightEnumerator{1, 0, 0, 0, 0, 1});
    CHECK(weight_enumerator(hamming7()) == WeightEnumerator{1, 0, 0, 7, 7, 0, 0, 1});
}

TEST_CASE("MacWilliams transform")
{
    const auto hw = weight_enumerator(hamming7());
    const auto dual = macwilliams_dual(hw, 7, 4, 2);
    CHECK(dual == WeightEnumerator{1, 0, 0, 0, 7, 0, 0, 0});
    CHECK(macwilliams_dual(dual, 7, 3, 2) == hw);

    const auto ew = weight_enumerator(build_even_weight(5));
    CHECK(macwilliams_dual(ew, 5, 4, 2) == WeightEnumerator{1, 0, 0, 0, 0, 1});

    WeightEnumerator broken{1, 1, 1, 0};
    CHECK_THROWS_AS(macwilliams_dual(broken, 3, 2, 2), ConsistencyError);
    WeightEnumerator not_integral{1, 0, 1, 2};
    CHECK_THROWS_AS(macwilliams_dual(not_integral, 3, 2, 2), ConsistencyError);
}

TEST_CASE("MacWilliams agrees with direct dual enumeration")
{
    const std::vector<LinearCode> codes{build_simplex(3), build_simplex(4), build_even_weight(6), build_gold(3, 1),
                                        hamming7(), build_random_code(8, 3, 2, 1), build_random_code(6, 2, 3, 2),
                                        build_random_code(5, 3, 5, 4)};
    for (const auto& code : codes) {
        INFO(code.label());
        const auto direct = brute_force_dual(code);
        CHECK(macwilliams_dual(weight_enumerator(code), static_cast<std::size_t>(code.n()), code.k(), code.q()) ==
              direct);
        CHECK(dual_distance(code) == min_nonzero_weight(direct));
    }
}

TEST_CASE("MacWilliams round trip on built-in families")
{
    for (const auto& code : {build_simplex(5), build_gold(5, 1), build_gold(7, 1), build_even_weight(12),
                             build_random_code(10, 6, 3, 5)}) {
        const auto w = weight_enumerator(code);
        const auto n = static_cast<std::size_t>(code.n());
        const auto d = macwilliams_dual(w, n, code.k(), code.q());
        CHECK(macwilliams_dual(d, n, code.n() - code.k(), code.q()) == w);
    }
}

TEST_CASE("dual distances")
{
    for (int m : {3, 4, 5}) CHECK(dual_distance(build_simplex(m)) == 3);
    CHECK(dual_distance(build_gold(5, 1)) == 5);
    CHECK(dual_distance(build_gold(7, 1)) == 5);
    CHECK(dual_distance(build_even_weight(5)) == 5);
    CHECK(dual_distance(build_even_weight(6)) == 6);
    CHECK(dual_distance(build_gold(3, 1)) >= 3);
    const auto full = LinearCode::from_rows(2, {{1, 0}, {0, 1}});
    CHECK(dual_distance(full) == 3); // dual is {0}
}

TEST_CASE("family constructors")
{
    const auto s2 = build_simplex(2);
    CHECK(s2.n() == 3);
    CHECK(s2.k() == 2);
    CHECK(std::vector<std::uint64_t>(s2.rows().begin(), s2.rows().end()) == std::vector<std::uint64_t>{1, 2, 3});
    const auto s4 = build_simplex(4);
    CHECK(std::set<std::uint64_t>(s4.rows().begin(), s4.rows().end()).size() == 15);
    CHECK_THROWS_AS(build_simplex(1), UsageError);

    const auto g5 = build_gold(5, 1);
    CHECK(g5.n() == 31);
    CHECK(g5.k() == 10);
    CHECK(build_gold(3, 1).k() == 6);
    CHECK_THROWS_AS(build_gold(5, 5), UsageError);
    CHECK_THROWS_AS(build_gold(6, 1), UsageError);

    const auto e2 = build_even_weight(2);
    CHECK(e2.n() == 2);
    CHECK(e2.k() == 1);
    CHECK(e2.encode_index(1) == std::vector<std::uint32_t>{1, 1});
}

TEST_CASE("random codes")
{
    const auto a = build_random_code(8, 3, 2, 1);
    const auto b = build_random_code(8, 3, 2, 1);
    CHECK(std::vector<std::uint64_t>(a.rows().begin(), a.rows().end()) ==
          std::vector<std::uint64_t>(b.rows().begin(), b.rows().end()));
    CHECK(a.k() == 3);
    const auto sq = build_random_code(4, 4, 2, 7);
    CHECK(rank_of(sq.space(), {sq.rows().begin(), sq.rows().end()}) == 4);
    const auto t = build_random_code(6, 2, 3, 2);
    for (auto r : t.rows())
        for (int j = 0; j < 2; ++j) CHECK(t.space().digit(r, j) < 3);
    CHECK_THROWS_AS(build_random_code(3, 4, 2, 1), UsageError);
}

TEST_CASE("rank deficiency is a construction error")
{
    CHECK_THROWS_AS(LinearCode::from_rows(2, {{1, 1}, {1, 1}, {0, 0}}), ConstructionError);
}

TEST_CASE("pair-sum multiplicity")
{
    // d >= 5 families satisfy the bound of 3.
    for (const auto& code : {build_gold(5, 1), build_gold(7, 1), build_even_weight(5), build_even_weight(7)}) {
        REQUIRE(dual_distance(code) >= 5);
        CHECK(max_pair_sum_multiplicity(code) <= 3);
    }
    // Direct n^2 count for the [5,4] even-weight code.
    const auto ew = build_even_weight(5);
    std::map<std::uint64_t, int> counts;
    for (auto r1 : ew.rows())
        for (auto r2 : ew.rows())
            if ((r1 ^ r2) != 0) ++counts[r1 ^ r2];
    int best = 0;
    for (const auto& [v, c] : counts) best = std::max(best, c);
    CHECK(max_pair_sum_multiplicity(ew) == best);

    // Two equal rows over F(3): h + h = 2h is hit by the pair twice plus any other representations.
    const auto dup = LinearCode::from_rows(3, {{1, 0}, {1, 0}, {0, 1}});
    CHECK(max_pair_sum_multiplicity(dup) >= 2);
}

TEST_CASE("generator listing")
{
    CHECK(generator_listing(build_simplex(2)) == "# simplex(m=2) n=3 k=2 q=2\n1 0\n0 1\n1 1\n");
}

TEST_CASE("cached enumerator matches direct computation")
{
    const auto g = build_gold(5, 1);
    CHECK(g.cached_weight_enumerator() == weight_enumerator(g));
    CHECK(&g.cached_weight_enumerator() == &g.cached_weight_enumerator());
}
