#include <catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "spectracode/moments.hpp"
#include "spectracode/reference.hpp"

using namespace spectracode;
using namespace spectracode::reference;
using Catch::Matchers::WithinAbs;

TEST_CASE("MP CDF boundaries")
{
    CHECK(mp_cdf(0.5, 0.01) == 0.0);
    CHECK(mp_cdf(0.5, 3.0) == 1.0);
    CHECK(mp_cdf(2.0, 0.0) == 0.5);
    CHECK(mp_cdf(2.0, -1.0) == 0.0);
    CHECK_THROWS_AS(mp_cdf(0.0, 1.0), UsageError);
}

TEST_CASE("MP CDF is continuous at the upper edge and monotone")
{
    for (double y : {0.25, 0.5, 1.0, 2.0}) {
        const auto s = mp_support(y);
        CHECK_THAT(mp_cdf(y, s.upper - 1e-12), WithinAbs(1.0, 1e-6));
        double prev = 0.0;
        for (int i = 0; i <= 200; ++i) {
            const double x = s.upper * i / 200.0;
            const double f = mp_cdf(y, x);
            REQUIRE(f >= prev - 1e-14);
            prev = f;
        }
    }
}

TEST_CASE("MP CDF agrees with a Riemann sum of the density")
{
    const double y = 0.5;
    const auto s = mp_support(y);
    const double x = 1.3;
    const int steps = 200000;
    double acc = 0.0;
    const double h = (x - s.lower) / steps;
    for (int i = 0; i < steps; ++i) acc += mp_density(y, s.lower + (i + 0.5) * h) * h;
    CHECK_THAT(mp_cdf(y, x), WithinAbs(acc, 1e-6));
}

TEST_CASE("numeric MP moments match the closed form")
{
    for (double y : {0.1, 0.5, 1.0, 2.0, 4.0})
        for (int l = 1; l <= 4; ++l) CHECK_THAT(mp_numeric_moment(y, l), WithinAbs(moments::mp_moment(l, y), 1e-6));
}

TEST_CASE("tabulated MP law reproduces the first moment")
{
    const double y = 0.5;
    const auto s = mp_support(y);
    const auto t = tabulate([&](double x) { return mp_cdf(y, x); }, s.lower, s.upper, 4001);
    CHECK_THAT(t.moment(1), WithinAbs(1.0, 1e-6));
}

TEST_CASE("tabulated CDF evaluation and moments")
{
    // Atom 0.5 at 0, then uniform on [1, 3].
    const TabulatedCdf t({0.0, 1.0, 3.0}, {0.5, 0.5, 1.0}, 0.5, 0.01);
    CHECK(t.right(-0.1) == 0.0);
    CHECK(t.left(0.0) == 0.0);
    CHECK(t.right(0.0) == 0.5);
    CHECK(t.right(2.0) == 0.75);
    CHECK(t.left(2.0) == 0.75);
    CHECK(t.right(3.0) == 1.0);
    CHECK(t.moment(0) == 1.0);
    CHECK_THAT(t.moment(1), WithinAbs(1.0, 1e-15));
    CHECK_THAT(t.moment(2), WithinAbs(0.5 * 13.0 / 3.0, 1e-15));
    CHECK_THROWS_AS(TabulatedCdf({0.0, 1.0}, {0.5, 0.9}, 0.0, 0.0), UsageError);
    CHECK_THROWS_AS(TabulatedCdf({1.0, 0.0}, {0.5, 1.0}, 0.0, 0.0), UsageError);

    // Distance to the ESD of {0, 0, 2, 2}: worst gap is 0.25 around z = 1 and z = 2.
    const auto esd = spectra::make_esd({0, 0, 2, 2});
    CHECK_THAT(spectra::kolmogorov_distance(esd, t), WithinAbs(0.25, 1e-15));
}

TEST_CASE("baseline samples")
{
    const auto a = baseline_gram_sample(20, 30, 10, EntryModel::rademacher, 5);
    const auto b = baseline_gram_sample(20, 30, 10, EntryModel::rademacher, 5);
    CHECK(a.real_matrix() == b.real_matrix());
    const auto eigs = spectra::hermitian_eigenvalues(a);
    CHECK(std::count(eigs.begin(), eigs.end(), 0.0) >= 10);

    const auto c = baseline_gram_sample(8, 5, 12, EntryModel::complex_gaussian, 1);
    CHECK_FALSE(c.is_real());
    const auto ec = spectra::hermitian_eigenvalues(c);
    CHECK(std::count(ec.begin(), ec.end(), 0.0) >= 3);
}

TEST_CASE("baseline trace concentrates at y_a")
{
    for (auto model : {EntryModel::rademacher, EntryModel::complex_gaussian}) {
        const std::size_t Na = 16, Nb = 24, n = 12;
        std::vector<double> xs;
        for (std::uint64_t s = 0; s < 200; ++s)
            xs.push_back(baseline_gram_sample(Na, Nb, n, model, 1000 + s).trace() / static_cast<double>(Na));
        double mean = 0, ss = 0;
        for (double x : xs) mean += x;
        mean /= 200;
        for (double x : xs) ss += (x - mean) * (x - mean);
        const double se = std::sqrt(ss / 199 / 200);
        CHECK(std::abs(mean - 12.0 / 16.0) <= 5 * se);
    }
}

TEST_CASE("reference sizes")
{
    const auto s = baseline_sizes(0.5, 0.5, 1024);
    CHECK(s.n == 512);
    CHECK(s.N_b == 1024);
    CHECK_THROWS_AS(baseline_sizes(0.01, 0.5, 1024), UsageError);
    CHECK_THROWS_AS(baseline_sizes(0.5, 50.0, 1024), UsageError);
}

TEST_CASE("small reference table")
{
    const auto t = reference_cdf(0.5, 0.5, 128, 8, 77, 2);
    const auto& cdf = t.cdf;
    CHECK(cdf.values().back() == 1.0);
    CHECK(std::is_sorted(cdf.values().begin(), cdf.values().end()));
    CHECK(std::abs(cdf.atom() - 0.5) <= 1.0 / 128);
    CHECK(cdf.resolution() == 1.0 / std::sqrt(128.0 * 8.0) + 1.0 / 128.0);
    CHECK(std::abs(cdf.moment(1) - 0.5) <= 3 * cdf.resolution());

    // Thread count does not change the table.
    const auto serial = reference_cdf(0.5, 0.5, 128, 8, 77, 1);
    CHECK(reference_csv(serial) == reference_csv(t));

    // Independent seeds agree within twice the resolution.
    const auto other = reference_cdf(0.5, 0.5, 128, 8, 78, 2);
    CHECK(spectra::kolmogorov_distance(t.cdf, other.cdf) <= 2 * t.cdf.resolution());
}

TEST_CASE("reference CSV round trip")
{
    const auto t = reference_cdf(0.5, 0.25, 64, 4, 3);
    const auto text = reference_csv(t);
    CHECK(text.rfind("# y_a=0.5\n", 0) == 0);
    std::istringstream in(text);
    const auto back = parse_reference_csv(in);
    CHECK(back.cdf.knots() == t.cdf.knots());
    CHECK(back.cdf.values() == t.cdf.values());
    CHECK(back.cdf.resolution() == t.cdf.resolution());
    CHECK(back.y_b == 0.25);
    CHECK(back.seed == 3);
    CHECK(reference_csv(back) == text);
}
