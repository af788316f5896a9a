#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "spectracode/csv.hpp"
#include "spectracode/error.hpp"
#include "spectracode/linalg.hpp"
#include "spectracode/parallel.hpp"
#include "spectracode/random.hpp"
#include "spectracode/spectra.hpp"

namespace spectracode::reference {

// ---------------------------------------------------------------------------
// Marchenko-Pastur law, ratio y, unit mean

struct MpSupport {
    double lower;
    double upper;
    double atom;  // mass at 0
};

inline MpSupport mp_support(double y)
{
    if (!(y > 0.0)) throw UsageError("Marchenko-Pastur ratio must be > 0");
    const double s = std::sqrt(y);
    return {(1.0 - s) * (1.0 - s), (1.0 + s) * (1.0 + s), std::max(0.0, 1.0 - 1.0 / y)};
}

namespace detail {

// With x = a + (b - a) sin^2(phi) the density integrand
// sqrt((b-x)(x-a)) / (2 pi y x) dx becomes smooth in phi on [0, pi/2].
inline double mp_integral(double y, double x_hi, int power)
{
    const auto sup = mp_support(y);
    const double a = sup.lower, w = sup.upper - sup.lower;
    const double hi = std::clamp(x_hi, a, sup.upper);
    const double phi_hi = std::asin(std::sqrt(std::clamp((hi - a) / w, 0.0, 1.0)));
    auto integrand = [&](double phi) {
        const double s = std::sin(phi), c = std::cos(phi);
        const double x = a + w * s * s;
        // density * dx/dphi with one factor x cancelled against x^power
        const double base = w * w * s * s * c * c / (std::numbers::pi * y);
        return power == 0 ? base / x : base * std::pow(x, power - 1);
    };
    double error = 0.0;
    const double value =
        boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, phi_hi, 15, 1e-13, &error);
    if (!std::isfinite(value) || error > 1e-9 * std::max(1.0, std::abs(value)))
        throw NumericError("Marchenko-Pastur quadrature did not reach tolerance (error " + std::to_string(error) + ")");
    return value;
}

} // namespace detail

/// Density of the absolutely continuous part.
inline double mp_density(double y, double x)
{
    const auto sup = mp_support(y);
    if (x <= sup.lower || x >= sup.upper) return 0.0;
    return std::sqrt((sup.upper - x) * (x - sup.lower)) / (2.0 * std::numbers::pi * y * x);
}

/// CDF of the Marchenko-Pastur law by adaptive quadrature of its density.
inline double mp_cdf(double y, double x)
{
    const auto sup = mp_support(y);
    if (x < 0.0) return 0.0;
    if (x < sup.lower || (x == 0.0 && sup.lower == 0.0)) return sup.atom;
    if (x >= sup.upper) return 1.0;
    return std::min(1.0, sup.atom + detail::mp_integral(y, x, 0));
}

/// Moment of order l computed by quadrature (the atom at 0 contributes nothing for l >= 1).
inline double mp_numeric_moment(double y, int l)
{
    if (l < 1) throw UsageError("numeric moment needs l >= 1");
    return detail::mp_integral(y, mp_support(y).upper, l);
}

// ---------------------------------------------------------------------------
// Tabulated CDFs

/// Piecewise-linear CDF through knots (z_i, F_i); 0 below the first knot (the
/// first knot may carry a jump, e.g. an atom at 0) and 1 from the last knot on.
class TabulatedCdf {
public:
    TabulatedCdf() = default;

    TabulatedCdf(std::vector<double> z, std::vector<double> f, double atom, double resolution)
        : z_(std::move(z)), f_(std::move(f)), atom_(atom), resolution_(resolution)
    {
        if (z_.empty() || z_.size() != f_.size()) throw UsageError("tabulated CDF needs matching nonempty knots");
        for (std::size_t i = 1; i < z_.size(); ++i) {
            if (!(z_[i] >= z_[i - 1])) throw UsageError("tabulated CDF knots must be sorted");
            if (f_[i] < f_[i - 1]) throw UsageError("tabulated CDF values must be nondecreasing");
        }
        if (f_.front() < 0.0 || f_.back() != 1.0) throw UsageError("tabulated CDF must end at exactly 1");
    }

    const std::vector<double>& knots() const noexcept { return z_; }
    const std::vector<double>& values() const noexcept { return f_; }
    double atom() const noexcept { return atom_; }
    /// Error bar attached to any distance measured against this table.
    double resolution() const noexcept { return resolution_; }

    double right(double x) const
    {
        if (x < z_.front()) return 0.0;
        if (x >= z_.back()) return 1.0;
        // last knot <= x
        const auto hi = std::upper_bound(z_.begin(), z_.end(), x) - z_.begin();
        const auto lo = static_cast<std::size_t>(hi - 1);
        const auto up = static_cast<std::size_t>(hi);
        const double span = z_[up] - z_[lo];
        if (span <= 0.0) return f_[up];
        return f_[lo] + (f_[up] - f_[lo]) * (x - z_[lo]) / span;
    }

    double left(double x) const
    {
        if (x <= z_.front()) return 0.0;
        if (x > z_.back()) return 1.0;
        // Continuous except at the first knot and at repeated knots.
        const auto lo_it = std::lower_bound(z_.begin(), z_.end(), x);
        const auto up = static_cast<std::size_t>(lo_it - z_.begin());
        if (z_[up] == x) {
            // value approaching from the left of a knot
            const auto first = up;
            if (first == 0) return 0.0;
            const std::size_t lo = first - 1;
            const double span = z_[first] - z_[lo];
            if (span <= 0.0) return f_[lo];
            return f_[first];
        }
        return right(x);
    }

    double operator()(double x) const { return right(x); }

    std::vector<double> breakpoints() const
    {
        std::vector<double> b(z_);
        b.erase(std::unique(b.begin(), b.end()), b.end());
        return b;
    }

    /// Exact moment of the piecewise-linear law.
    double moment(int l) const
    {
        if (l < 0) throw UsageError("moment order must be >= 0");
        long double acc = f_.front() * std::pow(static_cast<long double>(z_.front()), l);
        for (std::size_t i = 1; i < z_.size(); ++i) {
            const long double mass = f_[i] - f_[i - 1];
            if (mass == 0.0L) continue;
            const long double a = z_[i - 1], b = z_[i];
            if (b == a) {
                acc += mass * std::pow(b, l);
                continue;
            }
            acc += mass * (std::pow(b, l + 1) - std::pow(a, l + 1)) / ((l + 1) * (b - a));
        }
        return static_cast<double>(acc);
    }

private:
    std::vector<double> z_;
    std::vector<double> f_;
    double atom_ = 0.0;
    double resolution_ = 0.0;
};

/// Tabulation of an arbitrary CDF on a uniform grid over [lo, hi].
template <class Cdf>
TabulatedCdf tabulate(Cdf&& cdf, double lo, double hi, std::size_t points, double atom = 0.0)
{
    if (points < 2 || !(hi > lo)) throw UsageError("tabulation needs >= 2 points on a proper interval");
    std::vector<double> z(points), f(points);
    for (std::size_t i = 0; i < points; ++i) {
        z[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
        f[i] = cdf(z[i]);
    }
    for (std::size_t i = 1; i < points; ++i) f[i] = std::max(f[i], f[i - 1]);
    f.back() = 1.0;
    return TabulatedCdf(std::move(z), std::move(f), atom, 1.0 / static_cast<double>(points - 1));
}

// ---------------------------------------------------------------------------
// i.i.d. baseline ensemble

enum class EntryModel { rademacher, complex_gaussian };

inline spectra::GramMatrix baseline_gram_sample(std::size_t N_a, std::size_t N_b, std::size_t n, EntryModel model,
                                                std::uint64_t seed)
{
    if (N_a == 0 || N_b == 0 || n == 0) throw UsageError("baseline sizes must be >= 1");
    Rng rng(seed);
    if (model == EntryModel::rademacher) {
        linalg::Matrix<double> a(N_a, n), b(N_b, n);
        for (auto& x : a.data()) x = rng.rademacher();
        for (auto& x : b.data()) x = rng.rademacher();
        return spectra::gram_from_factors(a, b);
    }
    linalg::Matrix<linalg::cdouble> a(N_a, n), b(N_b, n);
    const double s = std::sqrt(0.5);
    for (auto& x : a.data()) x = {s * rng.normal(), s * rng.normal()};
    for (auto& x : b.data()) x = {s * rng.normal(), s * rng.normal()};
    return spectra::gram_from_factors(a, b);
}

/// Parameters and provenance of a reference table.
struct ReferenceTable {
    TabulatedCdf cdf;
    double y_a = 0.0;
    double y_b = 0.0;
    std::size_t N_big = 0;
    std::size_t n = 0;
    std::size_t N_b = 0;
    std::size_t trials = 0;
    std::uint64_t seed = 0;
    std::size_t pooled = 0;
    std::size_t zero_count = 0;
};

struct BaselineSizes {
    std::size_t N_a;
    std::size_t n;
    std::size_t N_b;
};

inline BaselineSizes baseline_sizes(double y_a, double y_b, std::size_t N_big)
{
    if (!(y_a > 0.0) || !(y_b > 0.0)) throw UsageError("reference ratios must be > 0");
    const auto n = static_cast<std::size_t>(std::llround(static_cast<double>(N_big) * y_a));
    const auto N_b = n == 0 ? 0 : static_cast<std::size_t>(std::llround(static_cast<double>(n) / y_b));
    if (n < 32 || N_b < 32)
        throw UsageError("reference sizes n = " + std::to_string(n) + ", N_b = " + std::to_string(N_b) +
                         " must be >= 32");
    const double tol = 1.0 / static_cast<double>(N_big);
    if (std::abs(static_cast<double>(n) / static_cast<double>(N_big) - y_a) > tol ||
        std::abs(static_cast<double>(n) / static_cast<double>(N_b) - y_b) > tol)
        throw UsageError("ratios cannot be realized within 1/N_big by rounding");
    return {N_big, n, N_b};
}

/// Averaged baseline ESD with y_a = n/N_a, y_b = n/N_b, N_a = N_big.
/// Resolution: 1/sqrt(N_big trials) + 1/N_big; knots are at most that far
/// apart in probability.
inline ReferenceTable reference_cdf(double y_a, double y_b, std::size_t N_big, std::size_t trials, std::uint64_t seed,
                                    unsigned threads = 1, EntryModel model = EntryModel::rademacher)
{
    if (trials == 0) throw UsageError("reference needs trials >= 1");
    const auto sizes = baseline_sizes(y_a, y_b, N_big);
    const SeedSpec spec{seed};
    std::vector<std::vector<double>> spectra_per_trial(trials);
    parallel_for(trials, threads, [&](std::size_t t) {
        spectra_per_trial[t] =
            spectra::hermitian_eigenvalues(baseline_gram_sample(sizes.N_a, sizes.N_b, sizes.n, model, spec.child(t)));
    });
    std::vector<double> pooled;
    pooled.reserve(trials * sizes.N_a);
    for (const auto& s : spectra_per_trial) pooled.insert(pooled.end(), s.begin(), s.end());
    std::sort(pooled.begin(), pooled.end());

    const std::size_t total = pooled.size();
    const auto zeros = static_cast<std::size_t>(std::upper_bound(pooled.begin(), pooled.end(), 0.0) - pooled.begin());
    const double atom = static_cast<double>(zeros) / static_cast<double>(total);
    const double resolution =
        1.0 / std::sqrt(static_cast<double>(N_big) * static_cast<double>(trials)) + 1.0 / static_cast<double>(N_big);
    const auto stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(total)) / 4.0));

    std::vector<double> z, f;
    if (zeros > 0) {
        z.push_back(0.0);
        f.push_back(atom);
    }
    if (zeros < total) {
        // flat up to the smallest nonzero eigenvalue, then through every stride-th order statistic
        z.push_back(pooled[zeros]);
        f.push_back(atom);
        for (std::size_t rank = zeros + stride; rank < total; rank += stride) {
            z.push_back(pooled[rank - 1]);
            f.push_back(static_cast<double>(rank) / static_cast<double>(total));
        }
        z.push_back(pooled.back());
        f.push_back(1.0);
    } else {
        f.back() = 1.0;
    }

    ReferenceTable table;
    table.cdf = TabulatedCdf(std::move(z), std::move(f), atom, resolution);
    table.y_a = y_a;
    table.y_b = y_b;
    table.N_big = N_big;
    table.n = sizes.n;
    table.N_b = sizes.N_b;
    table.trials = trials;
    table.seed = seed;
    table.pooled = total;
    table.zero_count = zeros;
    return table;
}

/// CSV with '#'-prefixed header lines carrying the table parameters, then "z,F".
inline std::string reference_csv(const ReferenceTable& t)
{
    std::ostringstream out;
    out << "# y_a=" << format_real(t.y_a) << '\n'
        << "# y_b=" << format_real(t.y_b) << '\n'
        << "# N_big=" << t.N_big << '\n'
        << "# trials=" << t.trials << '\n'
        << "# seed=" << t.seed << '\n'
        << "# rho=" << format_real(t.cdf.resolution()) << '\n'
        << "# atom=" << format_real(t.cdf.atom()) << '\n'
        << "z,F\n";
    const auto& z = t.cdf.knots();
    const auto& f = t.cdf.values();
    for (std::size_t i = 0; i < z.size(); ++i) out << format_real(z[i]) << ',' << format_real(f[i]) << '\n';
    return out.str();
}

/// Parses the format written by reference_csv.
inline ReferenceTable parse_reference_csv(std::istream& in)
{
    ReferenceTable t;
    double rho = 0.0, atom = 0.0;
    std::vector<double> z, f;
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            const std::string key = line.substr(2, eq - 2);
            const std::string value = line.substr(eq + 1);
            if (key == "y_a") t.y_a = std::stod(value);
            else if (key == "y_b") t.y_b = std::stod(value);
            else if (key == "N_big") t.N_big = std::stoul(value);
            else if (key == "trials") t.trials = std::stoul(value);
            else if (key == "seed") t.seed = std::stoull(value);
            else if (key == "rho") rho = std::stod(value);
            else if (key == "atom") atom = std::stod(value);
            continue;
        }
        if (!header_seen) {
            if (line != "z,F") throw UsageError("reference CSV is missing the z,F header");
            header_seen = true;
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw UsageError("malformed reference CSV row: " + line);
        z.push_back(std::stod(line.substr(0, comma)));
        f.push_back(std::stod(line.substr(comma + 1)));
    }
    t.cdf = TabulatedCdf(std::move(z), std::move(f), atom, rho);
    return t;
}

} // namespace spectracode::reference
