#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "spectracode/codes.hpp"
#include "spectracode/csv.hpp"
#include "spectracode/ensemble.hpp"
#include "spectracode/error.hpp"
#include "spectracode/parallel.hpp"
#include "spectracode/random.hpp"
#include "spectracode/spectra.hpp"

namespace spectracode::moments {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// ---------------------------------------------------------------------------
// Analytic moments

/// l-th moment of the Marchenko-Pastur law with ratio y:
/// sum_{i=0}^{l-1} y^i/(i+1) C(l,i) C(l-1,i).
inline double mp_moment(int l, double y)
{
    if (l < 1) throw UsageError("mp_moment is defined for l >= 1");
    if (!(y > 0.0)) throw UsageError("mp_moment needs y > 0");
    // C(l,i) C(l-1,i) / (i+1) is the Narayana number C(l,i) C(l,i+1) / l.
    long double acc = 0.0L;
    long double ypow = 1.0L;
    BigInt cl = 1;  // C(l, i)
    for (int i = 0; i < l; ++i) {
        const BigInt cl_next = cl * (l - i) / (i + 1);  // C(l, i+1)
        const BigInt narayana = cl * cl_next / l;
        acc += ypow * narayana.convert_to<long double>();
        ypow *= y;
        cl = cl_next;
    }
    return static_cast<double>(acc);
}

/// (8 e^2)^l max(1, y)^l.
inline double mp_moment_bound(int l, double y)
{
    if (l < 1) throw UsageError("mp_moment_bound is defined for l >= 1");
    const double base = 8.0 * std::numbers::e * std::numbers::e * std::max(1.0, y);
    return std::pow(base, l);
}

/// Nonnegative (k_1..k_i) with k_1 + ... + k_i = l - i + 1 and
/// k_1 + 2 k_2 + ... + i k_i = l, in lexicographic order.
inline std::vector<std::vector<int>> enumerate_compositions(int l, int i)
{
    if (i < 1 || i > l) throw UsageError("compositions need 1 <= i <= l");
    std::vector<std::vector<int>> out;
    std::vector<int> k(static_cast<std::size_t>(i), 0);
    const int parts = l - i + 1;
    auto recurse = [&](auto&& self, int j, int count_left, int weight_left) -> void {
        if (j == i) {
            if (count_left == 0 && weight_left == 0) out.push_back(k);
            return;
        }
        const int step = j + 1;
        for (int kj = 0; kj <= count_left && kj * step <= weight_left; ++kj) {
            k[static_cast<std::size_t>(j)] = kj;
            self(self, j + 1, count_left - kj, weight_left - kj * step);
        }
        k[static_cast<std::size_t>(j)] = 0;
    };
    recurse(recurse, 0, parts, l);
    return out;
}

/// Moment of (1 - y_a) delta_0 + y_a times the free multiplicative convolution of
/// two Marchenko-Pastur laws:
/// sum_i y_a^{l-i+1} sum_k (l!/i!) prod_j m_j(y_b)^{k_j} / k_j!.
inline double freeconv_moment(int l, double y_a, double y_b)
{
    if (l < 1) throw UsageError("freeconv_moment is defined for l >= 1");
    if (!(y_a > 0.0) || !(y_b > 0.0)) throw UsageError("freeconv_moment needs y_a, y_b > 0");
    std::vector<long double> mp(static_cast<std::size_t>(l) + 1);
    for (int j = 1; j <= l; ++j) mp[static_cast<std::size_t>(j)] = mp_moment(j, y_b);
    std::vector<long double> fact(static_cast<std::size_t>(l) + 1, 1.0L);
    for (int j = 1; j <= l; ++j) fact[static_cast<std::size_t>(j)] = fact[static_cast<std::size_t>(j) - 1] * j;

    long double total = 0.0L;
    for (int i = 1; i <= l; ++i) {
        long double inner = 0.0L;
        for (const auto& k : enumerate_compositions(l, i)) {
            long double term = 1.0L;
            for (int j = 1; j <= i; ++j) {
                const int kj = k[static_cast<std::size_t>(j) - 1];
                for (int r = 0; r < kj; ++r) term *= mp[static_cast<std::size_t>(j)];
                term /= fact[static_cast<std::size_t>(kj)];
            }
            inner += term;
        }
        const long double ratio = fact[static_cast<std::size_t>(l)] / fact[static_cast<std::size_t>(i)];
        total += std::pow(static_cast<long double>(y_a), l - i + 1) * ratio * inner;
    }
    return static_cast<double>(total);
}

struct ErrorBound {
    double value = 0.0;
    /// 2 <= l < min(sqrt(N_a), sqrt(N_b)); outside this range the bound is not a guarantee.
    bool binding = false;
};

/// l^{6l} Y_a (Y_a Y_b)^l / min(N_a, N_b).
inline ErrorBound theorem2_error_bound(int l, double y_a, double y_b, std::uint64_t N_a, std::uint64_t N_b)
{
    if (l < 1) throw UsageError("error bound needs l >= 1");
    if (N_a == 0 || N_b == 0) throw UsageError("error bound needs N_a, N_b >= 1");
    const double Ya = std::max(1.0, y_a);
    const double Yb = std::max(1.0, y_b);
    const auto nmin = std::min(N_a, N_b);
    const double value =
        std::pow(static_cast<double>(l), 6.0 * l) * Ya * std::pow(Ya * Yb, l) / static_cast<double>(nmin);
    const bool binding = l >= 2 && static_cast<std::uint64_t>(l) * static_cast<std::uint64_t>(l) < nmin;
    return {value, binding};
}

// ---------------------------------------------------------------------------
// Index-coincidence classes

/// All set partitions of {0..l-1} as restricted growth strings
/// (a[0] = 0, a[i] <= 1 + max(a[0..i-1])), in lexicographic order.
inline std::vector<std::vector<int>> set_partitions(int l)
{
    if (l < 1) throw UsageError("set partitions need l >= 1");
    std::vector<std::vector<int>> out;
    std::vector<int> a(static_cast<std::size_t>(l), 0);
    auto recurse = [&](auto&& self, int pos, int max_label) -> void {
        if (pos == l) {
            out.push_back(a);
            return;
        }
        for (int b = 0; b <= max_label + 1; ++b) {
            a[static_cast<std::size_t>(pos)] = b;
            self(self, pos + 1, std::max(max_label, b));
        }
    };
    a[0] = 0;
    recurse(recurse, 1, 0);
    return out;
}

/// One pair of coincidence classes [gamma_a], [gamma_b] over l cyclic slots.
struct PartitionClassPair {
    int l = 0;
    std::vector<int> labels_a;
    std::vector<int> labels_b;
    int v_a = 0;
    int v_b = 0;
    /// I[lambda]: slots u with gamma_a(u) = z_lambda.
    std::vector<std::vector<int>> blocks_a;
    /// Shifted blocks: u is in shifted[lambda] iff (u + 1) mod l is in I[lambda].
    std::vector<std::vector<int>> shifted_a;
    /// J[mu]: slots u with gamma_b(u) = y_mu.
    std::vector<std::vector<int>> blocks_b;
};

inline PartitionClassPair make_class_pair(std::vector<int> labels_a, std::vector<int> labels_b)
{
    if (labels_a.empty() || labels_a.size() != labels_b.size())
        throw UsageError("class labels must be nonempty and of equal length");
    PartitionClassPair c;
    c.l = static_cast<int>(labels_a.size());
    auto blocks_of = [&](const std::vector<int>& labels) {
        int top = -1;
        for (std::size_t u = 0; u < labels.size(); ++u) {
            if (labels[u] < 0 || labels[u] > top + 1) throw UsageError("labels are not a restricted growth string");
            top = std::max(top, labels[u]);
        }
        std::vector<std::vector<int>> blocks(static_cast<std::size_t>(top) + 1);
        for (std::size_t u = 0; u < labels.size(); ++u)
            blocks[static_cast<std::size_t>(labels[u])].push_back(static_cast<int>(u));
        return blocks;
    };
    c.blocks_a = blocks_of(labels_a);
    c.blocks_b = blocks_of(labels_b);
    c.v_a = static_cast<int>(c.blocks_a.size());
    c.v_b = static_cast<int>(c.blocks_b.size());
    c.shifted_a.resize(c.blocks_a.size());
    for (int u = 0; u < c.l; ++u) {
        const int next = (u + 1) % c.l;
        c.shifted_a[static_cast<std::size_t>(labels_a[static_cast<std::size_t>(next)])].push_back(u);
    }
    c.labels_a = std::move(labels_a);
    c.labels_b = std::move(labels_b);
    return c;
}

inline constexpr double kSolutionBudget = 1e9;

inline void check_solution_budget(int n, int l)
{
    if (std::pow(static_cast<double>(n), 2.0 * l) > kSolutionBudget)
        throw ResourceError("n^(2l) = " + std::to_string(n) + "^" + std::to_string(2 * l) +
                            " exceeds the 1e9 counting budget");
}

/// W_gamma: number of (t, tau) in [1,n]^{2l} with
///   sum_{u in I_lambda} h^a_{t_u} = sum_{u in shifted I_lambda} h^a_{tau_u}  for all lambda,
///   sum_{u in J_mu} h^b_{t_u}     = sum_{u in J_mu} h^b_{tau_u}             for all mu.
/// The t-side and tau-side sums are tabulated separately and matched by key.
inline std::uint64_t count_linear_system_solutions(const PartitionClassPair& pair, const codes::LinearCode& code_a,
                                                   const codes::LinearCode& code_b)
{
    if (code_a.n() != code_b.n()) throw UsageError("codes must share the length n");
    const int n = code_a.n();
    const int l = pair.l;
    check_solution_budget(n, l);
    const auto& sa = code_a.space();
    const auto& sb = code_b.space();
    const auto ha = code_a.rows();
    const auto hb = code_b.rows();

    using Key = std::vector<std::uint64_t>;
    auto tabulate = [&](const std::vector<std::vector<int>>& a_blocks) {
        std::map<Key, std::uint64_t> counts;
        std::vector<int> idx(static_cast<std::size_t>(l), 0);
        Key key(static_cast<std::size_t>(pair.v_a + pair.v_b));
        for (;;) {
            std::size_t slot = 0;
            for (const auto& block : a_blocks) {
                std::uint64_t s = 0;
                for (int u : block) s = sa.add(s, ha[static_cast<std::size_t>(idx[static_cast<std::size_t>(u)])]);
                key[slot++] = s;
            }
            for (const auto& block : pair.blocks_b) {
                std::uint64_t s = 0;
                for (int u : block) s = sb.add(s, hb[static_cast<std::size_t>(idx[static_cast<std::size_t>(u)])]);
                key[slot++] = s;
            }
            ++counts[key];
            int pos = 0;
            while (pos < l && ++idx[static_cast<std::size_t>(pos)] == n) idx[static_cast<std::size_t>(pos++)] = 0;
            if (pos == l) break;
        }
        return counts;
    };

    const auto lhs = tabulate(pair.blocks_a);
    const auto rhs = tabulate(pair.shifted_a);
    std::uint64_t total = 0;
    auto it = rhs.begin();
    for (const auto& [key, count] : lhs) {
        while (it != rhs.end() && it->first < key) ++it;
        if (it != rhs.end() && it->first == key) total += count * it->second;
    }
    return total;
}

inline BigInt falling_factorial(std::uint64_t N, int v)
{
    BigInt r = 1;
    for (int i = 0; i < v; ++i) {
        if (static_cast<std::uint64_t>(i) >= N) return 0;
        r *= N - static_cast<std::uint64_t>(i);
    }
    return r;
}

struct ExactMoment {
    Rational value;
    double approx() const { return value.convert_to<double>(); }
    std::string str() const { return value.str(); }
};

/// Exact E[A_l] over independent uniform codeword assignments, as
/// (1 / (N_a^{l+1} N_b^l)) sum over class pairs of
/// N_a!/(N_a - v_a)! * N_b!/(N_b - v_b)! * W_gamma.
inline ExactMoment exact_expected_moment(const codes::LinearCode& code_a, const codes::LinearCode& code_b,
                                         std::uint64_t N_a, std::uint64_t N_b, int l)
{
    if (l < 1 || l > 4) throw UsageError("exact moment oracle supports 1 <= l <= 4");
    if (N_a == 0 || N_b == 0) throw UsageError("exact moment oracle needs N_a, N_b >= 1");
    if (code_a.n() != code_b.n()) throw UsageError("codes must share the length n");
    check_solution_budget(code_a.n(), l);
    const auto partitions = set_partitions(l);
    BigInt numerator = 0;
    for (const auto& pa : partitions) {
        for (const auto& pb : partitions) {
            const auto pair = make_class_pair(pa, pb);
            const BigInt weight = falling_factorial(N_a, pair.v_a) * falling_factorial(N_b, pair.v_b);
            if (weight == 0) continue;
            numerator += weight * count_linear_system_solutions(pair, code_a, code_b);
        }
    }
    BigInt denominator = 1;
    for (int i = 0; i < l + 1; ++i) denominator *= N_a;
    for (int i = 0; i < l; ++i) denominator *= N_b;
    return {Rational(numerator, denominator)};
}

// ---------------------------------------------------------------------------
// Monte Carlo

struct MomentRow {
    int l = 0;
    double empirical_mean = 0.0;
    double standard_error = 0.0;
    std::uint64_t trials = 0;
    double main_term = 0.0;
    ErrorBound error_bound;
    std::optional<ExactMoment> oracle;
};

struct MomentReport {
    int n = 0;
    std::uint64_t N_a = 0;
    std::uint64_t N_b = 0;
    std::uint64_t trials = 0;
    std::vector<MomentRow> rows;

    double y_a() const { return static_cast<double>(n) / static_cast<double>(N_a); }
    double y_b() const { return static_cast<double>(n) / static_cast<double>(N_b); }
    double Y_a() const { return std::max(1.0, y_a()); }
    double Y_b() const { return std::max(1.0, y_b()); }
};

/// Spectral moments A_1..A_{l_max} of one sampled product.
inline std::vector<double> trial_moments(const codes::LinearCode& code_a, const codes::LinearCode& code_b,
                                         std::uint64_t N_a, std::uint64_t N_b, int l_max, const SeedSpec& seed,
                                         std::uint64_t trial)
{
    const auto a = ensemble::sample_phi(code_a, N_a, seed.child(trial, MatrixRole::a));
    const auto b = ensemble::sample_phi(code_b, N_b, seed.child(trial, MatrixRole::b));
    const auto eigs = spectra::hermitian_eigenvalues(spectra::gram_product(a, b));
    std::vector<double> out(static_cast<std::size_t>(l_max));
    for (int l = 1; l <= l_max; ++l) out[static_cast<std::size_t>(l) - 1] = spectra::spectral_moment(eigs, l);
    return out;
}

/// Mean and standard error of A_l over independent trials, reduced in trial order.
inline MomentReport empirical_moment_mc(const codes::LinearCode& code_a, const codes::LinearCode& code_b,
                                        std::uint64_t N_a, std::uint64_t N_b, int l_max, std::uint64_t trials,
                                        std::uint64_t seed, unsigned threads = 1)
{
    if (trials == 0) throw UsageError("Monte Carlo needs trials >= 1");
    if (l_max < 1) throw UsageError("l_max must be >= 1");
    if (N_a == 0 || N_b == 0) throw UsageError("N_a and N_b must be >= 1");
    if (code_a.n() != code_b.n()) throw UsageError("codes must share the length n");
    const SeedSpec spec{seed};
    std::vector<std::vector<double>> per_trial(trials);
    parallel_for(trials, threads, [&](std::size_t t) {
        per_trial[t] = trial_moments(code_a, code_b, N_a, N_b, l_max, spec, t);
    });

    MomentReport report;
    report.n = code_a.n();
    report.N_a = N_a;
    report.N_b = N_b;
    report.trials = trials;
    for (int l = 1; l <= l_max; ++l) {
        const auto idx = static_cast<std::size_t>(l) - 1;
        long double sum = 0.0L;
        for (const auto& m : per_trial) sum += m[idx];
        const long double mean = sum / static_cast<long double>(trials);
        long double ss = 0.0L;
        for (const auto& m : per_trial) ss += (m[idx] - mean) * (m[idx] - mean);
        MomentRow row;
        row.l = l;
        row.empirical_mean = static_cast<double>(mean);
        row.standard_error = trials > 1 ? static_cast<double>(std::sqrt(ss / static_cast<long double>(trials - 1) /
                                                                 static_cast<long double>(trials)))
                                 : 0.0;
        row.trials = trials;
        row.main_term = freeconv_moment(l, report.y_a(), report.y_b());
        row.error_bound = theorem2_error_bound(l, report.y_a(), report.y_b(), N_a, N_b);
        report.rows.push_back(row);
    }
    return report;
}

/// Fills the oracle column for l <= min(4, l_max).
inline void attach_oracle(MomentReport& report, const codes::LinearCode& code_a, const codes::LinearCode& code_b)
{
    for (auto& row : report.rows)
        if (row.l <= 4) row.oracle = exact_expected_moment(code_a, code_b, report.N_a, report.N_b, row.l);
}

/// Columns: l, empirical_mean, stderr, trials, main_term, error_bound, bound_binding, oracle.
inline std::string moment_report_csv(const MomentReport& report)
{
    std::ostringstream out;
    out << "l,empirical_mean,stderr,trials,main_term,error_bound,bound_binding,oracle\n";
    for (const auto& r : report.rows) {
        out << r.l << ',' << format_real(r.empirical_mean) << ',' << format_real(r.standard_error) << ',' << r.trials << ','
            << format_real(r.main_term) << ',' << format_real(r.error_bound.value) << ','
            << (r.error_bound.binding ? "true" : "false") << ',';
        if (r.oracle) out << format_real(r.oracle->approx());
        out << '\n';
    }
    return out.str();
}

} // namespace spectracode::moments
