#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "spectracode/error.hpp"
#include "spectracode/galois.hpp"
#include "spectracode/random.hpp"

namespace spectracode::codes {

/// Largest number of codewords any enumeration may visit.
inline constexpr std::uint64_t kEnumerationBudget = std::uint64_t{1} << 26;

/// Vectors of F(p)^k packed into one 64-bit word as base-p digits
/// (digit j is coordinate j). For p = 2 this is a plain bitmask.
class PackedSpace {
public:
    PackedSpace() = default;

    PackedSpace(std::uint32_t p, int k) : p_(p), k_(k)
    {
        if (!galois::is_prime(p)) throw UsageError("code alphabet size " + std::to_string(p) + " is not prime");
        if (k < 1) throw UsageError("dimension must be >= 1");
        place_.resize(static_cast<std::size_t>(k) + 1);
        place_[0] = 1;
        for (int j = 0; j < k; ++j) {
            if (place_[static_cast<std::size_t>(j)] > (std::uint64_t{1} << 62) / p)
                throw UsageError("p^k exceeds the 2^62 packing limit");
            place_[static_cast<std::size_t>(j) + 1] = place_[static_cast<std::size_t>(j)] * p;
        }
    }

    std::uint32_t p() const noexcept { return p_; }
    int k() const noexcept { return k_; }
    bool binary() const noexcept { return p_ == 2; }
    /// Number of vectors, p^k.
    std::uint64_t size() const noexcept { return place_.back(); }

    std::uint32_t digit(std::uint64_t v, int j) const noexcept
    {
        if (binary()) return static_cast<std::uint32_t>((v >> j) & 1u);
        return static_cast<std::uint32_t>((v / place_[static_cast<std::size_t>(j)]) % p_);
    }

    std::uint64_t pack(std::span<const std::uint32_t> digits) const
    {
        if (static_cast<int>(digits.size()) != k_) throw UsageError("vector length does not match dimension");
        std::uint64_t v = 0;
        for (int j = 0; j < k_; ++j) {
            const auto d = digits[static_cast<std::size_t>(j)];
            if (d >= p_) throw UsageError("coordinate outside F(p)");
            v += d * place_[static_cast<std::size_t>(j)];
        }
        return v;
    }

    std::vector<std::uint32_t> unpack(std::uint64_t v) const
    {
        std::vector<std::uint32_t> out(static_cast<std::size_t>(k_));
        for (int j = 0; j < k_; ++j) out[static_cast<std::size_t>(j)] = digit(v, j);
        return out;
    }

    std::uint64_t add(std::uint64_t a, std::uint64_t b) const noexcept
    {
        if (binary()) return a ^ b;
        std::uint64_t r = 0;
        for (int j = 0; j < k_; ++j)
            r += ((digit(a, j) + digit(b, j)) % p_) * place_[static_cast<std::size_t>(j)];
        return r;
    }

    std::uint64_t sub(std::uint64_t a, std::uint64_t b) const noexcept
    {
        if (binary()) return a ^ b;
        std::uint64_t r = 0;
        for (int j = 0; j < k_; ++j)
            r += ((digit(a, j) + p_ - digit(b, j)) % p_) * place_[static_cast<std::size_t>(j)];
        return r;
    }

    std::uint64_t scale(std::uint64_t a, std::uint32_t c) const noexcept
    {
        if (binary()) return (c & 1u) ? a : 0;
        std::uint64_t r = 0;
        for (int j = 0; j < k_; ++j)
            r += (static_cast<std::uint64_t>(digit(a, j)) * c % p_) * place_[static_cast<std::size_t>(j)];
        return r;
    }

    /// Inner product over F(p).
    std::uint32_t dot(std::uint64_t a, std::uint64_t b) const noexcept
    {
        if (binary()) return static_cast<std::uint32_t>(std::popcount(a & b) & 1);
        std::uint64_t acc = 0;
        for (int j = 0; j < k_; ++j) acc += static_cast<std::uint64_t>(digit(a, j)) * digit(b, j);
        return static_cast<std::uint32_t>(acc % p_);
    }

    friend bool operator==(const PackedSpace& a, const PackedSpace& b) { return a.p_ == b.p_ && a.k_ == b.k_; }

private:
    std::uint32_t p_ = 2;
    int k_ = 1;
    std::vector<std::uint64_t> place_{1, 2};
};

/// Rank over F(p) of a list of packed vectors.
inline int rank_of(const PackedSpace& space, std::vector<std::uint64_t> rows)
{
    const auto p = space.p();
    int rank = 0;
    for (int col = 0; col < space.k() && rank < static_cast<int>(rows.size()); ++col) {
        auto pivot = std::find_if(rows.begin() + rank, rows.end(),
                                  [&](std::uint64_t r) { return space.digit(r, col) != 0; });
        if (pivot == rows.end()) continue;
        std::iter_swap(rows.begin() + rank, pivot);
        const std::uint64_t prow = rows[static_cast<std::size_t>(rank)];
        const auto lead = space.digit(prow, col);
        for (std::size_t i = static_cast<std::size_t>(rank) + 1; i < rows.size(); ++i) {
            const auto c = space.digit(rows[i], col);
            if (c == 0) continue;
            // rows[i] -= (c / lead) * prow
            std::uint32_t factor = 1;
            if (!space.binary()) {
                std::uint64_t inv = 1, base = lead, e = p - 2;
                while (e) {
                    if (e & 1u) inv = inv * base % p;
                    base = base * base % p;
                    e >>= 1;
                }
                factor = static_cast<std::uint32_t>(c * inv % p);
            }
            rows[i] = space.sub(rows[i], space.scale(prow, factor));
        }
        ++rank;
    }
    return rank;
}

/// Counts of codewords by Hamming weight; counts[w] for w = 0..n.
/// Counts are exact integers: dual enumerators of long codes exceed 64 bits.
struct WeightEnumerator {
    using Count = boost::multiprecision::cpp_int;
    std::vector<Count> counts;

    WeightEnumerator() = default;
    explicit WeightEnumerator(std::vector<Count> c) : counts(std::move(c)) {}
    WeightEnumerator(std::initializer_list<std::uint64_t> c) : counts(c.begin(), c.end()) {}

    std::size_t length() const noexcept { return counts.empty() ? 0 : counts.size() - 1; }
    friend bool operator==(const WeightEnumerator&, const WeightEnumerator&) = default;
};

class LinearCode;
WeightEnumerator weight_enumerator(const LinearCode& code);

/// An [n, k] linear code over F(p), defined by its generator rows h_1..h_n in F(p)^k.
/// The codeword of message x has coordinate t equal to <h_t, x>.
class LinearCode {
public:
    LinearCode(std::uint32_t p, int k, std::vector<std::uint64_t> rows, std::string label = {})
        : space_(p, k), rows_(std::move(rows)), label_(std::move(label)), cache_(std::make_shared<Cache>())
    {
        if (rows_.empty()) throw UsageError("a code needs at least one coordinate");
        if (k > static_cast<int>(rows_.size())) throw UsageError("dimension exceeds length");
        for (auto r : rows_)
            if (r >= space_.size()) throw UsageError("generator row outside F(p)^k");
        if (rank_of(space_, rows_) != k)
            throw ConstructionError("generator rows of " + (label_.empty() ? std::string("code") : label_) +
                                    " do not have rank " + std::to_string(k));
    }

    /// Rows given as coordinate lists (each of length k).
    static LinearCode from_rows(std::uint32_t p, const std::vector<std::vector<std::uint32_t>>& rows,
                                std::string label = {})
    {
        if (rows.empty()) throw UsageError("a code needs at least one coordinate");
        const int k = static_cast<int>(rows.front().size());
        PackedSpace space(p, k);
        std::vector<std::uint64_t> packed;
        packed.reserve(rows.size());
        for (const auto& r : rows) packed.push_back(space.pack(r));
        return LinearCode(p, k, std::move(packed), std::move(label));
    }

    std::uint32_t q() const noexcept { return space_.p(); }
    int n() const noexcept { return static_cast<int>(rows_.size()); }
    int k() const noexcept { return space_.k(); }
    const PackedSpace& space() const noexcept { return space_; }
    std::span<const std::uint64_t> rows() const noexcept { return rows_; }
    std::uint64_t row(int t) const { return rows_.at(static_cast<std::size_t>(t)); }
    const std::string& label() const noexcept { return label_; }
    /// q^k.
    std::uint64_t size() const noexcept { return space_.size(); }

    /// Codeword of a packed message (message index in [0, q^k)).
    std::vector<std::uint32_t> encode_index(std::uint64_t message) const
    {
        std::vector<std::uint32_t> out(rows_.size());
        for (std::size_t t = 0; t < rows_.size(); ++t) out[t] = space_.dot(rows_[t], message);
        return out;
    }

    const WeightEnumerator& cached_weight_enumerator() const
    {
        std::call_once(cache_->once, [this] { cache_->weights = weight_enumerator(*this); });
        return cache_->weights;
    }

private:
    struct Cache {
        std::once_flag once;
        WeightEnumerator weights;
    };

    PackedSpace space_;
    std::vector<std::uint64_t> rows_;
    std::string label_;
    std::shared_ptr<Cache> cache_;
};

inline std::vector<std::uint32_t> encode(const LinearCode& code, std::span<const std::uint32_t> message)
{
    if (static_cast<int>(message.size()) != code.k())
        throw UsageError("message length " + std::to_string(message.size()) + " != code dimension " +
                         std::to_string(code.k()));
    return code.encode_index(code.space().pack(message));
}

inline void check_enumeration_budget(const LinearCode& code)
{
    if (code.size() > kEnumerationBudget)
        throw ResourceError("enumerating " + std::to_string(code.size()) + " codewords of " + code.label() +
                            " exceeds the 2^26 budget");
}

/// Calls `visit(message_index, codeword)` once for each of the q^k codewords.
template <class Visitor>
void enumerate_codewords(const LinearCode& code, Visitor&& visit)
{
    check_enumeration_budget(code);
    std::vector<std::uint32_t> word(static_cast<std::size_t>(code.n()));
    const auto rows = code.rows();
    const auto& space = code.space();
    for (std::uint64_t x = 0; x < code.size(); ++x) {
        for (std::size_t t = 0; t < rows.size(); ++t) word[t] = space.dot(rows[t], x);
        visit(x, std::span<const std::uint32_t>(word));
    }
}

inline WeightEnumerator weight_enumerator(const LinearCode& code)
{
    check_enumeration_budget(code);
    std::vector<std::uint64_t> counts(static_cast<std::size_t>(code.n()) + 1, 0);
    const auto rows = code.rows();
    const auto& space = code.space();
    for (std::uint64_t x = 0; x < code.size(); ++x) {
        std::size_t weight = 0;
        if (space.binary()) {
            for (auto r : rows) weight += static_cast<std::size_t>(std::popcount(r & x) & 1);
        } else {
            for (auto r : rows) weight += space.dot(r, x) != 0;
        }
        ++counts[weight];
    }
    return WeightEnumerator(std::vector<WeightEnumerator::Count>(counts.begin(), counts.end()));
}

namespace detail {

using BigInt = boost::multiprecision::cpp_int;

inline std::vector<BigInt> binomial_row(std::size_t n)
{
    std::vector<BigInt> row(n + 1);
    row[0] = 1;
    for (std::size_t r = 1; r <= n; ++r) row[r] = row[r - 1] * (n - r + 1) / r;
    return row;
}

/// Dual weight coefficient B_j = q^{-k} sum_i W_i K_j(i) in exact arithmetic,
/// before division: returns the numerator sum_i W_i K_j(i).
class KrawtchoukTransform {
public:
    KrawtchoukTransform(const WeightEnumerator& w, std::uint32_t q) : w_(w), q_(q)
    {
        n_ = w.length();
        for (std::size_t i = 0; i <= n_; ++i) {
            if (w.counts[i] == 0) continue;
            support_.push_back(i);
            small_.emplace(i, binomial_row(i));
            large_.emplace(i, binomial_row(n_ - i));
        }
        qm1_pow_.resize(n_ + 1);
        qm1_pow_[0] = 1;
        for (std::size_t j = 1; j <= n_; ++j) qm1_pow_[j] = qm1_pow_[j - 1] * (q_ - 1);
    }

    BigInt numerator(std::size_t j) const
    {
        BigInt total = 0;
        for (auto i : support_) {
            const auto& ci = small_.at(i);
            const auto& cn = large_.at(i);
            BigInt kj = 0;
            const std::size_t s_lo = j > n_ - i ? j - (n_ - i) : 0;
            const std::size_t s_hi = std::min(i, j);
            for (std::size_t s = s_lo; s <= s_hi; ++s) {
                BigInt term = ci[s] * cn[j - s] * qm1_pow_[j - s];
                if (s % 2) kj -= term;
                else kj += term;
            }
            total += kj * w_.counts[i];
        }
        return total;
    }

private:
    const WeightEnumerator& w_;
    std::uint32_t q_;
    std::size_t n_ = 0;
    std::vector<std::size_t> support_;
    std::unordered_map<std::size_t, std::vector<BigInt>> small_, large_;
    std::vector<BigInt> qm1_pow_;
};

inline BigInt big_pow(std::uint32_t base, std::size_t e)
{
    BigInt r = 1;
    for (std::size_t i = 0; i < e; ++i) r *= base;
    return r;
}

inline void validate_enumerator(const WeightEnumerator& w, std::size_t n, int k, std::uint32_t q)
{
    if (w.counts.size() != n + 1) throw ConsistencyError("weight enumerator length does not match n + 1");
    if (w.counts[0] != 1) throw ConsistencyError("weight enumerator must have W[0] = 1");
    BigInt total = 0;
    for (const auto& c : w.counts) {
        if (c < 0) throw ConsistencyError("weight enumerator has a negative count");
        total += c;
    }
    if (total != big_pow(q, static_cast<std::size_t>(k))) throw ConsistencyError("weight enumerator does not sum to q^k");
}

inline BigInt exact_quotient(const BigInt& num, const BigInt& den, std::size_t j)
{
    if (num < 0 || num % den != 0)
        throw ConsistencyError("MacWilliams transform gives a non-integer or negative count at weight " +
                               std::to_string(j));
    return num / den;
}

} // namespace detail

/// Weight enumerator of the dual code via the MacWilliams identity, in exact
/// integer arithmetic. The result sums to q^{n-k}.
inline WeightEnumerator macwilliams_dual(const WeightEnumerator& w, std::size_t n, int k, std::uint32_t q)
{
    detail::validate_enumerator(w, n, k, q);
    const detail::KrawtchoukTransform transform(w, q);
    const auto den = detail::big_pow(q, static_cast<std::size_t>(k));
    WeightEnumerator dual(std::vector<WeightEnumerator::Count>(n + 1, 0));
    for (std::size_t j = 0; j <= n; ++j) dual.counts[j] = detail::exact_quotient(transform.numerator(j), den, j);
    return dual;
}

/// Minimum weight of the dual code, computed from the primal enumerator
/// (the dual is never enumerated). Returns n + 1 when the dual is {0}.
inline int dual_distance(const LinearCode& code)
{
    const auto& w = code.cached_weight_enumerator();
    const auto n = static_cast<std::size_t>(code.n());
    detail::validate_enumerator(w, n, code.k(), code.q());
    const detail::KrawtchoukTransform transform(w, code.q());
    const auto den = detail::big_pow(code.q(), static_cast<std::size_t>(code.k()));
    for (std::size_t j = 1; j <= n; ++j)
        if (detail::exact_quotient(transform.numerator(j), den, j) > 0) return static_cast<int>(j);
    return code.n() + 1;
}

/// Shortened first-order Reed-Muller code: rows are the nonzero vectors of F(2)^m,
/// row t holding the binary digits of t (little-endian), t = 1..2^m - 1.
inline LinearCode build_simplex(int m)
{
    if (m < 2) throw UsageError("simplex code needs m >= 2");
    if (m > 20) throw UsageError("simplex code length 2^m - 1 too large");
    std::vector<std::uint64_t> rows;
    for (std::uint64_t t = 1; t < (std::uint64_t{1} << m); ++t) rows.push_back(t);
    return LinearCode(2, m, std::move(rows), "simplex(m=" + std::to_string(m) + ")");
}

/// Binary Gold code of length 2^m - 1 and dimension 2m with decimation d = 2^k0 + 1.
/// Row t is (vec(alpha^t), vec(alpha^{dt})), so codewords are t -> tr(x alpha^t + y alpha^{dt}).
inline LinearCode build_gold(int m, int k0)
{
    if (m < 3 || m % 2 == 0) throw UsageError("Gold construction requires odd m >= 3, got " + std::to_string(m));
    if (m > galois::kMaxExtensionDegree) throw UsageError("Gold construction supports m <= 16");
    if (k0 < 1 || std::gcd(k0, m) != 1)
        throw UsageError("Gold construction requires gcd(k0, m) = 1, got k0 = " + std::to_string(k0));
    const auto field = galois::GaloisField::binary(m);
    const std::uint64_t n = field->order() - 1;
    const std::uint32_t alpha = field->generator();
    if (field->multiplicative_order(alpha) != n) throw ConstructionError("default modulus is not primitive");
    const std::uint64_t d = (std::uint64_t{1} << k0) + 1;
    // alpha^d shares alpha's minimal polynomial iff d is a power of 2 modulo n.
    for (int i = 0; i < m; ++i)
        if (d % n == (std::uint64_t{1} << i) % n)
            throw ConstructionError("alpha^d is a conjugate of alpha; sequences coincide");
    const std::uint32_t beta = field->pow(alpha, d);
    std::vector<std::uint64_t> rows;
    rows.reserve(n);
    std::uint32_t a = 1, b = 1;
    for (std::uint64_t t = 0; t < n; ++t) {
        rows.push_back(std::uint64_t{a} | (std::uint64_t{b} << m));
        a = field->mul(a, alpha);
        b = field->mul(b, beta);
    }
    return LinearCode(2, 2 * m, std::move(rows),
                      "gold(m=" + std::to_string(m) + ",k0=" + std::to_string(k0) + ")");
}

/// [n, n-1] binary code of all even-weight words: c_t = x_t for t < n-1, c_{n-1} = sum x.
inline LinearCode build_even_weight(int n)
{
    if (n < 2) throw UsageError("even-weight code needs n >= 2");
    if (n > 63) throw UsageError("even-weight code supports n <= 63");
    std::vector<std::uint64_t> rows;
    for (int t = 0; t + 1 < n; ++t) rows.push_back(std::uint64_t{1} << t);
    rows.push_back((std::uint64_t{1} << (n - 1)) - 1);
    return LinearCode(2, n - 1, std::move(rows), "even_weight(n=" + std::to_string(n) + ")");
}

/// Code with uniformly drawn generator rows, resampled until the rank is k.
inline LinearCode build_random_code(int n, int k, std::uint32_t q, std::uint64_t seed)
{
    if (k < 1 || k > n) throw UsageError("random code needs 1 <= k <= n");
    const PackedSpace space(q, k);
    Rng rng(seed);
    for (int attempt = 0; attempt < 100; ++attempt) {
        std::vector<std::uint64_t> rows(static_cast<std::size_t>(n));
        for (auto& r : rows) r = rng.uniform(space.size());
        if (rank_of(space, rows) == k)
            return LinearCode(q, k, std::move(rows),
                              "random(n=" + std::to_string(n) + ",k=" + std::to_string(k) + ",q=" +
                                  std::to_string(q) + ",seed=" + std::to_string(seed) + ")");
    }
    throw ConstructionError("no full-rank random generator found in 100 attempts");
}

/// max over v != 0 of #{(t1, t2) : h_t1 + h_t2 = v}, ordered pairs.
inline int max_pair_sum_multiplicity(const LinearCode& code)
{
    const auto n = static_cast<std::uint64_t>(code.n());
    if (n * n > kEnumerationBudget) throw ResourceError("n^2 exceeds the pair-sum budget");
    const auto rows = code.rows();
    const auto& space = code.space();
    std::vector<std::uint64_t> sums;
    sums.reserve(n * n);
    for (auto r1 : rows)
        for (auto r2 : rows) {
            const auto v = space.add(r1, r2);
            if (v != 0) sums.push_back(v);
        }
    std::sort(sums.begin(), sums.end());
    int best = 0;
    for (std::size_t i = 0; i < sums.size();) {
        std::size_t j = i;
        while (j < sums.size() && sums[j] == sums[i]) ++j;
        best = std::max(best, static_cast<int>(j - i));
        i = j;
    }
    return best;
}

/// Plain-text generator listing: a comment header, then one row of k field
/// elements per line.
inline std::string generator_listing(const LinearCode& code)
{
    std::ostringstream out;
    out << "# " << (code.label().empty() ? "code" : code.label()) << " n=" << code.n() << " k=" << code.k()
        << " q=" << code.q() << '\n';
    for (auto r : code.rows()) {
        for (int j = 0; j < code.k(); ++j) out << (j ? " " : "") << code.space().digit(r, j);
        out << '\n';
    }
    return out.str();
}

} // namespace spectracode::codes
