#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "spectracode/error.hpp"

namespace spectracode::galois {

/// Returns true if `p` is prime (trial division; p is small in practice).
constexpr bool is_prime(std::uint64_t p)
{
    if (p < 2) return false;
    for (std::uint64_t d = 2; d * d <= p; ++d)
        if (p % d == 0) return false;
    return true;
}

namespace detail {

// Polynomials over F(2) packed as bitmasks, bit i = coefficient of x^i.
inline int gf2_degree(std::uint64_t a)
{
    return a == 0 ? -1 : 63 - std::countl_zero(a);
}

inline std::uint64_t gf2_mod(std::uint64_t a, std::uint64_t b)
{
    const int db = gf2_degree(b);
    for (int da = gf2_degree(a); da >= db; da = gf2_degree(a))
        a ^= b << (da - db);
    return a;
}

inline std::uint64_t gf2_clmul(std::uint64_t a, std::uint64_t b)
{
    std::uint64_t r = 0;
    while (b) {
        if (b & 1u) r ^= a;
        a <<= 1;
        b >>= 1;
    }
    return r;
}

/// Exhaustive trial division by every polynomial of degree 1..deg/2.
inline bool gf2_irreducible(std::uint64_t poly)
{
    const int deg = gf2_degree(poly);
    if (deg < 1) return false;
    for (int d = 1; 2 * d <= deg; ++d)
        for (std::uint64_t f = std::uint64_t{1} << d; f < (std::uint64_t{2} << d); ++f)
            if (gf2_mod(poly, f) == 0) return false;
    return true;
}

} // namespace detail

/// Conway polynomials over F(2) for degrees 1..16, packed as bitmasks.
inline constexpr std::array<std::uint32_t, 17> kDefaultBinaryModuli = {
    0x0,     0x3,    0x7,    0xB,    0x13,   0x25,   0x5B,   0x83,   0x11D,
    0x211,   0x46F,  0x805,  0x10EB, 0x201B, 0x40A9, 0x8035, 0x1002D,
};

inline constexpr int kMaxExtensionDegree = 16;

/// Identifies F(p^m) together with its defining modulus.
struct FieldSpec {
    std::uint32_t p = 2;
    int m = 1;
    /// Monic modulus, coefficients from x^0 to x^m (length m + 1).
    std::vector<std::uint32_t> modulus;

    friend bool operator==(const FieldSpec&, const FieldSpec&) = default;
};

/// Arithmetic in a prime field F(p) or a binary extension F(2^m).
///
/// Elements are handled in packed form: for p = 2 a bitmask of polynomial
/// coefficients, for prime fields the residue itself.
class GaloisField {
public:
    static std::shared_ptr<const GaloisField> prime(std::uint32_t p)
    {
        if (!is_prime(p)) throw UsageError("field characteristic " + std::to_string(p) + " is not prime");
        if (p > (1u << 16)) throw UsageError("prime field characteristic too large");
        return std::shared_ptr<const GaloisField>(new GaloisField(FieldSpec{p, 1, {0, 1}}, 0));
    }

    /// F(2^m) with the default modulus for m.
    static std::shared_ptr<const GaloisField> binary(int m)
    {
        if (m < 1 || m > kMaxExtensionDegree)
            throw UsageError("binary extension degree must lie in [1, 16], got " + std::to_string(m));
        return binary(m, kDefaultBinaryModuli[static_cast<std::size_t>(m)]);
    }

    /// F(2^m) with a modulus given as a bitmask (bit i = coefficient of x^i).
    static std::shared_ptr<const GaloisField> binary(int m, std::uint32_t modulus_mask)
    {
        if (m < 1 || m > kMaxExtensionDegree)
            throw UsageError("binary extension degree must lie in [1, 16], got " + std::to_string(m));
        if (detail::gf2_degree(modulus_mask) != m)
            throw UsageError("modulus degree does not match extension degree");
        if (!detail::gf2_irreducible(modulus_mask))
            throw UsageError("modulus is reducible over F(2)");
        FieldSpec spec{2, m, {}};
        for (int i = 0; i <= m; ++i) spec.modulus.push_back((modulus_mask >> i) & 1u);
        return std::shared_ptr<const GaloisField>(new GaloisField(std::move(spec), modulus_mask));
    }

    /// General entry point: coefficient list (x^0 .. x^m), monic.
    static std::shared_ptr<const GaloisField> from_coefficients(std::uint32_t p, std::span<const std::uint32_t> coeffs)
    {
        if (!is_prime(p)) throw UsageError("field characteristic " + std::to_string(p) + " is not prime");
        if (coeffs.size() < 2) throw UsageError("modulus must have degree >= 1");
        const int m = static_cast<int>(coeffs.size()) - 1;
        if (coeffs.back() != 1) throw UsageError("modulus must be monic");
        for (auto c : coeffs)
            if (c >= p) throw UsageError("modulus coefficient out of range");
        if (m == 1) {
            // Any monic linear polynomial defines F(p) itself.
            return std::shared_ptr<const GaloisField>(
                new GaloisField(FieldSpec{p, 1, {coeffs[0], 1}}, 0));
        }
        if (p != 2) throw UsageError("extension fields are supported only in characteristic 2");
        std::uint32_t mask = 0;
        for (int i = 0; i <= m; ++i) mask |= coeffs[static_cast<std::size_t>(i)] << i;
        return binary(m, mask);
    }

    const FieldSpec& spec() const noexcept { return spec_; }
    std::uint32_t characteristic() const noexcept { return spec_.p; }
    int degree() const noexcept { return spec_.m; }
    std::uint64_t order() const noexcept { return order_; }
    bool is_binary() const noexcept { return spec_.p == 2; }

    bool contains(std::uint32_t a) const noexcept { return a < order_; }

    std::uint32_t add(std::uint32_t a, std::uint32_t b) const noexcept
    {
        if (is_binary()) return a ^ b;
        return static_cast<std::uint32_t>((std::uint64_t{a} + b) % spec_.p);
    }

    std::uint32_t neg(std::uint32_t a) const noexcept
    {
        if (is_binary()) return a;
        return a == 0 ? 0 : spec_.p - a;
    }

    std::uint32_t sub(std::uint32_t a, std::uint32_t b) const noexcept { return add(a, neg(b)); }

    std::uint32_t mul(std::uint32_t a, std::uint32_t b) const noexcept
    {
        if (is_binary()) {
            if (spec_.m == 1) return a & b;
            return static_cast<std::uint32_t>(detail::gf2_mod(detail::gf2_clmul(a, b), modulus_mask_));
        }
        return static_cast<std::uint32_t>((std::uint64_t{a} * b) % spec_.p);
    }

    std::uint32_t pow(std::uint32_t a, std::uint64_t e) const noexcept
    {
        std::uint32_t r = 1;
        while (e) {
            if (e & 1u) r = mul(r, a);
            a = mul(a, a);
            e >>= 1;
        }
        return r;
    }

    std::uint32_t inv(std::uint32_t a) const
    {
        if (a == 0) throw DomainError("division by zero in F(" + std::to_string(order_) + ")");
        return pow(a, order_ - 2);
    }

    std::uint32_t div(std::uint32_t a, std::uint32_t b) const { return mul(a, inv(b)); }

    /// a + a^p + ... + a^{p^{m-1}}, returned as a residue in [0, p).
    std::uint32_t trace(std::uint32_t a) const noexcept
    {
        std::uint32_t acc = 0;
        std::uint32_t conj = a;
        for (int i = 0; i < spec_.m; ++i) {
            acc = add(acc, conj);
            conj = pow(conj, spec_.p);
        }
        return acc;
    }

    /// For F(2^m), m > 1, the class of x (primitive when the modulus is);
    /// for prime fields the smallest primitive root.
    std::uint32_t generator() const
    {
        if (is_binary() && spec_.m > 1) return 2u;
        for (std::uint32_t g = 1; g < order_; ++g)
            if (multiplicative_order(g) == order_ - 1) return g;
        return 1u;
    }

    /// Multiplicative order of a nonzero element.
    std::uint64_t multiplicative_order(std::uint32_t a) const
    {
        if (a == 0) throw DomainError("zero has no multiplicative order");
        const std::uint64_t group = order_ - 1;
        std::uint64_t ord = group;
        std::uint64_t rest = group;
        for (std::uint64_t r = 2; r * r <= rest; ++r) {
            if (rest % r) continue;
            while (rest % r == 0) rest /= r;
            while (ord % r == 0 && pow(a, ord / r) == 1) ord /= r;
        }
        if (rest > 1)
            while (ord % rest == 0 && pow(a, ord / rest) == 1) ord /= rest;
        return ord;
    }

private:
    GaloisField(FieldSpec spec, std::uint32_t modulus_mask)
        : spec_(std::move(spec)), modulus_mask_(modulus_mask)
    {
        order_ = 1;
        for (int i = 0; i < spec_.m; ++i) order_ *= spec_.p;
    }

    FieldSpec spec_;
    std::uint32_t modulus_mask_ = 0;
    std::uint64_t order_ = 0;
};

using FieldPtr = std::shared_ptr<const GaloisField>;

/// A value of F(q) bound to its field.
class FieldElement {
public:
    FieldElement(FieldPtr field, std::uint32_t value) : field_(std::move(field)), value_(value)
    {
        if (!field_) throw UsageError("field element without field");
        if (!field_->contains(value_)) throw UsageError("packed value outside field");
    }

    const FieldPtr& field() const noexcept { return field_; }
    std::uint32_t value() const noexcept { return value_; }
    bool is_zero() const noexcept { return value_ == 0; }

    friend bool operator==(const FieldElement& a, const FieldElement& b)
    {
        return a.value_ == b.value_ && a.field_->spec() == b.field_->spec();
    }

private:
    FieldPtr field_;
    std::uint32_t value_;
};

enum class FieldOp { add, sub, mul, div };

inline FieldElement ff_op(FieldOp kind, const FieldElement& a, const FieldElement& b)
{
    if (!(a.field()->spec() == b.field()->spec())) throw UsageError("operands belong to different fields");
    const auto& f = *a.field();
    switch (kind) {
    case FieldOp::add: return {a.field(), f.add(a.value(), b.value())};
    case FieldOp::sub: return {a.field(), f.sub(a.value(), b.value())};
    case FieldOp::mul: return {a.field(), f.mul(a.value(), b.value())};
    case FieldOp::div: return {a.field(), f.div(a.value(), b.value())};
    }
    throw UsageError("unknown field operation");
}

inline FieldElement operator+(const FieldElement& a, const FieldElement& b) { return ff_op(FieldOp::add, a, b); }
inline FieldElement operator-(const FieldElement& a, const FieldElement& b) { return ff_op(FieldOp::sub, a, b); }
inline FieldElement operator*(const FieldElement& a, const FieldElement& b) { return ff_op(FieldOp::mul, a, b); }
inline FieldElement operator/(const FieldElement& a, const FieldElement& b) { return ff_op(FieldOp::div, a, b); }

/// Trace to the prime subfield, as an element of F(p).
inline FieldElement ff_trace(const FieldElement& a)
{
    const auto& f = *a.field();
    return {GaloisField::prime(f.characteristic()), f.trace(a.value())};
}

} // namespace spectracode::galois
