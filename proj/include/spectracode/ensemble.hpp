#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <sstream>
#include <span>
#include <string>
#include <vector>

#include "spectracode/codes.hpp"
#include "spectracode/error.hpp"
#include "spectracode/galois.hpp"
#include "spectracode/linalg.hpp"
#include "spectracode/random.hpp"

namespace spectracode::ensemble {

using linalg::cdouble;

/// exp(2 pi i r / p) for a residue r; exact +-1 when p = 2.
inline cdouble root_of_unity(std::uint32_t r, std::uint32_t p)
{
    r %= p;
    if (r == 0) return {1.0, 0.0};
    if (2 * r == p) return {-1.0, 0.0};
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(r) / static_cast<double>(p);
    return {std::cos(angle), std::sin(angle)};
}

/// The additive character psi(z) = exp(2 pi i tr(z) / p).
inline cdouble character(const galois::GaloisField& field, std::uint32_t z)
{
    if (!field.contains(z)) throw UsageError("element outside field");
    return root_of_unity(field.trace(z), field.characteristic());
}

inline cdouble character(const galois::FieldElement& z) { return character(*z.field(), z.value()); }

/// Component-wise character map of a codeword over the prime field F(p).
inline std::vector<cdouble> epsilon_row(std::span<const std::uint32_t> codeword, std::uint32_t p)
{
    std::vector<cdouble> out;
    out.reserve(codeword.size());
    for (auto c : codeword) {
        if (c >= p) throw UsageError("codeword symbol outside F(p)");
        out.push_back(root_of_unity(c, p));
    }
    return out;
}

/// N x n matrix whose rows are character images of codewords of one code.
struct PhiSample {
    std::size_t N = 0;
    std::size_t n = 0;
    std::uint32_t q = 2;
    /// Row-major entries.
    linalg::Matrix<cdouble> entries;
    /// Message index (in [0, q^k)) of each row's codeword.
    std::vector<std::uint64_t> messages;
    std::string label;
    std::uint64_t seed = 0;

    /// True when every entry is real (q = 2), which enables the +-1 fast path.
    bool is_real() const noexcept { return q == 2; }

    /// Entries as a real +-1 matrix; only valid when is_real().
    linalg::Matrix<double> real_entries() const
    {
        if (!is_real()) throw UsageError("complex sample has no real view");
        linalg::Matrix<double> out(N, n);
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t t = 0; t < n; ++t) out(i, t) = entries(i, t).real();
        return out;
    }
};

/// Builds a PhiSample from explicitly chosen message indices.
inline PhiSample phi_from_messages(const codes::LinearCode& code, std::vector<std::uint64_t> messages,
                                   std::uint64_t seed = 0)
{
    if (messages.empty()) throw UsageError("a sample needs at least one row");
    PhiSample s;
    s.N = messages.size();
    s.n = static_cast<std::size_t>(code.n());
    s.q = code.q();
    s.label = code.label();
    s.seed = seed;
    s.entries = linalg::Matrix<cdouble>(s.N, s.n);
    // Character values per residue, so every row is built from one small table.
    std::vector<cdouble> roots(s.q);
    for (std::uint32_t r = 0; r < s.q; ++r) roots[r] = root_of_unity(r, s.q);
    const auto rows = code.rows();
    const auto& space = code.space();
    for (std::size_t i = 0; i < s.N; ++i) {
        if (messages[i] >= code.size()) throw UsageError("message index outside code");
        cdouble* out = s.entries.row(i);
        for (std::size_t t = 0; t < s.n; ++t) out[t] = roots[space.dot(rows[t], messages[i])];
    }
    s.messages = std::move(messages);
    return s;
}

/// N independent uniform codewords (with replacement), mapped through the character.
inline PhiSample sample_phi(const codes::LinearCode& code, std::size_t N, std::uint64_t child_seed)
{
    if (N < 1) throw UsageError("sample_phi needs N >= 1");
    Rng rng(child_seed);
    std::vector<std::uint64_t> messages(N);
    for (auto& m : messages) m = rng.uniform(code.size());
    return phi_from_messages(code, std::move(messages), child_seed);
}

/// CSV view: +-1 integers for q = 2, otherwise "re,im" column pairs.
inline std::string phi_to_csv(const PhiSample& s)
{
    std::ostringstream out;
    out.precision(17);
    for (std::size_t t = 0; t < s.n; ++t) {
        if (t) out << ',';
        if (s.is_real()) out << "c" << t + 1;
        else out << "re" << t + 1 << ",im" << t + 1;
    }
    out << '\n';
    for (std::size_t i = 0; i < s.N; ++i) {
        for (std::size_t t = 0; t < s.n; ++t) {
            if (t) out << ',';
            const auto z = s.entries(i, t);
            if (s.is_real()) out << (z.real() > 0 ? "1" : "-1");
            else out << z.real() << ',' << z.imag();
        }
        out << '\n';
    }
    return out.str();
}

} // namespace spectracode::ensemble
