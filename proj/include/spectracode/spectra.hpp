#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <concepts>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "spectracode/ensemble.hpp"
#include "spectracode/error.hpp"
#include "spectracode/linalg.hpp"

namespace spectracode::spectra {

using linalg::cdouble;
using linalg::Matrix;

/// Eigenvalues with |lambda| <= kZeroTolerance * max|lambda| are rank zeros.
inline constexpr double kZeroTolerance = 1e-9;

/// G = (1 / (N_a N_b)) A B* B A*, kept real when both factors are real.
class GramMatrix {
public:
    explicit GramMatrix(Matrix<double> g) : real_(std::move(g)) {}
    explicit GramMatrix(Matrix<cdouble> g) : complex_(std::move(g)) {}

    bool is_real() const noexcept { return real_.has_value(); }
    std::size_t size() const noexcept { return is_real() ? real_->rows() : complex_->rows(); }

    cdouble operator()(std::size_t i, std::size_t j) const
    {
        return is_real() ? cdouble((*real_)(i, j), 0.0) : (*complex_)(i, j);
    }

    const Matrix<double>& real_matrix() const { return real_.value(); }
    const Matrix<cdouble>& complex_matrix() const { return complex_.value(); }

    Matrix<cdouble> as_complex() const
    {
        if (!is_real()) return *complex_;
        Matrix<cdouble> out(size(), size());
        for (std::size_t i = 0; i < size(); ++i)
            for (std::size_t j = 0; j < size(); ++j) out(i, j) = (*real_)(i, j);
        return out;
    }

    double trace() const
    {
        double t = 0.0;
        for (std::size_t i = 0; i < size(); ++i) t += (*this)(i, i).real();
        return t;
    }

private:
    std::optional<Matrix<double>> real_;
    std::optional<Matrix<cdouble>> complex_;
};

namespace detail {

// C = A B^H, then G = C C^H / (N_a N_b); only the lower triangle is computed
// and mirrored, so G is exactly Hermitian.
template <class T>
Matrix<T> gram_of_product(const Matrix<T>& a, const Matrix<T>& b)
{
    const std::size_t na = a.rows(), nb = b.rows(), n = a.cols();
    Matrix<T> c(na, nb);
    for (std::size_t i = 0; i < na; ++i) {
        const T* ai = a.row(i);
        for (std::size_t j = 0; j < nb; ++j) {
            const T* bj = b.row(j);
            T acc{};
            for (std::size_t t = 0; t < n; ++t) acc += ai[t] * linalg::conj_of(bj[t]);
            c(i, j) = acc;
        }
    }
    const double scale = 1.0 / (static_cast<double>(na) * static_cast<double>(nb));
    Matrix<T> g(na, na);
    for (std::size_t i = 0; i < na; ++i) {
        const T* ci = c.row(i);
        for (std::size_t k = 0; k <= i; ++k) {
            const T* ck = c.row(k);
            T acc{};
            for (std::size_t j = 0; j < nb; ++j) acc += ci[j] * linalg::conj_of(ck[j]);
            g(i, k) = acc * scale;
            g(k, i) = linalg::conj_of(acc) * scale;
        }
    }
    return g;
}

} // namespace detail

/// Gram matrix of (1/sqrt(N_a N_b)) A B*, from explicit factor matrices.
inline GramMatrix gram_from_factors(const Matrix<double>& a, const Matrix<double>& b)
{
    if (a.cols() != b.cols()) throw UsageError("factors must share the column count n");
    return GramMatrix(detail::gram_of_product(a, b));
}

inline GramMatrix gram_from_factors(const Matrix<cdouble>& a, const Matrix<cdouble>& b)
{
    if (a.cols() != b.cols()) throw UsageError("factors must share the column count n");
    return GramMatrix(detail::gram_of_product(a, b));
}

inline GramMatrix gram_product(const ensemble::PhiSample& a, const ensemble::PhiSample& b)
{
    if (a.n != b.n) throw UsageError("samples must share the code length n");
    if (a.is_real() && b.is_real()) return gram_from_factors(a.real_entries(), b.real_entries());
    return gram_from_factors(a.entries, b.entries);
}

struct EigenDiagnostics {
    /// Eigenvalues snapped to exactly 0 (|lambda| <= kZeroTolerance * max|lambda|).
    std::size_t zeroed = 0;
    /// Of those, how many were negative before snapping.
    std::size_t clamped_negative = 0;
    /// Eigenvalues below -kZeroTolerance * max|lambda| (PSD violations).
    std::size_t negative = 0;
};

/// Sorted eigenvalues of a Gram matrix. Round-off zeros of the rank-deficient
/// part are snapped to exactly 0.
inline std::vector<double> hermitian_eigenvalues(const GramMatrix& g, EigenDiagnostics* diag = nullptr)
{
    auto eigs = g.is_real() ? linalg::eigvalsh(g.real_matrix()) : linalg::eigvalsh(g.complex_matrix());
    double scale = 0.0;
    for (double x : eigs) scale = std::max(scale, std::abs(x));
    const double cut = kZeroTolerance * scale;
    EigenDiagnostics d;
    for (double& x : eigs) {
        if (std::abs(x) <= cut) {
            ++d.zeroed;
            if (x < 0.0) ++d.clamped_negative;
            x = 0.0;
        } else if (x < 0.0) {
            ++d.negative;
        }
    }
    std::sort(eigs.begin(), eigs.end());
    if (diag) *diag = d;
    return eigs;
}

/// Right-continuous step CDF placing mass 1/N at each eigenvalue.
class EsdCurve {
public:
    EsdCurve() = default;
    explicit EsdCurve(std::vector<double> eigs) : values_(std::move(eigs))
    {
        for (double x : values_)
            if (!std::isfinite(x)) throw UsageError("ESD needs finite eigenvalues");
        std::sort(values_.begin(), values_.end());
    }

    std::size_t size() const noexcept { return values_.size(); }
    const std::vector<double>& values() const noexcept { return values_; }

    /// #{lambda_i <= z}.
    std::size_t count_at_most(double z) const
    {
        return static_cast<std::size_t>(std::upper_bound(values_.begin(), values_.end(), z) - values_.begin());
    }

    double operator()(double z) const { return right(z); }
    double right(double z) const { return static_cast<double>(count_at_most(z)) / static_cast<double>(size()); }
    double left(double z) const
    {
        const auto below = std::lower_bound(values_.begin(), values_.end(), z) - values_.begin();
        return static_cast<double>(below) / static_cast<double>(size());
    }

    /// Jump locations (distinct eigenvalues).
    std::vector<double> breakpoints() const
    {
        std::vector<double> b(values_);
        b.erase(std::unique(b.begin(), b.end()), b.end());
        return b;
    }

private:
    std::vector<double> values_;
};

inline EsdCurve make_esd(std::vector<double> eigs)
{
    if (eigs.empty()) throw UsageError("ESD of an empty spectrum");
    return EsdCurve(std::move(eigs));
}

inline double esd_eval(const EsdCurve& curve, double z) { return curve(z); }

/// A CDF that is monotone between its breakpoints (constant or linear), so
/// the supremum of a difference is attained at a breakpoint one-sided limit.
template <class F>
concept PiecewiseCdf = requires(const F& f, double x) {
    { f.left(x) } -> std::convertible_to<double>;
    { f.right(x) } -> std::convertible_to<double>;
    { f.breakpoints() } -> std::convertible_to<std::vector<double>>;
};

/// sup_x |F(x) - G(x)|, evaluated at both one-sided limits of every breakpoint.
template <PiecewiseCdf F, PiecewiseCdf G>
double kolmogorov_distance(const F& f, const G& g)
{
    std::vector<double> points = f.breakpoints();
    const auto gb = g.breakpoints();
    points.insert(points.end(), gb.begin(), gb.end());
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());
    double sup = 0.0;
    for (double x : points) {
        sup = std::max(sup, std::abs(f.left(x) - g.left(x)));
        sup = std::max(sup, std::abs(f.right(x) - g.right(x)));
    }
    return sup;
}

/// (1/N) sum lambda_i^l.
inline double spectral_moment(std::span<const double> eigs, int l)
{
    if (l < 0) throw UsageError("moment order must be >= 0");
    if (eigs.empty()) throw UsageError("moment of an empty spectrum");
    if (l == 0) return 1.0;
    long double acc = 0.0L;
    for (double x : eigs) {
        long double p = 1.0L;
        for (int i = 0; i < l; ++i) p *= x;
        acc += p;
    }
    return static_cast<double>(acc / static_cast<long double>(eigs.size()));
}

} // namespace spectracode::spectra
