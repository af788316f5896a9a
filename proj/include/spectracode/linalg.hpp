#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <string>
#include <type_traits>
#include <vector>

#include "spectracode/error.hpp"

namespace spectracode::linalg {

using cdouble = std::complex<double>;

template <class T>
struct is_complex : std::false_type {};
template <class T>
struct is_complex<std::complex<T>> : std::true_type {};

inline double conj_of(double x) noexcept { return x; }
inline cdouble conj_of(cdouble x) noexcept { return std::conj(x); }
inline double real_of(double x) noexcept { return x; }
inline double real_of(cdouble x) noexcept { return x.real(); }
inline double imag_of(double) noexcept { return 0.0; }
inline double imag_of(cdouble x) noexcept { return x.imag(); }
inline double abs2(double x) noexcept { return x * x; }
inline double abs2(cdouble x) noexcept { return std::norm(x); }

/// Dense row-major matrix.
template <class T>
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, T fill = T{}) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    T& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    const T& operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    T* row(std::size_t r) noexcept { return data_.data() + r * cols_; }
    const T* row(std::size_t r) const noexcept { return data_.data() + r * cols_; }

    const std::vector<T>& data() const noexcept { return data_; }
    std::vector<T>& data() noexcept { return data_; }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

template <class T>
Matrix<T> multiply(const Matrix<T>& a, const Matrix<T>& b)
{
    if (a.cols() != b.rows()) throw UsageError("matrix product shape mismatch");
    Matrix<T> out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const T aik = a(i, k);
            const T* brow = b.row(k);
            T* orow = out.row(i);
            for (std::size_t j = 0; j < b.cols(); ++j) orow[j] += aik * brow[j];
        }
    return out;
}

template <class T>
T trace(const Matrix<T>& a)
{
    T acc{};
    for (std::size_t i = 0; i < std::min(a.rows(), a.cols()); ++i) acc += a(i, i);
    return acc;
}

/// Largest |a_ij - conj(a_ji)|.
template <class T>
double hermitian_defect(const Matrix<T>& a)
{
    double worst = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j <= i; ++j)
            worst = std::max(worst, std::sqrt(abs2(a(i, j) - conj_of(a(j, i)))));
    return worst;
}

template <class T>
double max_abs(const Matrix<T>& a)
{
    double worst = 0.0;
    for (const auto& x : a.data()) worst = std::max(worst, std::sqrt(abs2(x)));
    return worst;
}

/// Real symmetric tridiagonal matrix: diagonal and first subdiagonal.
struct Tridiagonal {
    std::vector<double> diag;
    std::vector<double> sub;
};

/// Householder reduction of a Hermitian (or real symmetric) matrix to real
/// tridiagonal form. Consumes `a`; only eigenvalues are preserved.
template <class T>
Tridiagonal tridiagonalize(Matrix<T> a)
{
    const std::size_t n = a.rows();
    Tridiagonal out;
    out.diag.resize(n);
    out.sub.resize(n > 0 ? n - 1 : 0);
    std::vector<T> v(n), w(n);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const std::size_t m = n - k - 1;
        const std::size_t off = k + 1;
        const T alpha = a(off, k);
        double xnorm2 = 0.0;
        for (std::size_t i = off + 1; i < n; ++i) xnorm2 += abs2(a(i, k));
        out.diag[k] = real_of(a(k, k));
        if (xnorm2 == 0.0 && imag_of(alpha) == 0.0) {
            out.sub[k] = real_of(alpha);
            continue;
        }
        const double beta = -std::copysign(std::sqrt(abs2(alpha) + xnorm2), real_of(alpha));
        const T tau = (T(beta) - alpha) / T(beta);
        const T scal = T(1.0) / (alpha - T(beta));
        v[0] = T(1.0);
        for (std::size_t i = 1; i < m; ++i) v[i] = a(off + i, k) * scal;
        out.sub[k] = beta;

        // w = tau * A22 v
        for (std::size_t i = 0; i < m; ++i) {
            const T* arow = a.row(off + i) + off;
            T acc{};
            for (std::size_t j = 0; j < m; ++j) acc += arow[j] * v[j];
            w[i] = tau * acc;
        }
        // w += -1/2 tau (w^H v) v
        T wv{};
        for (std::size_t i = 0; i < m; ++i) wv += conj_of(w[i]) * v[i];
        const T alpha2 = T(-0.5) * tau * wv;
        for (std::size_t i = 0; i < m; ++i) w[i] += alpha2 * v[i];
        // A22 -= v w^H + w v^H
        for (std::size_t i = 0; i < m; ++i) {
            T* arow = a.row(off + i) + off;
            const T vi = v[i];
            const T wi = w[i];
            for (std::size_t j = 0; j < m; ++j) arow[j] -= vi * conj_of(w[j]) + wi * conj_of(v[j]);
        }
    }
    if (n > 0) out.diag[n - 1] = real_of(a(n - 1, n - 1));
    return out;
}

/// Eigenvalues of a symmetric tridiagonal matrix by implicit-shift QL,
/// returned in ascending order.
inline std::vector<double> tridiagonal_eigenvalues(Tridiagonal t, int max_iterations = 60)
{
    auto& d = t.diag;
    const std::size_t n = d.size();
    std::vector<double> e(n, 0.0);
    std::copy(t.sub.begin(), t.sub.end(), e.begin());
    constexpr double eps = std::numeric_limits<double>::epsilon();
    // Absolute floor so clusters of near-zero eigenvalues deflate.
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) norm = std::max(norm, std::abs(d[i]) + 2.0 * std::abs(e[i]));
    const double floor = eps * norm;
    for (std::size_t l = 0; l < n; ++l) {
        int iter = 0;
        std::size_t m;
        do {
            for (m = l; m + 1 < n; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= eps * dd || std::abs(e[m]) <= floor) break;
            }
            if (m == l) break;
            if (iter++ == max_iterations)
                throw NumericError("tridiagonal QL did not converge for eigenvalue " + std::to_string(l) + " of " +
                                   std::to_string(n) + " after " + std::to_string(max_iterations) +
                                   " iterations (residual off-diagonal " + std::to_string(e[l]) + ")");
            double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            double r = std::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
            double s = 1.0, c = 1.0, p = 0.0;
            bool underflow = false;
            for (std::size_t i1 = m; i1-- > l;) {
                const double f = s * e[i1];
                const double b = c * e[i1];
                r = std::hypot(f, g);
                e[i1 + 1] = r;
                if (r == 0.0) {
                    d[i1 + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i1 + 1] - p;
                r = (d[i1] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i1 + 1] = g + p;
                g = c * r - b;
            }
            if (underflow) continue;
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        } while (true);
    }
    std::sort(d.begin(), d.end());
    return d;
}

/// All eigenvalues of a Hermitian matrix, ascending.
template <class T>
std::vector<double> eigvalsh(const Matrix<T>& a)
{
    if (a.rows() != a.cols()) throw UsageError("eigenvalues need a square matrix");
    const double scale = std::max(1.0, max_abs(a));
    if (hermitian_defect(a) > 1e-12 * scale) throw UsageError("matrix is not Hermitian within 1e-12");
    return tridiagonal_eigenvalues(tridiagonalize(a));
}

} // namespace spectracode::linalg
