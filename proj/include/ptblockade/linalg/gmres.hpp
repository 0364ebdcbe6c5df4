#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

namespace ptb {

using KrylovVector = std::vector<std::complex<double>>;
using LinearMap = std::function<void(const KrylovVector& in, KrylovVector& out)>;

struct GmresOptions {
    double rel_tol = 1e-12;     // on ||b - A x|| / ||b||
    std::size_t restart = 60;
    std::size_t max_iterations = 2000;
};

struct GmresResult {
    KrylovVector x;
    std::size_t iterations = 0;
    double relative_residual = 0.0;
    bool converged = false;
};

namespace detail {

inline double norm2(const KrylovVector& v)
{
    double s = 0.0;
    for (const auto& z : v) s += std::norm(z);
    return std::sqrt(s);
}

inline std::complex<double> dot(const KrylovVector& a, const KrylovVector& b)
{
    std::complex<double> s{0.0, 0.0};
    for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}

} // namespace detail

/// Restarted GMRES with right preconditioning: solves A x = b through
/// A M^{-1} y = b, x = M^{-1} y. Modified Gram-Schmidt Arnoldi, Givens rotations.
/// An empty preconditioner means M = I.
inline GmresResult gmres(const LinearMap& apply_a, const LinearMap& apply_m_inv,
                         const KrylovVector& b, KrylovVector x0, const GmresOptions& opt)
{
    using cd = std::complex<double>;
    const std::size_t n = b.size();
    GmresResult res;
    res.x = x0.empty() ? KrylovVector(n, cd{0.0, 0.0}) : std::move(x0);

    const double bnorm = detail::norm2(b);
    if (bnorm == 0.0) {
        res.x.assign(n, cd{0.0, 0.0});
        res.converged = true;
        return res;
    }

    auto precond = [&](const KrylovVector& in, KrylovVector& out) {
        if (apply_m_inv) apply_m_inv(in, out);
        else out = in;
    };

    const std::size_t m = opt.restart;
    std::vector<KrylovVector> basis(m + 1, KrylovVector(n));
    std::vector<KrylovVector> hess(m + 1, KrylovVector(m, cd{0.0, 0.0}));
    std::vector<cd> cs(m), sn(m), g(m + 1);
    KrylovVector w(n), z(n), r(n);

    while (res.iterations < opt.max_iterations) {
        apply_a(res.x, r);
        for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
        double beta = detail::norm2(r);
        res.relative_residual = beta / bnorm;
        if (res.relative_residual <= opt.rel_tol) {
            res.converged = true;
            return res;
        }
        for (std::size_t i = 0; i < n; ++i) basis[0][i] = r[i] / beta;
        std::fill(g.begin(), g.end(), cd{0.0, 0.0});
        g[0] = beta;

        std::size_t k = 0;
        bool breakdown = false;
        for (; k < m && res.iterations < opt.max_iterations; ++k) {
            ++res.iterations;
            precond(basis[k], z);
            apply_a(z, w);
            for (std::size_t j = 0; j <= k; ++j) {
                const cd h = detail::dot(basis[j], w);
                hess[j][k] = h;
                for (std::size_t i = 0; i < n; ++i) w[i] -= h * basis[j][i];
            }
            const double hnext = detail::norm2(w);
            hess[k + 1][k] = hnext;
            if (hnext > 0.0)
                for (std::size_t i = 0; i < n; ++i) basis[k + 1][i] = w[i] / hnext;

            for (std::size_t j = 0; j < k; ++j) {
                const cd t = std::conj(cs[j]) * hess[j][k] + std::conj(sn[j]) * hess[j + 1][k];
                hess[j + 1][k] = -sn[j] * hess[j][k] + cs[j] * hess[j + 1][k];
                hess[j][k] = t;
            }
            const double denom = std::hypot(std::abs(hess[k][k]), std::abs(hess[k + 1][k]));
            if (denom == 0.0) {
                cs[k] = 1.0;
                sn[k] = 0.0;
            } else {
                cs[k] = hess[k][k] / denom;
                sn[k] = hess[k + 1][k] / denom;
            }
            hess[k][k] = std::conj(cs[k]) * hess[k][k] + std::conj(sn[k]) * hess[k + 1][k];
            hess[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] = std::conj(cs[k]) * g[k];

            res.relative_residual = std::abs(g[k + 1]) / bnorm;
            if (res.relative_residual <= opt.rel_tol || hnext == 0.0) {
                breakdown = hnext == 0.0;
                ++k;
                break;
            }
        }

        // back substitution on the k x k triangle, then x += M^{-1} V y
        std::vector<cd> y(k);
        for (std::size_t ii = k; ii-- > 0;) {
            cd s = g[ii];
            for (std::size_t j = ii + 1; j < k; ++j) s -= hess[ii][j] * y[j];
            // a zero pivot only occurs on breakdown with a singular operator; drop that direction
            y[ii] = hess[ii][ii] != 0.0 ? s / hess[ii][ii] : cd{0.0, 0.0};
        }
        std::fill(w.begin(), w.end(), cd{0.0, 0.0});
        for (std::size_t j = 0; j < k; ++j)
            for (std::size_t i = 0; i < n; ++i) w[i] += y[j] * basis[j][i];
        precond(w, z);
        for (std::size_t i = 0; i < n; ++i) res.x[i] += z[i];
        // the Krylov space is invariant: restarting would rebuild the same space
        if (breakdown && res.relative_residual > opt.rel_tol) return res;
    }

    apply_a(res.x, r);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
    res.relative_residual = detail::norm2(r) / bnorm;
    res.converged = res.relative_residual <= opt.rel_tol;
    return res;
}

} // namespace ptb
