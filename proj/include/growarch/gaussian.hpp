/*
 * Copyright 2026 The growarch Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Gaussian summaries of feature matrices and closed-form / Monte-Carlo
// distances between them. Everything here is a pure function of its
// arguments; Monte-Carlo routines take an explicit seed.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "growarch/errors.hpp"

namespace growarch {

template <typename Scalar>
using FeatureMatrixT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using FeatureMatrix = FeatureMatrixT<double>;

/// Relative ridge scale applied when no explicit ridge is given.
inline constexpr double kDefaultRidgeScale = 1e-6;

/// Maximum-likelihood mean and covariance of a sample.
template <typename Scalar>
struct GaussianSummary {
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    Vector mean;
    Matrix cov;
    Eigen::Index n_samples = 0;

    [[nodiscard]] Eigen::Index dim() const noexcept { return mean.size(); }
};

using GaussianSummaryd = GaussianSummary<double>;

namespace detail {

template <typename Derived>
bool is_symmetric(const Eigen::MatrixBase<Derived>& s, double abs_tol) {
    if (s.rows() != s.cols()) return false;
    return (s - s.transpose()).cwiseAbs().maxCoeff() <= abs_tol;
}

template <typename Scalar>
void require_same_dim(const GaussianSummary<Scalar>& a, const GaussianSummary<Scalar>& b) {
    if (a.dim() != b.dim() || a.cov.rows() != b.cov.rows()) {
        throw DimensionMismatch("gaussian dimensions differ: " + std::to_string(a.dim()) + " vs " +
                                std::to_string(b.dim()));
    }
}

// Square root of a symmetric PSD matrix; negative round-off eigenvalues clamp to zero.
template <typename Matrix>
Matrix psd_sqrt(const Matrix& s) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(s);
    if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
    auto roots = es.eigenvalues().cwiseMax(0).cwiseSqrt().eval();
    return es.eigenvectors() * roots.asDiagonal() * es.eigenvectors().transpose();
}

template <typename Scalar>
Eigen::LLT<typename GaussianSummary<Scalar>::Matrix> cholesky_or_throw(
    const typename GaussianSummary<Scalar>::Matrix& cov, const char* which) {
    Eigen::LLT<typename GaussianSummary<Scalar>::Matrix> llt(cov);
    if (llt.info() != Eigen::Success) {
        throw NotSPD(std::string(which) + " covariance is not positive definite");
    }
    return llt;
}

template <typename Scalar>
Scalar log_det_from_llt(const Eigen::LLT<typename GaussianSummary<Scalar>::Matrix>& llt) {
    return Scalar(2) * llt.matrixLLT().diagonal().array().log().sum();
}

}  // namespace detail

/// Checks the GaussianSummary invariants: matching shapes, symmetric cov
/// (abs tol 1e-10), strictly positive eigenvalues.
template <typename Scalar>
void validate(const GaussianSummary<Scalar>& g) {
    if (g.cov.rows() != g.dim() || g.cov.cols() != g.dim()) {
        throw DimensionMismatch("mean and covariance dimensions disagree");
    }
    if (!detail::is_symmetric(g.cov, 1e-10)) throw NotSPD("covariance is not symmetric");
    Eigen::SelfAdjointEigenSolver<typename GaussianSummary<Scalar>::Matrix> es(g.cov, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= Scalar(0)) {
        throw NotSPD("covariance is not positive definite");
    }
}

/// MLE fit: column means and (1/rows)-normalized scatter, plus `ridge`·I.
template <typename Derived>
GaussianSummary<typename Derived::Scalar> fit_gaussian(const Eigen::MatrixBase<Derived>& m,
                                                       typename Derived::Scalar ridge) {
    using Scalar = typename Derived::Scalar;
    if (m.rows() < 2) throw DegenerateInput("need at least 2 samples to fit a gaussian");
    if (m.cols() < 1) throw DegenerateInput("feature dimension must be at least 1");
    if (!m.allFinite()) throw InvalidData("feature matrix contains non-finite entries");
    if (!(ridge >= Scalar(0))) throw InvalidData("ridge must be nonnegative");

    GaussianSummary<Scalar> g;
    g.n_samples = m.rows();
    g.mean = m.colwise().mean().transpose();
    auto centered = (m.rowwise() - g.mean.transpose()).eval();
    g.cov = (centered.transpose() * centered) / static_cast<Scalar>(m.rows());
    g.cov = Scalar(0.5) * (g.cov + g.cov.transpose()).eval();
    g.cov.diagonal().array() += ridge;
    return g;
}

/// MLE fit with ridge = scale·trace(Σ)/q (falls back to `scale` when the
/// sample has zero variance).
template <typename Derived>
GaussianSummary<typename Derived::Scalar> fit_gaussian(const Eigen::MatrixBase<Derived>& m) {
    using Scalar = typename Derived::Scalar;
    auto g = fit_gaussian(m, Scalar(0));
    Scalar ridge = Scalar(kDefaultRidgeScale) * g.cov.trace() / static_cast<Scalar>(g.dim());
    if (!(ridge > Scalar(0))) ridge = Scalar(kDefaultRidgeScale);
    g.cov.diagonal().array() += ridge;
    return g;
}

/// Principal square root of a symmetric positive definite matrix, via the
/// symmetric eigensolver.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> sqrt_spd(const Eigen::MatrixBase<Derived>& s) {
    using Scalar = typename Derived::Scalar;
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    if (s.rows() != s.cols() || s.rows() == 0) throw NotSPD("matrix is not square");
    const double scale = std::max<double>(1.0, static_cast<double>(s.cwiseAbs().maxCoeff()));
    if (!detail::is_symmetric(s, 1e-10 * scale)) throw NotSPD("matrix is not symmetric");
    Matrix sym = Scalar(0.5) * (s + s.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
    if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
    if (es.eigenvalues().minCoeff() <= Scalar(0)) throw NotSPD("matrix is not positive definite");
    Matrix r = es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
    return Scalar(0.5) * (r + r.transpose());
}

/// Squared 2-Wasserstein distance between two Gaussians:
/// ||μ1−μ2||² + tr(Σ1 + Σ2 − 2 (Σ2^½ Σ1 Σ2^½)^½). Negative round-off clamps to 0.
template <typename Scalar>
Scalar wasserstein2_gaussian(const GaussianSummary<Scalar>& g1, const GaussianSummary<Scalar>& g2) {
    detail::require_same_dim(g1, g2);
    if (g1.mean == g2.mean && g1.cov == g2.cov) return Scalar(0);

    using Matrix = typename GaussianSummary<Scalar>::Matrix;
    const Matrix root2 = detail::psd_sqrt(Matrix(Scalar(0.5) * (g2.cov + g2.cov.transpose())));
    Matrix inner = root2 * g1.cov * root2;
    inner = Scalar(0.5) * (inner + inner.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> es(inner, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
    const Scalar cross = es.eigenvalues().cwiseMax(0).cwiseSqrt().sum();

    const Scalar value = (g1.mean - g2.mean).squaredNorm() + g1.cov.trace() + g2.cov.trace() - Scalar(2) * cross;
    return std::max(value, Scalar(0));
}

/// Closed-form KL(g1 || g2) in nats.
template <typename Scalar>
Scalar kl_gaussian(const GaussianSummary<Scalar>& g1, const GaussianSummary<Scalar>& g2) {
    detail::require_same_dim(g1, g2);
    const auto llt1 = detail::cholesky_or_throw<Scalar>(g1.cov, "first");
    const auto llt2 = detail::cholesky_or_throw<Scalar>(g2.cov, "second");
    const auto q = static_cast<Scalar>(g1.dim());

    const Scalar trace_term = llt2.solve(g1.cov).trace();
    const typename GaussianSummary<Scalar>::Vector diff = g2.mean - g1.mean;
    const Scalar mahalanobis = diff.dot(llt2.solve(diff));
    const Scalar log_det_ratio = detail::log_det_from_llt<Scalar>(llt2) - detail::log_det_from_llt<Scalar>(llt1);
    return std::max(Scalar(0.5) * (trace_term + mahalanobis - q + log_det_ratio), Scalar(0));
}

/// Log-density evaluator built once from a Cholesky factor.
template <typename Scalar>
class GaussianLogDensity {
public:
    using Vector = typename GaussianSummary<Scalar>::Vector;
    using Matrix = typename GaussianSummary<Scalar>::Matrix;

    explicit GaussianLogDensity(const GaussianSummary<Scalar>& g)
        : mean_(g.mean), llt_(detail::cholesky_or_throw<Scalar>(g.cov, "density")) {
        const auto q = static_cast<Scalar>(g.dim());
        log_norm_ = Scalar(-0.5) * (q * std::log(Scalar(2) * std::numbers::pi_v<Scalar>) +
                                    detail::log_det_from_llt<Scalar>(llt_));
    }

    template <typename Derived>
    [[nodiscard]] Scalar operator()(const Eigen::MatrixBase<Derived>& x) const {
        Vector z = llt_.matrixL().solve(Vector(x - mean_));
        return log_norm_ - Scalar(0.5) * z.squaredNorm();
    }

    /// mean + L·z for a standard-normal draw z.
    template <typename Derived>
    [[nodiscard]] Vector transform(const Eigen::MatrixBase<Derived>& z) const {
        return mean_ + llt_.matrixL() * z;
    }

private:
    Vector mean_;
    Eigen::LLT<Matrix> llt_;
    Scalar log_norm_ = 0;
};

/// Monte-Carlo Jensen-Shannon divergence in bits, clamped to [0, 1].
/// `n_samples` draws come from each argument; the first argument's draws
/// use stream (seed, 0) and the second's stream (seed, 1).
template <typename Scalar>
Scalar js_divergence_mc(const GaussianSummary<Scalar>& g1, const GaussianSummary<Scalar>& g2, std::int64_t n_samples,
                        std::uint64_t seed) {
    detail::require_same_dim(g1, g2);
    if (n_samples < 1000) throw InvalidData("js_divergence_mc needs at least 1000 samples");
    if (g1.mean == g2.mean && g1.cov == g2.cov) return Scalar(0);

    const GaussianLogDensity<Scalar> p(g1);
    const GaussianLogDensity<Scalar> q(g2);
    const Scalar ln2 = std::numbers::ln2_v<Scalar>;

    // E_x~a [ log2 (2 a(x) / (a(x) + b(x))) ]
    auto half_term = [&](const GaussianLogDensity<Scalar>& a, const GaussianLogDensity<Scalar>& b,
                         std::uint64_t stream) {
        std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + stream);
        std::normal_distribution<Scalar> normal;
        typename GaussianSummary<Scalar>::Vector z(g1.dim());
        Scalar acc = 0;
        for (std::int64_t i = 0; i < n_samples; ++i) {
            for (Eigen::Index j = 0; j < z.size(); ++j) z(j) = normal(rng);
            const auto x = a.transform(z);
            const Scalar la = a(x);
            const Scalar lb = b(x);
            const Scalar hi = std::max(la, lb);
            const Scalar log_mix = hi + std::log(std::exp(la - hi) + std::exp(lb - hi));
            acc += (la - log_mix) / ln2 + Scalar(1);
        }
        return acc / static_cast<Scalar>(n_samples);
    };

    const Scalar js = Scalar(0.5) * (half_term(p, q, 0) + half_term(q, p, 1));
    return std::clamp(js, Scalar(0), Scalar(1));
}

}  // namespace growarch
