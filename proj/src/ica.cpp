#include "ihif/ica.hpp"

#include <cmath>
#include <string>

#include "ihif/errors.hpp"
#include "ihif/rng.hpp"

namespace ihif {

namespace {

void check_matrix(const Eigen::MatrixXd& X) {
    if (X.cols() < 2) throw DataError("ica: need at least 2 samples");
    if (!X.allFinite()) throw DataError("ica: non-finite entries in data matrix");
}

// Flip each column so its largest-magnitude entry is positive. Eigenvector
// signs are otherwise arbitrary, which would leak into serialized models.
void canonicalize_signs(Eigen::MatrixXd& E) {
    for (Eigen::Index c = 0; c < E.cols(); ++c) {
        Eigen::Index imax = 0;
        E.col(c).cwiseAbs().maxCoeff(&imax);
        if (E(imax, c) < 0.0) E.col(c) = -E.col(c);
    }
}

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    Eigen::MatrixXd M(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) M(r, c) = rng.normal();
    return M;
}

void require_whitened(const Eigen::MatrixXd& Z) {
    const Eigen::Index d = Z.rows();
    const double n = static_cast<double>(Z.cols());
    const Eigen::MatrixXd cov = Z * Z.transpose() / (n - 1.0);
    const double dev = (cov - Eigen::MatrixXd::Identity(d, d)).norm();
    // Sampling noise alone gives O(d/sqrt(n)); anything near 0.5*sqrt(d)
    // means the caller skipped whitening.
    if (dev > 0.5 * std::sqrt(static_cast<double>(d)))
        throw DataError("ica: input is not whitened (covariance far from identity)");
}

} // namespace

Eigen::VectorXd WhiteningModel::transform(const Eigen::VectorXd& x) const {
    if (x.size() != mean.size()) throw DataError("whitening: feature length mismatch");
    return eigvals.cwiseSqrt().cwiseInverse().asDiagonal() *
           (eigvecs.transpose() * (x - mean));
}

std::pair<Eigen::MatrixXd, Eigen::VectorXd> center(const Eigen::MatrixXd& X) {
    check_matrix(X);
    const Eigen::VectorXd m = X.rowwise().mean();
    return {X.colwise() - m, m};
}

std::pair<Eigen::MatrixXd, WhiteningModel> whiten(const Eigen::MatrixXd& Xc,
                                                  double eigen_floor_rel, int max_dim) {
    check_matrix(Xc);
    if (max_dim < 0) throw DataError("ica: max_dim must be >= 1 (or 0 for no cap)");

    const Eigen::Index p = Xc.rows();
    const Eigen::Index n = Xc.cols();

    Eigen::VectorXd lambda;  // descending
    Eigen::MatrixXd vectors; // p x k, orthonormal columns
    if (p <= n) {
        const Eigen::MatrixXd cov = Xc * Xc.transpose() / static_cast<double>(n - 1);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
        if (es.info() != Eigen::Success) throw NumericalError("whiten: eigendecomposition failed");
        lambda = es.eigenvalues().reverse();
        vectors = es.eigenvectors().rowwise().reverse();
    } else {
        // Gram-matrix route: X^T X shares the nonzero spectrum of X X^T and
        // u = X v / sqrt((n-1) lambda) recovers the covariance eigenvectors.
        const Eigen::MatrixXd gram = Xc.transpose() * Xc / static_cast<double>(n - 1);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
        if (es.info() != Eigen::Success) throw NumericalError("whiten: eigendecomposition failed");
        lambda = es.eigenvalues().reverse();
        const Eigen::MatrixXd V = es.eigenvectors().rowwise().reverse();
        vectors.resize(p, lambda.size());
        for (Eigen::Index j = 0; j < lambda.size(); ++j) {
            if (lambda(j) > 0.0)
                vectors.col(j) = Xc * V.col(j) / std::sqrt(lambda(j) * (n - 1));
            else
                vectors.col(j).setZero();
        }
    }

    const double lambda_max = lambda.size() > 0 ? lambda(0) : 0.0;
    if (!(lambda_max > 0.0)) throw DataError("whiten: covariance has rank 0");

    const double floor = eigen_floor_rel * lambda_max;
    int d = 0;
    while (d < lambda.size() && lambda(d) > floor) ++d;
    if (max_dim > 0) d = std::min(d, max_dim);
    if (d < 1) throw DataError("whiten: no eigenvalue above the floor");

    WhiteningModel model;
    model.mean = Eigen::VectorXd::Zero(p);
    model.eigvals = lambda.head(d);
    model.eigvecs = vectors.leftCols(d);
    canonicalize_signs(model.eigvecs);

    const Eigen::MatrixXd Z = model.eigvals.cwiseSqrt().cwiseInverse().asDiagonal() *
                              (model.eigvecs.transpose() * Xc);
    return {Z, std::move(model)};
}

OneUnitResult fastica_one_unit(const Eigen::MatrixXd& Z, const FastIcaOptions& opts) {
    check_matrix(Z);
    require_whitened(Z);
    const Eigen::Index d = Z.rows();
    const double n = static_cast<double>(Z.cols());

    Rng rng(opts.seed);
    Eigen::VectorXd w = random_matrix(d, 1, rng);
    w.normalize();

    OneUnitResult result;
    for (int iter = 1; iter <= opts.max_iter; ++iter) {
        const Eigen::VectorXd proj = Z.transpose() * w; // one value per sample
        Eigen::VectorXd gu(proj.size());
        double gprime_mean = 0.0;
        for (Eigen::Index i = 0; i < proj.size(); ++i) {
            gu(i) = opts.contrast.g(proj(i));
            gprime_mean += opts.contrast.gprime(proj(i));
        }
        gprime_mean /= n;

        Eigen::VectorXd w_new = (Z * gu) / n - gprime_mean * w;
        const double norm = w_new.norm();
        if (!(norm > 0.0)) throw NumericalError("fastica: zero update vector");
        w_new /= norm;

        const double agreement = std::abs(w_new.dot(w));
        w = w_new;
        result.iterations = iter;
        if (agreement > 1.0 - opts.tol) {
            result.converged = true;
            break;
        }
    }
    result.w = w;
    return result;
}

Eigen::MatrixXd symmetric_decorrelate(const Eigen::MatrixXd& W) {
    const Eigen::MatrixXd M = W * W.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    if (es.info() != Eigen::Success) throw NumericalError("decorrelate: eigendecomposition failed");
    const Eigen::VectorXd& lam = es.eigenvalues();
    if (lam(0) <= lam(lam.size() - 1) * 1e-12)
        throw NumericalError("decorrelate: rank-deficient W");
    return es.eigenvectors() * lam.cwiseSqrt().cwiseInverse().asDiagonal() *
           es.eigenvectors().transpose() * W;
}

SymmetricResult fastica_symmetric(const Eigen::MatrixXd& Z, int n_ics,
                                  const FastIcaOptions& opts, const SweepObserver& observer) {
    check_matrix(Z);
    require_whitened(Z);
    const Eigen::Index d = Z.rows();
    const double n = static_cast<double>(Z.cols());
    if (n_ics < 1) throw DataError("fastica: n_ics must be >= 1");
    if (n_ics > d)
        throw DataError("fastica: n_ics (" + std::to_string(n_ics) +
                        ") exceeds whitened dimension (" + std::to_string(d) + ")");

    SymmetricResult result;
    constexpr int max_restarts = 5;
    for (int attempt = 0; attempt <= max_restarts; ++attempt) {
        Rng rng(opts.seed + static_cast<std::uint64_t>(attempt));
        Eigen::MatrixXd W;
        try {
            W = symmetric_decorrelate(random_matrix(n_ics, d, rng));
            for (int sweep = 1; sweep <= opts.max_iter; ++sweep) {
                const Eigen::MatrixXd Y = W * Z; // n_ics x n
                Eigen::MatrixXd gY(Y.rows(), Y.cols());
                Eigen::VectorXd gprime_mean = Eigen::VectorXd::Zero(Y.rows());
                for (Eigen::Index r = 0; r < Y.rows(); ++r) {
                    for (Eigen::Index c = 0; c < Y.cols(); ++c) {
                        gY(r, c) = opts.contrast.g(Y(r, c));
                        gprime_mean(r) += opts.contrast.gprime(Y(r, c));
                    }
                    gprime_mean(r) /= n;
                }
                const Eigen::MatrixXd W_plus =
                    gY * Z.transpose() / n - gprime_mean.asDiagonal() * W;
                const Eigen::MatrixXd W_new = symmetric_decorrelate(W_plus);
                if (observer) observer(W_new);

                const double agreement =
                    (W_new.cwiseProduct(W)).rowwise().sum().cwiseAbs().minCoeff();
                W = W_new;
                result.sweeps = sweep;
                if (agreement > 1.0 - opts.tol) {
                    result.converged = true;
                    break;
                }
            }
            result.W = std::move(W);
            return result;
        } catch (const NumericalError&) {
            // Singular W+ W+^T: try the next seed.
            ++result.restarts;
            result.sweeps = 0;
        }
    }
    throw NumericalError("fastica: repeated rank deficiency after restarts");
}

Eigen::MatrixXd infomax_step(const Eigen::MatrixXd& W, const Eigen::MatrixXd& Y, double lr) {
    if (!(lr >= 0.0)) throw DataError("infomax: learning rate must be >= 0");
    if (Y.rows() != W.rows()) throw DataError("infomax: Y rows must match W rows");
    const double n = static_cast<double>(Y.cols());
    if (!(n >= 1.0)) throw DataError("infomax: Y must hold at least one sample");

    // Score of the quartic-family prior: g(u) = -u^3.
    const Eigen::MatrixXd gY = -Y.array().cube().matrix();
    const Eigen::MatrixXd expectation = gY * Y.transpose() / n;
    const Eigen::Index k = W.rows();
    return W + lr * (Eigen::MatrixXd::Identity(k, k) + expectation) * W;
}

Eigen::VectorXd project(const Eigen::VectorXd& x, const IcaModel& model) {
    return model.unmixing * model.whitening.transform(x);
}

Eigen::MatrixXd project_columns(const Eigen::MatrixXd& X, const IcaModel& model) {
    Eigen::MatrixXd out(model.n_ics(), X.cols());
    for (Eigen::Index c = 0; c < X.cols(); ++c) out.col(c) = project(X.col(c), model);
    return out;
}

} // namespace ihif
