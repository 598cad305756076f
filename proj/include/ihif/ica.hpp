#pragma once

#include <cstdint>
#include <functional>
#include <utility>

#include <Eigen/Dense>

namespace ihif {

/// Sample mean plus the retained eigenpairs of the sample covariance.
/// Whitening maps a centered feature vector x to D^{-1/2} E^T x.
struct WhiteningModel {
    Eigen::VectorXd mean;     // length n_features
    Eigen::MatrixXd eigvecs;  // n_features x d, orthonormal columns
    Eigen::VectorXd eigvals;  // length d, descending, all positive

    int dim() const { return static_cast<int>(eigvals.size()); }
    int n_features() const { return static_cast<int>(mean.size()); }

    /// D^{-1/2} E^T (x - mean)
    Eigen::VectorXd transform(const Eigen::VectorXd& x) const;
};

/// Subtracts the row-wise sample mean. Returns (centered matrix, mean).
std::pair<Eigen::MatrixXd, Eigen::VectorXd> center(const Eigen::MatrixXd& X);

/// Whitens centered data. Eigenvalues at or below eigen_floor_rel * lambda_max
/// are discarded and at most max_dim components are kept (0 = no cap). The
/// returned model has a zero mean vector; callers that centered separately
/// fill it in. Output sample covariance is the identity to ~1e-12.
///
/// When n_features > n_samples the eigenpairs are computed from the Gram
/// matrix X^T X instead of the covariance; same result, bounded memory.
std::pair<Eigen::MatrixXd, WhiteningModel> whiten(const Eigen::MatrixXd& Xc,
                                                  double eigen_floor_rel = 1e-10,
                                                  int max_dim = 0);

/// Quartic-family contrast G(u) = u^4/4 up to a positive factor,
/// g(u) = scale * u^3, g'(u) = 3 * scale * u^2. The factor cancels in the
/// normalized fixed-point iteration; it exists to verify exactly that.
struct QuarticContrast {
    double scale = 1.0;
    double g(double u) const { return scale * u * u * u; }
    double gprime(double u) const { return 3.0 * scale * u * u; }
};

struct FastIcaOptions {
    std::uint64_t seed = 1;
    double tol = 1e-9;  // converged when |<w_new, w_old>| > 1 - tol
    int max_iter = 500;
    QuarticContrast contrast;
};

struct OneUnitResult {
    Eigen::VectorXd w;
    int iterations = 0;
    bool converged = false;
};

/// One-unit FastICA fixed-point iteration on whitened data:
///   w+ = E{z g(w^T z)} - E{g'(w^T z)} w,  w = w+ / |w+|.
/// Throws if Z is visibly non-white.
OneUnitResult fastica_one_unit(const Eigen::MatrixXd& Z, const FastIcaOptions& opts);

struct SymmetricResult {
    Eigen::MatrixXd W; // n_ics x d, orthonormal rows
    int sweeps = 0;
    bool converged = false;
    int restarts = 0;
};

using SweepObserver = std::function<void(const Eigen::MatrixXd&)>;

/// Symmetric FastICA: all rows updated in parallel, re-orthonormalized by
/// (W+ W+^T)^{-1/2} W+ each sweep. A singular W+ W+^T triggers a restart with
/// the next seed (counted in the result). The observer, when set, sees W
/// after every sweep.
SymmetricResult fastica_symmetric(const Eigen::MatrixXd& Z, int n_ics,
                                  const FastIcaOptions& opts,
                                  const SweepObserver& observer = {});

/// (W W^T)^{-1/2} W; identity on already-orthonormal rows.
Eigen::MatrixXd symmetric_decorrelate(const Eigen::MatrixXd& W);

/// One natural-gradient maximum-likelihood step
///   W+ = W + lr (I + E{g(y) y^T}) W,  Y = W Z,
/// with g the score of the quartic-family prior, g(u) = -u^3. The optimizer
/// loop belongs to the caller.
Eigen::MatrixXd infomax_step(const Eigen::MatrixXd& W, const Eigen::MatrixXd& Y, double lr);

struct IcaModel {
    enum class Contrast { quartic };

    WhiteningModel whitening;
    Eigen::MatrixXd unmixing; // n_ics x d
    Contrast contrast = Contrast::quartic;

    int n_ics() const { return static_cast<int>(unmixing.rows()); }
};

/// W D^{-1/2} E^T (x - mean): the independent high-intensity representation.
Eigen::VectorXd project(const Eigen::VectorXd& x, const IcaModel& model);

/// Column-wise project().
Eigen::MatrixXd project_columns(const Eigen::MatrixXd& X, const IcaModel& model);

} // namespace ihif
