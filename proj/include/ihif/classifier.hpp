#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace ihif {

enum class Metric { l2, cosine };

Metric metric_from_string(const std::string& name);
std::string to_string(Metric m);

/// Nearest-mean model: one mean per enrolled class plus a global acceptance
/// threshold on the winning score.
struct ClassModel {
    std::vector<std::string> labels; // sorted, distinct
    Eigen::MatrixXd means;           // one column per label
    double accept_threshold = 0.0;
    Metric metric = Metric::cosine;
};

/// Per-class arithmetic means; labels come back sorted lexicographically.
std::pair<std::vector<std::string>, Eigen::MatrixXd>
class_means(const Eigen::MatrixXd& features, const std::vector<std::string>& labels);

/// Squared Euclidean distance (no square root).
double dist_l2(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

/// Negated cosine similarity, in [-1, 1]; more negative = more similar, so the
/// same minimum rule covers both measures.
double sim_cos(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

struct Decision {
    std::string label;
    double score = 0.0;
    bool accepted = false;
};

/// Label of the minimizing class mean; ties go to the lexicographically
/// smaller label; accepted iff score <= threshold.
Decision classify(const Eigen::VectorXd& z, const ClassModel& model);

/// Chooses the accept threshold maximizing training accuracy over candidate
/// cuts (midpoints of consecutive distinct scores, plus the largest score as
/// the accept-everything cut). Accuracy ties go to the cut farthest from its
/// neighboring scores, then to the smaller cut.
double calibrate_threshold(const std::vector<std::pair<double, bool>>& scores);

} // namespace ihif
