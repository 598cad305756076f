#include "ihif/classifier.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "ihif/errors.hpp"

namespace ihif {

Metric metric_from_string(const std::string& name) {
    if (name == "l2") return Metric::l2;
    if (name == "cosine" || name == "cos") return Metric::cosine;
    throw DataError("unknown metric '" + name + "' (want l2 or cosine)");
}

std::string to_string(Metric m) { return m == Metric::l2 ? "l2" : "cosine"; }

std::pair<std::vector<std::string>, Eigen::MatrixXd>
class_means(const Eigen::MatrixXd& features, const std::vector<std::string>& labels) {
    if (static_cast<std::size_t>(features.cols()) != labels.size())
        throw DataError("class_means: one label per feature column required");
    if (labels.empty()) throw DataError("class_means: empty input");

    std::map<std::string, std::vector<Eigen::Index>> groups;
    for (std::size_t i = 0; i < labels.size(); ++i)
        groups[labels[i]].push_back(static_cast<Eigen::Index>(i));

    std::vector<std::string> out_labels;
    Eigen::MatrixXd means(features.rows(), static_cast<Eigen::Index>(groups.size()));
    Eigen::Index col = 0;
    for (const auto& [label, idx] : groups) {
        Eigen::VectorXd sum = Eigen::VectorXd::Zero(features.rows());
        for (auto i : idx) sum += features.col(i);
        means.col(col++) = sum / static_cast<double>(idx.size());
        out_labels.push_back(label);
    }
    return {std::move(out_labels), std::move(means)};
}

double dist_l2(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    if (x.size() != y.size()) throw DataError("dist_l2: length mismatch");
    return (x - y).squaredNorm();
}

double sim_cos(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    if (x.size() != y.size()) throw DataError("sim_cos: length mismatch");
    const double nx = x.norm();
    const double ny = y.norm();
    if (!(nx > 0.0) || !(ny > 0.0)) throw DataError("sim_cos: zero-norm input");
    return std::clamp(-x.dot(y) / (nx * ny), -1.0, 1.0);
}

Decision classify(const Eigen::VectorXd& z, const ClassModel& model) {
    if (model.labels.empty() || model.means.cols() == 0)
        throw DataError("classify: empty model");
    if (z.size() != model.means.rows())
        throw DataError("classify: query length does not match model");

    Decision best;
    for (std::size_t k = 0; k < model.labels.size(); ++k) {
        const double score = model.metric == Metric::l2
                                 ? dist_l2(z, model.means.col(static_cast<Eigen::Index>(k)))
                                 : sim_cos(z, model.means.col(static_cast<Eigen::Index>(k)));
        if (k == 0 || score < best.score ||
            (score == best.score && model.labels[k] < best.label)) {
            best.label = model.labels[k];
            best.score = score;
        }
    }
    best.accepted = best.score <= model.accept_threshold;
    return best;
}

double calibrate_threshold(const std::vector<std::pair<double, bool>>& scores) {
    if (scores.empty()) throw DataError("calibrate: no scores");
    if (std::none_of(scores.begin(), scores.end(), [](const auto& s) { return s.second; }))
        throw DataError("calibrate: need at least one genuine score");

    std::set<double> distinct;
    for (const auto& [score, genuine] : scores) distinct.insert(score);
    const std::vector<double> sorted(distinct.begin(), distinct.end());

    // Candidate cuts with the half-gap to the nearest score as the margin.
    std::vector<std::pair<double, double>> candidates; // (tau, margin)
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i)
        candidates.push_back({(sorted[i] + sorted[i + 1]) / 2.0,
                              (sorted[i + 1] - sorted[i]) / 2.0});
    candidates.push_back({sorted.back(), 0.0}); // accept everything

    const auto accuracy = [&](double tau) {
        std::size_t correct = 0;
        for (const auto& [score, genuine] : scores)
            if ((score <= tau) == genuine) ++correct;
        return static_cast<double>(correct) / static_cast<double>(scores.size());
    };

    double best_tau = candidates.front().first;
    double best_acc = -1.0;
    double best_margin = -1.0;
    for (const auto& [tau, margin] : candidates) {
        const double acc = accuracy(tau);
        const bool better = acc > best_acc ||
                            (acc == best_acc && margin > best_margin) ||
                            (acc == best_acc && margin == best_margin && tau < best_tau);
        if (better) {
            best_tau = tau;
            best_acc = acc;
            best_margin = margin;
        }
    }
    return best_tau;
}

} // namespace ihif
