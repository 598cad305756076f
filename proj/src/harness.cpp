#include "ihif/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "ihif/errors.hpp"
#include "ihif/ica.hpp"
#include "ihif/rng.hpp"

namespace ihif {

namespace {

/// Runs fn, attributing any failure to (stage, item). Numerical errors keep
/// their type so strict-mode failures still exit with the numerical code.
template <typename Fn>
auto stage(const std::string& name, const std::string& item, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const StageError&) {
        throw;
    } catch (const NumericalError& e) {
        throw NumericalError("[" + name + (item.empty() ? "" : ": " + item) + "] " + e.what());
    } catch (const std::exception& e) {
        throw StageError(name, item, e.what());
    }
}

/// Index-addressed parallel loop: results keyed by index stay deterministic
/// whatever the execution order. The first exception wins and is rethrown
/// on the calling thread.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& body) {
    std::size_t n_threads = threads > 0 ? static_cast<std::size_t>(threads)
                                        : std::max(1u, std::thread::hardware_concurrency());
    n_threads = std::min(n_threads, n);
    if (n_threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;

    const auto worker = [&] {
        while (!failed.load(std::memory_order_relaxed)) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                body(i);
            } catch (...) {
                std::scoped_lock lock(error_mutex);
                if (!error) error = std::current_exception();
                failed.store(true);
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

std::string item_name(const LabeledImage& li) {
    return li.filename.empty() ? li.subject_id : li.subject_id + "/" + li.filename;
}

RaggedFeature image_features(const Image& img, const ConvolutionEngine& engine, int width,
                             int height, const ExtractionParams& p) {
    const Image sized = resize(img, width, height);
    const ResponseStack stack = engine.responses(sized);
    return localize(stack, p);
}

double score_between(Metric metric, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return metric == Metric::l2 ? dist_l2(a, b) : sim_cos(a, b);
}

std::string fmt17(double v) {
    std::ostringstream ss;
    ss.precision(17);
    ss << v;
    return ss.str();
}

std::string fmt_fixed(double v, int digits) {
    std::ostringstream ss;
    ss.setf(std::ios::fixed);
    ss.precision(digits);
    ss << v;
    return ss.str();
}

} // namespace

TrainingOutput run_training(const ExperimentConfig& cfg) {
    stage("config", "", [&] { cfg.validate(); });
    const auto data =
        stage("load", cfg.dataset_root.string(), [&] { return load_dataset(cfg.dataset_root); });
    const auto split = stage("split", "", [&] { return split_dataset(data, cfg.split); });
    return train_on_split(cfg, split);
}

TrainingOutput train_on_split(const ExperimentConfig& cfg, const Split& split) {
    stage("config", "", [&] { cfg.validate(); });
    if (split.train.empty()) throw StageError("split", "", "training set is empty");

    const GaborBank bank = stage("gabor", "", [&] { return make_bank(cfg.gabor); });
    const ConvolutionEngine engine(bank, cfg.image_width, cfg.image_height);

    const std::size_t n = split.train.size();
    std::vector<RaggedFeature> ragged(n);
    parallel_for(n, cfg.threads, [&](std::size_t i) {
        stage("features", item_name(split.train[i]), [&] {
            ragged[i] = image_features(split.train[i].image, engine, cfg.image_width,
                                       cfg.image_height, cfg.extraction);
            return 0;
        });
    });

    const GlobalLengths lengths =
        stage("fit_lengths", "", [&] { return fit_global_lengths(ragged); });

    const auto n_features = static_cast<Eigen::Index>(lengths.vector_length());
    Eigen::MatrixXd X(n_features, static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const FeatureVector v = build_vector(ragged[i], lengths);
        X.col(static_cast<Eigen::Index>(i)) =
            Eigen::Map<const Eigen::VectorXd>(v.data(), n_features);
    }

    auto [Xc, mean] = center(X);
    auto [Z, whitening] =
        stage("whiten", "", [&] { return whiten(Xc, cfg.ica.eigen_floor, cfg.ica.max_dim); });
    whitening.mean = mean;

    const int d = whitening.dim();
    const int n_ics = cfg.ica.n_ics == 0 ? std::min(500, d) : cfg.ica.n_ics;
    if (n_ics > d)
        throw StageError("ica", "",
                         "n_ics " + std::to_string(n_ics) + " exceeds the whitened dimension " +
                             std::to_string(d));

    FastIcaOptions opts;
    opts.seed = cfg.ica.seed;
    opts.tol = cfg.ica.tol;
    opts.max_iter = cfg.ica.max_iter;
    const SymmetricResult sym =
        stage("ica", "", [&] { return fastica_symmetric(Z, n_ics, opts); });
    if (cfg.strict && !sym.converged)
        throw NumericalError("[ica] no convergence after " + std::to_string(sym.sweeps) +
                             " sweeps (strict mode)");

    IcaModel ica;
    ica.whitening = std::move(whitening);
    ica.unmixing = sym.W;

    const Eigen::MatrixXd Y = ica.unmixing * Z;
    std::vector<std::string> train_labels(n);
    for (std::size_t i = 0; i < n; ++i) train_labels[i] = split.train[i].subject_id;

    auto [labels, means] = stage("class_means", "", [&] { return class_means(Y, train_labels); });

    std::unordered_map<std::string, Eigen::Index> column_of;
    for (std::size_t k = 0; k < labels.size(); ++k)
        column_of[labels[k]] = static_cast<Eigen::Index>(k);

    std::vector<std::pair<double, bool>> calibration;
    calibration.reserve(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        const Eigen::VectorXd y = Y.col(static_cast<Eigen::Index>(i));
        const Eigen::Index own = column_of.at(train_labels[i]);
        calibration.emplace_back(score_between(cfg.metric, y, means.col(own)), true);
        // Nearest wrong-class score stands in for an impostor during calibration.
        double best_other = std::numeric_limits<double>::infinity();
        for (Eigen::Index k = 0; k < means.cols(); ++k) {
            if (k == own) continue;
            best_other = std::min(best_other, score_between(cfg.metric, y, means.col(k)));
        }
        if (std::isfinite(best_other)) calibration.emplace_back(best_other, false);
    }
    const double tau =
        stage("calibrate", "", [&] { return calibrate_threshold(calibration); });

    TrainingOutput out;
    out.bundle.version = kModelVersion;
    out.bundle.image_width = cfg.image_width;
    out.bundle.image_height = cfg.image_height;
    out.bundle.gabor = cfg.gabor;
    out.bundle.extraction = cfg.extraction;
    out.bundle.lengths = lengths;
    out.bundle.ica = std::move(ica);
    out.bundle.classifier.labels = std::move(labels);
    out.bundle.classifier.means = std::move(means);
    out.bundle.classifier.accept_threshold = tau;
    out.bundle.classifier.metric = cfg.metric;
    out.bundle.validate();
    out.split = split;
    out.ica_sweeps = sym.sweeps;
    out.ica_converged = sym.converged;
    out.ica_restarts = sym.restarts;
    return out;
}

namespace {

Decision classify_with_engine(const ModelBundle& bundle, const ConvolutionEngine& engine,
                              const Image& img) {
    const RaggedFeature rf = image_features(img, engine, bundle.image_width, bundle.image_height,
                                            bundle.extraction);
    const FeatureVector v = build_vector(rf, bundle.lengths);
    const Eigen::VectorXd x =
        Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
    return classify(project(x, bundle.ica), bundle.classifier);
}

} // namespace

Decision classify_image(const ModelBundle& bundle, const Image& img) {
    stage("model", "", [&] { bundle.validate(); });
    const GaborBank bank = make_bank(bundle.gabor);
    const ConvolutionEngine engine(bank, bundle.image_width, bundle.image_height);
    return stage("classify", "", [&] { return classify_with_engine(bundle, engine, img); });
}

EvaluationReport run_evaluation(const ModelBundle& bundle,
                                const std::vector<LabeledImage>& positive_test,
                                const std::vector<LabeledImage>& negative_test, int threads) {
    stage("model", "", [&] { bundle.validate(); });
    if (positive_test.empty() && negative_test.empty())
        throw StageError("evaluate", "", "no test images");

    const GaborBank bank = make_bank(bundle.gabor);
    const ConvolutionEngine engine(bank, bundle.image_width, bundle.image_height);

    EvaluationReport report;
    const std::size_t n_pos = positive_test.size();
    const std::size_t n_all = n_pos + negative_test.size();
    report.rows.resize(n_all);

    parallel_for(n_all, threads, [&](std::size_t i) {
        const bool genuine = i < n_pos;
        const LabeledImage& li = genuine ? positive_test[i] : negative_test[i - n_pos];
        ImageResult& row = report.rows[i];
        row.subject_id = li.subject_id;
        row.filename = li.filename;
        row.genuine = genuine;
        row.decision = stage("evaluate", item_name(li),
                             [&] { return classify_with_engine(bundle, engine, li.image); });
        if (genuine)
            row.outcome =
                (row.decision.accepted && row.decision.label == li.subject_id) ? "TP" : "FN";
        else
            row.outcome = row.decision.accepted ? "FP" : "TN";
    });

    for (const ImageResult& row : report.rows) {
        if (row.outcome == "TP") ++report.counts.true_positive;
        else if (row.outcome == "FN") ++report.counts.false_negative;
        else if (row.outcome == "FP") ++report.counts.false_positive;
        else ++report.counts.true_negative;
    }
    report.metrics = compute_metrics(report.counts);
    return report;
}

FeatureTable extract_table(const ExperimentConfig& cfg, const std::vector<LabeledImage>& images) {
    stage("config", "", [&] { cfg.validate(); });
    if (images.empty()) throw StageError("extract", "", "no images");

    const GaborBank bank = stage("gabor", "", [&] { return make_bank(cfg.gabor); });
    const ConvolutionEngine engine(bank, cfg.image_width, cfg.image_height);

    const std::size_t n = images.size();
    std::vector<RaggedFeature> ragged(n);
    parallel_for(n, cfg.threads, [&](std::size_t i) {
        stage("features", item_name(images[i]), [&] {
            ragged[i] = image_features(images[i].image, engine, cfg.image_width, cfg.image_height,
                                       cfg.extraction);
            return 0;
        });
    });

    FeatureTable table;
    table.lengths = stage("fit_lengths", "", [&] { return fit_global_lengths(ragged); });
    table.vectors.resize(n);
    for (std::size_t i = 0; i < n; ++i) table.vectors[i] = build_vector(ragged[i], table.lengths);
    return table;
}

void write_feature_csv(const std::filesystem::path& path,
                       const std::vector<LabeledImage>& images, const FeatureTable& table) {
    if (images.size() != table.vectors.size())
        throw DataError("feature CSV: image/vector count mismatch");
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());

    const std::size_t width = table.lengths.vector_length();
    out << "subject,filename";
    for (std::size_t j = 0; j < width; ++j) out << ",f" << j;
    out << "\n";
    for (std::size_t i = 0; i < images.size(); ++i) {
        out << images[i].subject_id << "," << images[i].filename;
        for (const double v : table.vectors[i]) out << "," << fmt17(v);
        out << "\n";
    }
    if (!out.flush()) throw DataError("failed writing " + path.string());
}

namespace {

std::string svg_bar_chart(const Metrics& m) {
    struct Bar {
        const char* name;
        std::optional<double> value;
    };
    const Bar bars[] = {{"sensitivity", m.sensitivity},
                        {"specificity", m.specificity},
                        {"accuracy", m.accuracy}};

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"360\" height=\"260\" "
           "viewBox=\"0 0 360 260\">\n"
        << "  <rect width=\"360\" height=\"260\" fill=\"white\"/>\n"
        << "  <line x1=\"40\" y1=\"220\" x2=\"340\" y2=\"220\" stroke=\"black\"/>\n"
        << "  <line x1=\"40\" y1=\"20\" x2=\"40\" y2=\"220\" stroke=\"black\"/>\n"
        << "  <text x=\"8\" y=\"24\" font-size=\"10\">1.0</text>\n"
        << "  <text x=\"8\" y=\"224\" font-size=\"10\">0.0</text>\n";
    for (int i = 0; i < 3; ++i) {
        const int x = 60 + 100 * i;
        if (bars[i].value) {
            const double v = *bars[i].value;
            const double h = 200.0 * v;
            svg << "  <rect x=\"" << x << "\" y=\"" << fmt_fixed(220.0 - h, 2) << "\" width=\"60\""
                << " height=\"" << fmt_fixed(h, 2) << "\" fill=\"#4878a8\"/>\n"
                << "  <text x=\"" << x + 30 << "\" y=\"" << fmt_fixed(214.0 - h, 2)
                << "\" font-size=\"11\" text-anchor=\"middle\">" << fmt_fixed(v, 4) << "</text>\n";
        } else {
            svg << "  <text x=\"" << x + 30
                << "\" y=\"214\" font-size=\"11\" text-anchor=\"middle\">n/a</text>\n";
        }
        svg << "  <text x=\"" << x + 30 << "\" y=\"236\" font-size=\"11\" text-anchor=\"middle\">"
            << bars[i].name << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << text;
    if (!out.flush()) throw DataError("failed writing " + path.string());
}

} // namespace

void write_report(const std::filesystem::path& dir, const EvaluationReport& report,
                  const ExperimentConfig& cfg) {
    std::filesystem::create_directories(dir);

    std::ostringstream csv;
    csv << "set,subject,filename,predicted,score,accepted,outcome\n";
    for (const ImageResult& row : report.rows) {
        csv << (row.genuine ? "genuine" : "impostor") << "," << row.subject_id << ","
            << row.filename << "," << row.decision.label << "," << fmt17(row.decision.score) << ","
            << (row.decision.accepted ? "true" : "false") << "," << row.outcome << "\n";
    }
    write_text(dir / "report.csv", csv.str());

    std::ostringstream summary;
    summary << "IHIF evaluation summary\n=======================\n\n"
            << format_metrics(report.counts, report.metrics) << "\nConfiguration\n-------------\n";
    for (const auto& [key, value] : config_to_keys(cfg))
        summary << key << " = " << value << "\n";
    write_text(dir / "summary.txt", summary.str());

    write_text(dir / "metrics.svg", svg_bar_chart(report.metrics));
}

double amari_index(const Eigen::MatrixXd& P) {
    const Eigen::Index n = P.rows();
    if (n != P.cols() || n < 2) throw DataError("amari_index: square matrix of order >= 2 required");
    const Eigen::MatrixXd A = P.cwiseAbs();
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double row_max = A.row(i).maxCoeff();
        const double col_max = A.col(i).maxCoeff();
        if (row_max <= 0.0 || col_max <= 0.0)
            throw NumericalError("amari_index: zero row or column");
        total += A.row(i).sum() / row_max - 1.0;
        total += A.col(i).sum() / col_max - 1.0;
    }
    return total / (2.0 * static_cast<double>(n) * static_cast<double>(n - 1));
}

BssReport bss_demo(int n_sources, int n_samples, std::uint64_t seed) {
    if (n_sources < 2 || n_sources > 8)
        throw DataError("bss-demo: n_sources must be between 2 and 8");
    if (n_samples < 10 * n_sources)
        throw DataError("bss-demo: need at least " + std::to_string(10 * n_sources) + " samples");

    Rng rng(seed);
    Eigen::MatrixXd S(n_sources, n_samples);
    const double half_width = std::sqrt(3.0); // unit-variance uniform support
    for (int k = 0; k < n_sources; ++k)
        for (int t = 0; t < n_samples; ++t)
            S(k, t) = (k % 2 == 0) ? rng.laplace() : rng.uniform(-half_width, half_width);

    Eigen::MatrixXd A(n_sources, n_sources);
    for (;;) {
        for (int r = 0; r < n_sources; ++r)
            for (int c = 0; c < n_sources; ++c) A(r, c) = rng.normal();
        const Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
        const double smin = svd.singularValues()(n_sources - 1);
        if (smin > 0.0 && svd.singularValues()(0) / smin < 100.0) break;
    }

    const Eigen::MatrixXd X = A * S;
    auto [Xc, mean] = center(X);
    auto [Z, whitening] = whiten(Xc);
    whitening.mean = mean;

    FastIcaOptions opts;
    opts.seed = seed;
    const SymmetricResult sym = fastica_symmetric(Z, n_sources, opts);

    const Eigen::MatrixXd white_transform =
        whitening.eigvals.cwiseSqrt().cwiseInverse().asDiagonal() * whitening.eigvecs.transpose();
    const Eigen::MatrixXd P = sym.W * white_transform * A;

    BssReport report;
    report.n_sources = n_sources;
    report.n_samples = n_samples;
    report.seed = seed;
    report.amari = amari_index(P);
    report.sweeps = sym.sweeps;
    report.converged = sym.converged;

    const Eigen::MatrixXd Y = sym.W * Z;
    const Eigen::MatrixXd Sc = S.colwise() - S.rowwise().mean();
    report.correlations.resize(static_cast<std::size_t>(n_sources));
    for (int i = 0; i < n_sources; ++i) {
        double best = 0.0;
        const double ny = Y.row(i).norm();
        for (int j = 0; j < n_sources; ++j) {
            const double nj = Sc.row(j).norm();
            if (ny == 0.0 || nj == 0.0) continue;
            best = std::max(best, std::abs(Y.row(i).dot(Sc.row(j))) / (ny * nj));
        }
        report.correlations[static_cast<std::size_t>(i)] = best;
    }
    return report;
}

std::string format_bss_report(const BssReport& r) {
    std::ostringstream out;
    out << "BSS demo: " << r.n_sources << " sources, " << r.n_samples << " samples, seed "
        << r.seed << "\n"
        << "FastICA: " << (r.converged ? "converged" : "did not converge") << " after " << r.sweeps
        << " sweeps\n"
        << "Amari index: " << fmt_fixed(r.amari, 6) << "\n"
        << "source correlations:";
    for (const double c : r.correlations) out << " " << fmt_fixed(c, 4);
    out << "\n";
    return out.str();
}

} // namespace ihif
