#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ihif/errors.hpp"
#include "ihif/harness.hpp"

namespace {

using namespace ihif;

ExperimentConfig make_config(const std::string& path, const std::vector<std::string>& overrides) {
    ExperimentConfig cfg = load_config(path);
    for (const auto& assignment : overrides) apply_override(cfg, assignment);
    cfg.validate();
    return cfg;
}

Split make_split(const std::vector<LabeledImage>& data, const ExperimentConfig& cfg,
                 const std::string& split_in) {
    if (!split_in.empty()) return apply_split_manifest(data, split_in);
    return split_dataset(data, cfg.split);
}

int cmd_extract(const std::string& config_path, const std::vector<std::string>& overrides,
                const std::string& out_path) {
    const ExperimentConfig cfg = make_config(config_path, overrides);
    const auto data = load_dataset(cfg.dataset_root);
    const FeatureTable table = extract_table(cfg, data);
    write_feature_csv(out_path, data, table);
    std::cout << "wrote " << table.vectors.size() << " vectors of length "
              << table.lengths.vector_length() << " to " << out_path << "\n";
    return 0;
}

int cmd_train(const std::string& config_path, const std::vector<std::string>& overrides,
              const std::string& model_path, const std::string& split_in,
              const std::string& split_out) {
    const ExperimentConfig cfg = make_config(config_path, overrides);
    const auto data = load_dataset(cfg.dataset_root);
    const Split split = make_split(data, cfg, split_in);
    if (!split_out.empty()) save_split_manifest(split, split_out);

    const TrainingOutput out = train_on_split(cfg, split);
    save_model(out.bundle, model_path);

    std::cout << "trained on " << split.train.size() << " images, "
              << out.bundle.classifier.labels.size() << " subjects\n"
              << "feature length " << out.bundle.lengths.vector_length() << ", whitened dim "
              << out.bundle.ica.whitening.dim() << ", " << out.bundle.ica.n_ics()
              << " independent components\n"
              << "fastica " << (out.ica_converged ? "converged" : "did not converge") << " after "
              << out.ica_sweeps << " sweeps";
    if (out.ica_restarts > 0) std::cout << " (" << out.ica_restarts << " restarts)";
    std::cout << "\nmetric " << to_string(out.bundle.classifier.metric) << ", accept threshold "
              << out.bundle.classifier.accept_threshold << "\n"
              << "model written to " << model_path << "\n";
    return 0;
}

int cmd_classify(const std::string& model_path, const std::string& image_path,
                 const std::string& dump_dir) {
    const ModelBundle bundle = load_model(model_path);
    const Image img = load_image(image_path);

    if (!dump_dir.empty()) {
        const GaborBank bank = make_bank(bundle.gabor);
        const ConvolutionEngine engine(bank, bundle.image_width, bundle.image_height);
        const Image sized = resize(img, bundle.image_width, bundle.image_height);
        dump_responses(engine.responses(sized), dump_dir);
    }

    const Decision d = classify_image(bundle, img);
    std::cout.precision(17);
    std::cout << "label=" << d.label << " score=" << d.score
              << " accepted=" << (d.accepted ? "true" : "false") << "\n";
    return 0;
}

int cmd_evaluate(const std::string& model_path, const std::string& config_path,
                 const std::vector<std::string>& overrides, const std::string& report_dir,
                 const std::string& split_in) {
    const ModelBundle bundle = load_model(model_path);
    const ExperimentConfig cfg = make_config(config_path, overrides);
    const auto data = load_dataset(cfg.dataset_root);
    const Split split = make_split(data, cfg, split_in);

    const EvaluationReport report =
        run_evaluation(bundle, split.positive_test, split.negative_test, cfg.threads);
    write_report(report_dir, report, cfg);
    std::cout << format_metrics(report.counts, report.metrics) << "report written to "
              << report_dir << "\n";
    return 0;
}

int cmd_bss_demo(int sources, int samples, std::uint64_t seed) {
    std::cout << format_bss_report(bss_demo(sources, samples, seed));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"IHIF face recognition: Gabor features, ICA projection, nearest-mean matching"};
    app.require_subcommand(1);

    std::string config_path, model_path, image_path, out_path, report_dir;
    std::string split_in, split_out, dump_dir;
    std::vector<std::string> overrides;
    int sources = 4, samples = 10000;
    std::uint64_t seed = 1;

    auto* extract = app.add_subcommand("extract", "Write feature vectors for every dataset image");
    extract->add_option("--config", config_path, "experiment config file")->required();
    extract->add_option("--out", out_path, "output CSV path")->required();
    extract->add_option("--set", overrides, "override a config key (key=value, repeatable)");

    auto* train = app.add_subcommand("train", "Train a model on the configured dataset split");
    train->add_option("--config", config_path, "experiment config file")->required();
    train->add_option("--model", model_path, "output model path")->required();
    train->add_option("--set", overrides, "override a config key (key=value, repeatable)");
    train->add_option("--split-in", split_in, "use a saved split manifest instead of splitting");
    train->add_option("--split-out", split_out, "write the split manifest used");

    auto* classify = app.add_subcommand("classify", "Classify a single image against a model");
    classify->add_option("--model", model_path, "trained model path")->required();
    classify->add_option("--image", image_path, "probe image (PGM or PNG)")->required();
    classify->add_option("--dump-responses", dump_dir, "also write the Gabor responses as PGMs");

    auto* evaluate = app.add_subcommand("evaluate", "Evaluate a model on the configured test split");
    evaluate->add_option("--model", model_path, "trained model path")->required();
    evaluate->add_option("--config", config_path, "experiment config file")->required();
    evaluate->add_option("--report", report_dir, "report output directory")->required();
    evaluate->add_option("--set", overrides, "override a config key (key=value, repeatable)");
    evaluate->add_option("--split-in", split_in, "use a saved split manifest instead of splitting");

    auto* bss = app.add_subcommand("bss-demo", "Blind source separation self-check");
    bss->add_option("--sources", sources, "number of sources (2-8)");
    bss->add_option("--samples", samples, "samples per source");
    bss->add_option("--seed", seed, "random seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (extract->parsed()) return cmd_extract(config_path, overrides, out_path);
        if (train->parsed())
            return cmd_train(config_path, overrides, model_path, split_in, split_out);
        if (classify->parsed()) return cmd_classify(model_path, image_path, dump_dir);
        if (evaluate->parsed())
            return cmd_evaluate(model_path, config_path, overrides, report_dir, split_in);
        if (bss->parsed()) return cmd_bss_demo(sources, samples, seed);
    } catch (const ihif::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const ihif::DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
