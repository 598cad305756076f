#include "ihif/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "ihif/errors.hpp"

namespace ihif {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw DataError("config: bad numeric value for " + key + ": '" + value + "'");
    }
}

long long parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw DataError("config: bad integer value for " + key + ": '" + value + "'");
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw DataError("config: bad seed value for " + key + ": '" + value + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "on") return true;
    if (value == "false" || value == "0" || value == "off") return false;
    throw DataError("config: bad boolean value for " + key + ": '" + value + "'");
}

std::vector<std::string> parse_list(const std::string& value) {
    std::vector<std::string> out;
    std::istringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

void assign(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "dataset.root") cfg.dataset_root = value;
    else if (key == "dataset.width") cfg.image_width = static_cast<int>(parse_int(key, value));
    else if (key == "dataset.height") cfg.image_height = static_cast<int>(parse_int(key, value));
    else if (key == "split.seed") cfg.split.seed = parse_u64(key, value);
    else if (key == "split.train_per_subject")
        cfg.split.train_per_subject = static_cast<int>(parse_int(key, value));
    else if (key == "split.impostors") cfg.split.impostor_subjects = parse_list(value);
    else if (key == "gabor.sigma") cfg.gabor.sigma = parse_double(key, value);
    else if (key == "gabor.k_max") cfg.gabor.k_max = parse_double(key, value);
    else if (key == "gabor.f") cfg.gabor.f = parse_double(key, value);
    else if (key == "gabor.scales") cfg.gabor.n_scales = static_cast<int>(parse_int(key, value));
    else if (key == "gabor.orientations")
        cfg.gabor.n_orientations = static_cast<int>(parse_int(key, value));
    else if (key == "gabor.kernel_size")
        cfg.gabor.kernel_size = static_cast<int>(parse_int(key, value));
    else if (key == "features.block_size")
        cfg.extraction.block_size = static_cast<int>(parse_int(key, value));
    else if (key == "features.threshold") cfg.extraction.threshold = parse_double(key, value);
    else if (key == "ica.n_ics") cfg.ica.n_ics = static_cast<int>(parse_int(key, value));
    else if (key == "ica.max_dim") cfg.ica.max_dim = static_cast<int>(parse_int(key, value));
    else if (key == "ica.tol") cfg.ica.tol = parse_double(key, value);
    else if (key == "ica.max_iter") cfg.ica.max_iter = static_cast<int>(parse_int(key, value));
    else if (key == "ica.eigen_floor") cfg.ica.eigen_floor = parse_double(key, value);
    else if (key == "ica.seed") cfg.ica.seed = parse_u64(key, value);
    else if (key == "classifier.metric") cfg.metric = metric_from_string(value);
    else if (key == "run.threads") cfg.threads = static_cast<int>(parse_int(key, value));
    else if (key == "run.strict") cfg.strict = parse_bool(key, value);
    else throw DataError("config: unknown key '" + key + "'");
}

} // namespace

void ExperimentConfig::validate() const {
    if (image_width < 1 || image_height < 1) throw DataError("config: image geometry must be positive");
    gabor.validate();
    extraction.validate();
    split.validate();
    if (ica.n_ics < 0 || ica.max_dim < 0) throw DataError("config: ica dimensions must be >= 0");
    if (!(ica.tol > 0.0)) throw DataError("config: ica.tol must be > 0");
    if (ica.max_iter < 1) throw DataError("config: ica.max_iter must be >= 1");
    if (ica.eigen_floor < 0.0) throw DataError("config: ica.eigen_floor must be >= 0");
    if (threads < 0) throw DataError("config: run.threads must be >= 0");
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read config " + path.string());

    ExperimentConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw DataError(path.string() + ":" + std::to_string(lineno) +
                            ": expected 'key = value'");
        assign(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

void apply_override(ExperimentConfig& cfg, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw DataError("override must look like key=value: '" + assignment + "'");
    assign(cfg, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

std::map<std::string, std::string> config_to_keys(const ExperimentConfig& cfg) {
    const auto fmt = [](double v) {
        std::ostringstream ss;
        ss.precision(17);
        ss << v;
        return ss.str();
    };
    std::map<std::string, std::string> keys;
    keys["dataset.root"] = cfg.dataset_root.string();
    keys["dataset.width"] = std::to_string(cfg.image_width);
    keys["dataset.height"] = std::to_string(cfg.image_height);
    keys["split.seed"] = std::to_string(cfg.split.seed);
    keys["split.train_per_subject"] = std::to_string(cfg.split.train_per_subject);
    std::string impostors;
    for (const auto& s : cfg.split.impostor_subjects) {
        if (!impostors.empty()) impostors += ',';
        impostors += s;
    }
    keys["split.impostors"] = impostors;
    keys["gabor.sigma"] = fmt(cfg.gabor.sigma);
    keys["gabor.k_max"] = fmt(cfg.gabor.k_max);
    keys["gabor.f"] = fmt(cfg.gabor.f);
    keys["gabor.scales"] = std::to_string(cfg.gabor.n_scales);
    keys["gabor.orientations"] = std::to_string(cfg.gabor.n_orientations);
    keys["gabor.kernel_size"] = std::to_string(cfg.gabor.kernel_size);
    keys["features.block_size"] = std::to_string(cfg.extraction.block_size);
    keys["features.threshold"] = fmt(cfg.extraction.threshold);
    keys["ica.n_ics"] = std::to_string(cfg.ica.n_ics);
    keys["ica.max_dim"] = std::to_string(cfg.ica.max_dim);
    keys["ica.tol"] = fmt(cfg.ica.tol);
    keys["ica.max_iter"] = std::to_string(cfg.ica.max_iter);
    keys["ica.eigen_floor"] = fmt(cfg.ica.eigen_floor);
    keys["ica.seed"] = std::to_string(cfg.ica.seed);
    keys["classifier.metric"] = to_string(cfg.metric);
    keys["run.threads"] = std::to_string(cfg.threads);
    keys["run.strict"] = cfg.strict ? "true" : "false";
    return keys;
}

} // namespace ihif
