#include "ihif/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "ihif/errors.hpp"
#include "ihif/rng.hpp"

namespace ihif {

void SplitSpec::validate() const {
    if (train_per_subject < 1) throw DataError("train_per_subject must be >= 1");
}

std::vector<LabeledImage> load_dataset(const std::filesystem::path& root) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(root)) throw DataError("dataset root is not a directory: " + root.string());

    std::vector<std::string> subjects;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (entry.is_directory()) subjects.push_back(entry.path().filename().string());
    }
    std::sort(subjects.begin(), subjects.end());

    std::vector<LabeledImage> out;
    for (const auto& subject : subjects) {
        std::vector<std::string> files;
        for (const auto& entry : fs::directory_iterator(root / subject)) {
            if (!entry.is_regular_file()) continue;
            std::string ext = entry.path().extension().string();
            std::transform(ext.begin(), ext.end(), ext.begin(),
                           [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
            if (ext == ".pgm" || ext == ".png") files.push_back(entry.path().filename().string());
        }
        std::sort(files.begin(), files.end());
        for (const auto& file : files)
            out.push_back({load_image(root / subject / file), subject, file});
    }
    if (out.empty()) throw DataError("no images found under " + root.string());
    return out;
}

Split split_dataset(const std::vector<LabeledImage>& data, const SplitSpec& spec) {
    spec.validate();
    if (data.empty()) throw DataError("empty dataset");

    const std::set<std::string> impostors(spec.impostor_subjects.begin(),
                                          spec.impostor_subjects.end());

    // Group indices per subject in first-encounter order.
    std::vector<std::string> order;
    std::map<std::string, std::vector<std::size_t>> by_subject;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto& sid = data[i].subject_id;
        if (sid.empty()) throw DataError("image with empty subject id");
        if (!by_subject.count(sid)) order.push_back(sid);
        by_subject[sid].push_back(i);
    }

    Split split;
    Rng rng(spec.seed);
    for (const auto& sid : order) {
        auto& idx = by_subject[sid];
        if (impostors.count(sid)) {
            for (auto i : idx) split.negative_test.push_back(data[i]);
            continue;
        }
        const int n = static_cast<int>(idx.size());
        if (n < spec.train_per_subject + 1)
            throw DataError("subject '" + sid + "' has " + std::to_string(n) +
                            " images, need at least " + std::to_string(spec.train_per_subject + 1));
        // Partial Fisher-Yates: the first train_per_subject slots become the
        // training draw, the remainder keeps its relative order.
        for (int k = 0; k < spec.train_per_subject; ++k) {
            const auto j = k + static_cast<std::size_t>(rng.below(n - k));
            std::swap(idx[k], idx[j]);
        }
        std::sort(idx.begin(), idx.begin() + spec.train_per_subject);
        std::sort(idx.begin() + spec.train_per_subject, idx.end());
        for (int k = 0; k < n; ++k) {
            (k < spec.train_per_subject ? split.train : split.positive_test)
                .push_back(data[idx[k]]);
        }
    }
    if (split.train.empty()) throw DataError("no enrolled subjects in dataset");
    return split;
}

namespace {

void write_rows(std::ostream& out, const std::vector<LabeledImage>& images, const char* tag) {
    for (const auto& li : images)
        out << li.subject_id << '\t' << li.filename << '\t' << tag << '\n';
}

} // namespace

void save_split_manifest(const Split& split, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    write_rows(out, split.train, "train");
    write_rows(out, split.positive_test, "pos");
    write_rows(out, split.negative_test, "neg");
}

Split apply_split_manifest(const std::vector<LabeledImage>& data,
                           const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read split manifest " + path.string());

    std::map<std::pair<std::string, std::string>, std::string> roles;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string sid, file, role;
        if (!std::getline(ss, sid, '\t') || !std::getline(ss, file, '\t') ||
            !std::getline(ss, role))
            throw DataError(path.string() + ":" + std::to_string(lineno) + ": malformed line");
        if (role != "train" && role != "pos" && role != "neg")
            throw DataError(path.string() + ":" + std::to_string(lineno) + ": unknown role '" + role + "'");
        roles[{sid, file}] = role;
    }

    Split split;
    for (const auto& li : data) {
        const auto it = roles.find({li.subject_id, li.filename});
        if (it == roles.end())
            throw DataError("image " + li.subject_id + "/" + li.filename + " missing from manifest");
        if (it->second == "train") split.train.push_back(li);
        else if (it->second == "pos") split.positive_test.push_back(li);
        else split.negative_test.push_back(li);
    }
    return split;
}

} // namespace ihif
