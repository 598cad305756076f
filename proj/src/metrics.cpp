#include "ihif/metrics.hpp"

#include <sstream>

#include "ihif/errors.hpp"

namespace ihif {

namespace {

std::optional<double> ratio(std::int64_t num, std::int64_t den) {
    if (den <= 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
}

} // namespace

Metrics compute_metrics(const ConfusionCounts& c) {
    if (c.true_positive < 0 || c.false_positive < 0 || c.true_negative < 0 ||
        c.false_negative < 0)
        throw DataError("metrics: negative count");
    Metrics m;
    m.sensitivity = ratio(c.true_positive, c.true_positive + c.false_negative);
    m.specificity = ratio(c.true_negative, c.false_positive + c.true_negative);
    m.false_positive_rate = ratio(c.false_positive, c.false_positive + c.true_negative);
    m.false_negative_rate = ratio(c.false_negative, c.true_positive + c.false_negative);
    m.accuracy = ratio(c.true_positive + c.true_negative, c.total());
    return m;
}

std::string format_metrics(const ConfusionCounts& c, const Metrics& m) {
    std::ostringstream out;
    out.precision(6);
    out << "TP=" << c.true_positive << " FP=" << c.false_positive
        << " TN=" << c.true_negative << " FN=" << c.false_negative << '\n';
    const auto line = [&out](const char* name, const std::optional<double>& v) {
        out << name << " = ";
        if (v) out << *v;
        else out << "n/a";
        out << '\n';
    };
    line("sensitivity", m.sensitivity);
    line("specificity", m.specificity);
    line("false_positive_rate", m.false_positive_rate);
    line("false_negative_rate", m.false_negative_rate);
    line("accuracy", m.accuracy);
    return out.str();
}

} // namespace ihif
