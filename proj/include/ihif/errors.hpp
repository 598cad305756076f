#pragma once

#include <stdexcept>
#include <string>

namespace ihif {

/// Bad or unreadable input data (files, datasets, dimension mismatches).
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical breakdown: rank deficiency, non-convergence in strict mode, etc.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Wraps an error from a pipeline stage with the stage name and the
/// offending item (file path, subject id, ...) so harness failures are
/// attributable. Counts as a data error for exit-code purposes; numerical
/// failures keep their own type (the harness re-throws them with a stage
/// prefix instead of wrapping).
class StageError : public DataError {
public:
    StageError(std::string stage, std::string item, const std::string& what)
        : DataError("[" + stage + (item.empty() ? "" : ": " + item) + "] " + what),
          stage_(std::move(stage)),
          item_(std::move(item)) {}

    const std::string& stage() const noexcept { return stage_; }
    const std::string& item() const noexcept { return item_; }

private:
    std::string stage_;
    std::string item_;
};

} // namespace ihif
