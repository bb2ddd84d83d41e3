#pragma once

#include <stdexcept>
#include <string>

namespace bms {

// Invalid user input. `field()` names the offending configuration key.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(std::string field, const std::string& message)
        : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

// Failure of a numerical procedure on otherwise valid input.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A BM level carries zero stationary mass, so a relativity cannot be defined
// there. Class index is 1-based, or 0 when the level is dead for the whole
// portfolio.
class UnreachableLevelError : public NumericError {
public:
    UnreachableLevelError(int risk_class, int level)
        : NumericError(describe(risk_class, level)), risk_class_(risk_class), level_(level) {}

    int risk_class() const noexcept { return risk_class_; }
    int level() const noexcept { return level_; }

private:
    static std::string describe(int risk_class, int level) {
        std::string s = "level " + std::to_string(level) + " has zero stationary mass";
        if (risk_class > 0) s += " for class " + std::to_string(risk_class);
        return s + " (check the transition rule)";
    }

    int risk_class_;
    int level_;
};

} // namespace bms
