#pragma once

#include <cstdint>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace cosym {

/// One checked quantity: a measured value against an optional threshold.
/// Items without a threshold are informational and never fail.
struct CheckItem {
    std::string label;
    double value = 0.0;
    std::optional<double> threshold;
    bool pass = true;
    bool has_value = true;
};

/// A named bundle of checks with free-form notes. Rendering is deterministic
/// (fixed formatting, no timestamps) so identical runs produce identical
/// bytes.
class Report {
public:
    explicit Report(std::string title) : title_(std::move(title)) {}

    /// value must stay strictly below threshold to pass.
    void check_below(const std::string& label, double value, double threshold) {
        items_.push_back({label, value, threshold, value < threshold});
    }

    void check(const std::string& label, bool ok) {
        items_.push_back({label, 0.0, std::nullopt, ok, false});
    }

    void check(const std::string& label, bool ok, double value) {
        items_.push_back({label, value, std::nullopt, ok, true});
    }

    void info(const std::string& label, double value) {
        items_.push_back({label, value, std::nullopt, true});
    }

    void note(std::string text) { notes_.push_back(std::move(text)); }
    void set_seed(std::uint64_t seed) { seed_ = seed; }

    const std::string& title() const { return title_; }
    const std::vector<CheckItem>& items() const { return items_; }
    const std::vector<std::string>& notes() const { return notes_; }

    bool pass() const {
        for (const auto& it : items_)
            if (!it.pass) return false;
        return true;
    }

    void print(std::ostream& os) const {
        os << (pass() ? "[PASS] " : "[FAIL] ") << title_ << "\n";
        for (const auto& it : items_) {
            os << "  " << (it.pass ? "ok  " : "FAIL") << "  " << it.label;
            if (it.has_value) os << " = " << format(it.value);
            if (it.threshold) os << "  (< " << format(*it.threshold) << ")";
            os << "\n";
        }
        for (const auto& n : notes_) os << "  note: " << n << "\n";
        if (seed_) os << "  seed: " << *seed_ << "\n";
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["title"] = title_;
        j["pass"] = pass();
        j["items"] = nlohmann::json::array();
        for (const auto& it : items_) {
            nlohmann::json ji;
            ji["label"] = it.label;
            if (it.has_value) ji["value"] = it.value;
            if (it.threshold) ji["threshold"] = *it.threshold;
            ji["pass"] = it.pass;
            j["items"].push_back(ji);
        }
        j["notes"] = notes_;
        if (seed_) j["seed"] = *seed_;
        return j;
    }

    static std::string format(double v) {
        std::ostringstream os;
        os << std::setprecision(17) << v;
        return os.str();
    }

private:
    std::string title_;
    std::vector<CheckItem> items_;
    std::vector<std::string> notes_;
    std::optional<std::uint64_t> seed_;
};

} // namespace cosym
