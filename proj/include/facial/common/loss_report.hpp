#pragma once

#include <nlohmann/json.hpp>

#include <string>
#include <utility>
#include <vector>

namespace facial {

/// Named scalar losses of one step (or one epoch average) and their weighted
/// total. Components keep insertion order so CSV columns are stable.
struct LossReport {
    std::vector<std::pair<std::string, double>> components;
    double total = 0.0;

    void add(std::string name, double value) { components.emplace_back(std::move(name), value); }

    double get(const std::string& name) const
    {
        for (const auto& [n, v] : components)
            if (n == name)
                return v;
        return 0.0;
    }

    bool has(const std::string& name) const
    {
        for (const auto& [n, v] : components)
            if (n == name)
                return true;
        return false;
    }
};

inline nlohmann::json to_json(const LossReport& report)
{
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [n, v] : report.components)
        j[n] = v;
    j["total"] = report.total;
    return j;
}

/// Order-preserving form used in checkpoints:
/// [{"components": [[name, value], ...], "total": t}, ...].
nlohmann::json history_to_json(const std::vector<LossReport>& history);
std::vector<LossReport> history_from_json(const nlohmann::json& doc);

/// Averages reports component-wise. All reports must share the same names.
LossReport average(const std::vector<LossReport>& reports);

/// One row per report, columns "index,<components...>,total".
std::string history_csv(const std::vector<LossReport>& history, const std::string& index_name = "epoch");

} // namespace facial
