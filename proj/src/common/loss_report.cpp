#include "facial/common/loss_report.hpp"

#include <iomanip>
#include <sstream>

namespace facial {

nlohmann::json history_to_json(const std::vector<LossReport>& history)
{
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : history)
        out.push_back({{"components", r.components}, {"total", r.total}});
    return out;
}

std::vector<LossReport> history_from_json(const nlohmann::json& doc)
{
    std::vector<LossReport> history;
    for (const auto& r : doc) {
        LossReport report;
        report.components = r.at("components").get<std::vector<std::pair<std::string, double>>>();
        report.total = r.at("total").get<double>();
        history.push_back(std::move(report));
    }
    return history;
}

LossReport average(const std::vector<LossReport>& reports)
{
    LossReport out;
    if (reports.empty())
        return out;
    out.components = reports.front().components;
    for (auto& [name, value] : out.components)
        value = 0.0;
    for (const auto& r : reports) {
        for (std::size_t i = 0; i < out.components.size() && i < r.components.size(); ++i)
            out.components[i].second += r.components[i].second;
        out.total += r.total;
    }
    const auto n = static_cast<double>(reports.size());
    for (auto& [name, value] : out.components)
        value /= n;
    out.total /= n;
    return out;
}

std::string history_csv(const std::vector<LossReport>& history, const std::string& index_name)
{
    std::ostringstream out;
    out << index_name;
    if (!history.empty())
        for (const auto& [name, value] : history.front().components)
            out << ',' << name;
    out << ",total\n";
    out << std::setprecision(9);
    for (std::size_t i = 0; i < history.size(); ++i) {
        out << i;
        for (const auto& [name, value] : history[i].components)
            out << ',' << value;
        out << ',' << history[i].total << '\n';
    }
    return out.str();
}

} // namespace facial
