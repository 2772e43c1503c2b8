#include "facial/pipeline/config.hpp"

#include "facial/common/error.hpp"

#include <fstream>

namespace facial::pipeline {

std::uint64_t module_seed(std::uint64_t seed, int module)
{
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(module + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

gan::FacialGanConfig PipelineConfig::facial_gan_config() const
{
    auto c = facial_gan;
    c.seed = module_seed(seed, 0);
    return c;
}

render::RenderNetConfig PipelineConfig::render_config() const
{
    auto c = render;
    c.seed = module_seed(seed, 1);
    return c;
}

namespace {

nlohmann::json without_seed(nlohmann::json j)
{
    j.erase("seed");
    return j;
}

template <class T>
void read_section(const nlohmann::json& doc, const char* name, const nlohmann::json& defaults, T&& assign)
{
    if (!doc.contains(name))
        return;
    const auto& section = doc.at(name);
    if (!section.is_object())
        throw Error(ErrorKind::config, std::string("config section '") + name + "' must be an object");
    for (const auto& [key, value] : section.items())
        if (!defaults.contains(key))
            throw Error(ErrorKind::config, std::string("unknown config key '") + name + "." + key + "'");
    try {
        assign(section);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::config, std::string("bad value in '") + name + "': " + e.what());
    }
}

template <class F>
void get(const nlohmann::json& j, const char* key, F& field)
{
    if (j.contains(key))
        field = j.at(key).get<F>();
}

} // namespace

nlohmann::json to_json(const PipelineConfig& c)
{
    return {
        {"seed", c.seed},
        {"audio", {{"target_fps", c.audio.target_fps}}},
        {"facial_gan", without_seed(gan::to_json(c.facial_gan))},
        {"render", without_seed(render::to_json(c.render))},
        {"eye", {{"threshold", c.eye.threshold}, {"au_max", c.eye.au_max}}},
        {"metrics",
         {{"blink_hi", c.metrics.blink_hi},
          {"blink_lo", c.metrics.blink_lo},
          {"bin_width_s", c.metrics.bin_width_s},
          {"k_fold", c.metrics.k_fold},
          {"window", c.metrics.window}}},
        {"paths",
         {{"manifest", c.paths.manifest},
          {"basis", c.paths.basis},
          {"general", c.paths.general},
          {"finetuned", c.paths.finetuned},
          {"render", c.paths.render}}},
    };
}

PipelineConfig pipeline_config_from_json(const nlohmann::json& doc)
{
    if (!doc.is_object())
        throw Error(ErrorKind::config, "config must be a JSON object");
    PipelineConfig c;
    const auto defaults = to_json(c);
    for (const auto& [key, value] : doc.items())
        if (!defaults.contains(key))
            throw Error(ErrorKind::config, "unknown config key '" + key + "'");
    try {
        get(doc, "seed", c.seed);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::config, std::string("bad seed: ") + e.what());
    }
    read_section(doc, "audio", defaults.at("audio"), [&](const auto& s) { get(s, "target_fps", c.audio.target_fps); });
    read_section(doc, "facial_gan", defaults.at("facial_gan"),
                 [&](const auto& s) { c.facial_gan = gan::facial_gan_config_from_json(s); });
    read_section(doc, "render", defaults.at("render"),
                 [&](const auto& s) { c.render = render::render_config_from_json(s); });
    read_section(doc, "eye", defaults.at("eye"), [&](const auto& s) {
        get(s, "threshold", c.eye.threshold);
        get(s, "au_max", c.eye.au_max);
    });
    read_section(doc, "metrics", defaults.at("metrics"), [&](const auto& s) {
        get(s, "blink_hi", c.metrics.blink_hi);
        get(s, "blink_lo", c.metrics.blink_lo);
        get(s, "bin_width_s", c.metrics.bin_width_s);
        get(s, "k_fold", c.metrics.k_fold);
        get(s, "window", c.metrics.window);
    });
    read_section(doc, "paths", defaults.at("paths"), [&](const auto& s) {
        get(s, "manifest", c.paths.manifest);
        get(s, "basis", c.paths.basis);
        get(s, "general", c.paths.general);
        get(s, "finetuned", c.paths.finetuned);
        get(s, "render", c.paths.render);
    });
    if (c.audio.target_fps <= 0.0)
        throw Error(ErrorKind::config, "audio.target_fps must be positive");
    if (c.eye.threshold <= 0.0 || c.eye.au_max <= 0.0)
        throw Error(ErrorKind::config, "eye settings must be positive");
    if (!(0.0 <= c.metrics.blink_lo && c.metrics.blink_lo < c.metrics.blink_hi && c.metrics.blink_hi <= 1.0))
        throw Error(ErrorKind::config, "blink thresholds need 0 <= lo < hi <= 1");
    if (c.metrics.bin_width_s <= 0.0 || c.metrics.k_fold < 2 || c.metrics.window < 1)
        throw Error(ErrorKind::config, "metrics settings out of range");
    return c;
}

nlohmann::json apply_overrides(nlohmann::json doc, const std::vector<std::string>& overrides)
{
    for (const auto& item : overrides) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0)
            throw Error(ErrorKind::config, "override '" + item + "' is not of the form key=value");
        const std::string key = item.substr(0, eq);
        const std::string text = item.substr(eq + 1);
        nlohmann::json value = nlohmann::json::parse(text, nullptr, /*allow_exceptions=*/false);
        if (value.is_discarded())
            value = text;
        nlohmann::json::json_pointer ptr;
        std::size_t start = 0;
        while (true) {
            const auto dot = key.find('.', start);
            ptr /= key.substr(start, dot - start);
            if (dot == std::string::npos)
                break;
            start = dot + 1;
        }
        doc[ptr] = value;
    }
    return doc;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path, const std::vector<std::string>& overrides)
{
    nlohmann::json doc = nlohmann::json::object();
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in)
            throw Error(ErrorKind::io, "cannot open config " + path.string());
        try {
            doc = nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::config, path.string() + ": " + e.what());
        }
    }
    return pipeline_config_from_json(apply_overrides(std::move(doc), overrides));
}

} // namespace facial::pipeline
