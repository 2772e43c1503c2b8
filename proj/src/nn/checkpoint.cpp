#include "facial/nn/checkpoint.hpp"

#include "facial/common/error.hpp"
#include "facial/io/container.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <vector>

namespace facial::nn {

namespace fs = std::filesystem;

namespace {

std::string file_name_for(const std::string& name)
{
    std::string file = name;
    std::replace(file.begin(), file.end(), '.', '_');
    return file + ".facl";
}

} // namespace

nlohmann::json save_parameters(const torch::nn::Module& module, const fs::path& dir, const std::string& prefix)
{
    fs::create_directories(dir / "params");
    nlohmann::json table = nlohmann::json::array();
    for (const auto& item : module.named_parameters(/*recurse=*/true)) {
        const std::string name = prefix + "." + item.key();
        const torch::Tensor value = item.value().detach().to(torch::kFloat32).contiguous().cpu();
        io::RawArray array;
        array.header.kind = "parameter";
        array.header.shape.assign(value.sizes().begin(), value.sizes().end());
        array.data.assign(value.data_ptr<float>(), value.data_ptr<float>() + value.numel());
        const std::string file = file_name_for(name);
        io::write_array(dir / "params" / file, array);
        table.push_back({{"name", name}, {"shape", array.header.shape}, {"file", "params/" + file}});
    }
    return table;
}

void load_parameters(torch::nn::Module& module, const fs::path& dir, const nlohmann::json& table,
                     const std::string& prefix)
{
    torch::NoGradGuard no_grad;
    auto params = module.named_parameters(/*recurse=*/true);
    std::size_t matched = 0;
    for (const auto& entry : table) {
        const auto name = entry.at("name").get<std::string>();
        if (name.rfind(prefix + ".", 0) != 0)
            continue;
        const std::string key = name.substr(prefix.size() + 1);
        torch::Tensor* target = params.find(key);
        if (target == nullptr)
            throw Error(ErrorKind::bad_header, "checkpoint parameter " + name + " has no counterpart in the model");
        const io::RawArray array = io::read_array(dir / entry.at("file").get<std::string>());
        std::vector<std::int64_t> shape(target->sizes().begin(), target->sizes().end());
        if (array.header.shape != shape)
            throw Error(ErrorKind::shape_mismatch, "checkpoint parameter " + name + " has the wrong shape");
        auto loaded = torch::from_blob(const_cast<float*>(array.data.data()), shape, torch::kFloat32).clone();
        target->copy_(loaded.to(target->dtype()));
        ++matched;
    }
    if (matched != params.size())
        throw Error(ErrorKind::bad_header, "checkpoint is missing parameters for '" + prefix + "'");
}

void write_json(const nlohmann::json& doc, const fs::path& path)
{
    std::ofstream out(path);
    if (!out)
        throw Error(ErrorKind::io, "cannot open for writing: " + path.string());
    out << doc.dump(2) << '\n';
}

nlohmann::json read_json(const fs::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorKind::io, "cannot open for reading: " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::bad_header, path.string() + ": " + e.what());
    }
}

std::string content_digest(const fs::path& path)
{
    std::vector<fs::path> files;
    const bool is_dir = fs::is_directory(path);
    if (is_dir) {
        for (const auto& entry : fs::recursive_directory_iterator(path))
            if (entry.is_regular_file())
                files.push_back(entry.path());
        std::sort(files.begin(), files.end());
    } else {
        files.push_back(path);
    }

    std::uint64_t hash = 1469598103934665603ull;
    auto mix = [&hash](unsigned char byte) {
        hash ^= byte;
        hash *= 1099511628211ull;
    };
    for (const auto& file : files) {
        const fs::path rel = is_dir ? fs::relative(file, path) : file.filename();
        for (unsigned char c : rel.generic_string())
            mix(c);
        std::ifstream in(file, std::ios::binary);
        if (!in)
            throw Error(ErrorKind::io, "cannot open for reading: " + file.string());
        char buffer[1 << 14];
        while (in.read(buffer, sizeof buffer) || in.gcount() > 0)
            for (std::streamsize i = 0; i < in.gcount(); ++i)
                mix(static_cast<unsigned char>(buffer[i]));
    }
    std::ostringstream out;
    out << std::hex;
    out.width(16);
    out.fill('0');
    out << hash;
    return out.str();
}

void copy_parameters(const torch::nn::Module& src, torch::nn::Module& dst)
{
    torch::NoGradGuard no_grad;
    auto from = src.named_parameters(true);
    auto to = dst.named_parameters(true);
    for (const auto& item : from) {
        torch::Tensor* target = to.find(item.key());
        if (target == nullptr)
            throw Error(ErrorKind::shape_mismatch, "parameter " + item.key() + " missing in destination");
        target->copy_(item.value());
    }
}

} // namespace facial::nn
