#pragma once

#include <torch/torch.h>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>

namespace facial::nn {

/// Writes every named parameter of `module` as a float32 FACL1 array under
/// dir/params/ and returns the parameter table for the checkpoint manifest.
nlohmann::json save_parameters(const torch::nn::Module& module, const std::filesystem::path& dir,
                               const std::string& prefix);

/// Loads the arrays listed in `table` back into `module`. Names and shapes
/// must match exactly.
void load_parameters(torch::nn::Module& module, const std::filesystem::path& dir, const nlohmann::json& table,
                     const std::string& prefix);

void write_json(const nlohmann::json& doc, const std::filesystem::path& path);
nlohmann::json read_json(const std::filesystem::path& path);

/// FNV-1a 64-bit digest of a file or of every regular file under a directory
/// (visited in sorted path order), as 16 hex digits.
std::string content_digest(const std::filesystem::path& path);

/// Copies parameter values from `src` into `dst` (same architecture).
void copy_parameters(const torch::nn::Module& src, torch::nn::Module& dst);

} // namespace facial::nn
