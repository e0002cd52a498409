#pragma once

#include <filesystem>
#include <string>

#include "greenshield/models.hpp"

namespace greenshield {

inline constexpr int kModelFormatVersion = 1;

// Model documents have the shape
//   {"format_version": 1, "kind": ..., "scaler": {...}, "parameters": {...}}
// with sorted keys and reals printed to 17 significant digits, so a loaded
// model reproduces the saved one's predictions bit for bit.
std::string model_to_json(const FireModel& model);
/// Throws UnsupportedVersion or MalformedDocument.
FireModel model_from_json(const std::string& text);

void save_model(const FireModel& model, const std::filesystem::path& path);
FireModel load_model(const std::filesystem::path& path);

/// Short content hash of a document, used as a model version string.
std::string content_version(const std::string& text);

}  // namespace greenshield
