#pragma once

#include <filesystem>
#include <string>

namespace irk {

// Throws IO_FAILURE.
std::string read_file(const std::filesystem::path& p);
// Creates parent directories. Throws IO_FAILURE.
void write_file(const std::filesystem::path& p, const std::string& content);

}  // namespace irk
