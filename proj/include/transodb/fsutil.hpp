#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>

namespace transodb {

/// Whole-file read. Throws Error(Io).
std::string read_file(const std::filesystem::path& path);

/// Writes through a sibling temporary file and renames it into place, so
/// `path` either keeps its old content or receives the complete new content.
/// If `produce` throws, the temporary is removed and the error propagates.
void write_file_atomic(const std::filesystem::path& path, const std::function<void(std::ostream&)>& produce);
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace transodb
