#ifndef TAGSEM_IO_HPP
#define TAGSEM_IO_HPP

#include <filesystem>
#include <string>

namespace tagsem {

// Writes `content` to `path` via a temporary file in the same directory
// followed by a rename, so a failed run never leaves a partial output.
void atomic_write_text(const std::filesystem::path& path, const std::string& content);

// Reads a whole file; throws ParseError if the file cannot be opened.
std::string read_text(const std::filesystem::path& path);

}  // namespace tagsem

#endif  // TAGSEM_IO_HPP
