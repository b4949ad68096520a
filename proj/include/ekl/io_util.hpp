#pragma once

#include <string>

namespace ekl {

/// Write bytes to path via a temporary file plus rename, so a failed or
/// interrupted write never leaves a partial file behind.
void atomic_write_file(const std::string& path, const std::string& bytes);

/// Read a whole file; throws std::runtime_error when it cannot be opened.
std::string read_file(const std::string& path);

}  // namespace ekl
