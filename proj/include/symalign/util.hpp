#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>

namespace symalign {

std::string read_file(const std::filesystem::path& path);

/// Writes through a sibling temp file and renames it into place, so readers
/// never observe a half-written output.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// Worker count from SYMALIGN_THREADS (default 1, never below 1).
std::size_t thread_budget();

/// Runs body(i) for i in [0, count) on up to `threads` workers. Each index is
/// visited exactly once; callers write results into per-index slots.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& body);

} // namespace symalign
