#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>

namespace hom::cli {

// Test seam: runs after the first half of an atomic write has reached the
// temporary file. A throwing hook simulates a crash mid-write.
extern std::function<void()> write_interrupt_hook;

// Renders `body` and publishes it at `target` via temp file + rename, so readers
// see either the old file or the complete new one.
void write_atomic(const std::filesystem::path& target,
                  const std::function<void(std::ostream&)>& body);

}  // namespace hom::cli
