#include "atomic_file.hpp"

#include <fstream>
#include <sstream>

#include "hom/error.hpp"

namespace hom::cli {

std::function<void()> write_interrupt_hook;

void write_atomic(const std::filesystem::path& target,
                  const std::function<void(std::ostream&)>& body) {
  std::ostringstream buf(std::ios::out | std::ios::binary);
  body(buf);
  const std::string bytes = std::move(buf).str();

  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  auto tmp = target;
  tmp += ".partial";
  try {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write '" + target.string() + "'");
    const auto half = static_cast<std::streamsize>(bytes.size() / 2);
    out.write(bytes.data(), half);
    out.flush();
    if (write_interrupt_hook) write_interrupt_hook();
    out.write(bytes.data() + half, static_cast<std::streamsize>(bytes.size()) - half);
    out.close();
    if (!out) throw ValidationError("failed writing '" + target.string() + "'");
    std::filesystem::rename(tmp, target);
  } catch (...) {
    std::error_code ec;
    std::filesystem::remove(tmp, ec);
    throw;
  }
}

}  // namespace hom::cli
