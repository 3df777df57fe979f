#include "cms/io.hpp"

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "cms/errors.hpp"

namespace cms {

namespace {
std::atomic<unsigned> temp_counter{0};
}

void atomic_write(const std::string& path, const std::function<void(std::ostream&)>& writer) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(target.parent_path(), ec);
    }
    const unsigned tag = temp_counter.fetch_add(1);
    fs::path temp = target;
    temp += ".tmp-" + std::to_string(static_cast<unsigned long>(::getpid())) + "-" +
            std::to_string(tag);
    try {
        {
            std::ofstream out(temp, std::ios::binary | std::ios::trunc);
            if (!out) throw SimError("cannot open \"" + temp.string() + "\" for writing");
            writer(out);
            out.flush();
            if (!out) throw SimError("write to \"" + temp.string() + "\" failed");
        }
        fs::rename(temp, target);
    } catch (...) {
        std::error_code ec;
        fs::remove(temp, ec);
        throw;
    }
}

void atomic_write_file(const std::string& path, const std::string& content) {
    atomic_write(path, [&](std::ostream& out) { out << content; });
}

std::string format_sig6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

} // namespace cms
