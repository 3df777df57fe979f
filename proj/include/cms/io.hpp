#ifndef CMS_IO_HPP
#define CMS_IO_HPP

#include <functional>
#include <ostream>
#include <string>

namespace cms {

// Writes through a temp file in the target directory and renames into
// place, so readers never observe a partial file. The writer callback may
// throw; the temp file is removed and the target left untouched.
void atomic_write(const std::string& path, const std::function<void(std::ostream&)>& writer);

void atomic_write_file(const std::string& path, const std::string& content);

// Locale-independent float with 6 significant digits, the CSV format.
std::string format_sig6(double v);

} // namespace cms

#endif
