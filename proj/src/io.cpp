#include "irk/io.hpp"

#include <fstream>
#include <sstream>

#include "irk/error.hpp"

namespace irk {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot read " + p.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& p, const std::string& content) {
  std::error_code ec;
  std::filesystem::create_directories(p.parent_path(), ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + p.parent_path().string() + ": " + ec.message());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + p.string());
  out << content;
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + p.string());
}

}  // namespace irk
