#include "retk/common.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <stdio.h>
#include <unistd.h>

namespace retk {

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  for (auto& c : out)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string upper_ascii(std::string_view s) {
  std::string out(s);
  for (auto& c : out)
    c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

bool iequals_ascii(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); i++) {
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i])))
      return false;
  }
  return true;
}

bool contains_whitespace(std::string_view s) {
  for (char c : s)
    if (std::isspace(static_cast<unsigned char>(c))) return true;
  return false;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw DataError("error reading file: " + path);
  return buf.str();
}

void write_file_atomic(const std::string& path, std::string_view content) {
  std::string tmp = path + ".tmpXXXXXX";
  int fd = mkstemp(tmp.data());
  if (fd < 0) throw DataError("cannot create temp file for: " + path);
  FILE* f = fdopen(fd, "wb");
  if (!f) {
    close(fd);
    remove(tmp.c_str());
    throw DataError("cannot open temp file for: " + path);
  }
  size_t written = fwrite(content.data(), 1, content.size(), f);
  if (fclose(f) != 0 || written != content.size()) {
    remove(tmp.c_str());
    throw DataError("error writing file: " + path);
  }
  if (rename(tmp.c_str(), path.c_str()) != 0) {
    remove(tmp.c_str());
    throw DataError("cannot rename temp file to: " + path);
  }
}

}  // namespace retk
