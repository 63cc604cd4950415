#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace retk {

inline constexpr const char* kVersion = "0.1.0";

// Malformed input data, bad files, broken artifacts. The CLI maps this to
// exit code 2; everything else unexpected becomes exit code 3.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// 64-bit FNV-1a; the stable hash behind feature indexing and derived seeds.
std::uint64_t fnv1a64(std::string_view s);

std::string lower_ascii(std::string_view s);
std::string upper_ascii(std::string_view s);
bool iequals_ascii(std::string_view a, std::string_view b);
bool contains_whitespace(std::string_view s);

// Reads a whole file, throwing DataError naming the path on failure.
std::string read_file(const std::string& path);

// Writes via a temp file in the same directory plus rename, so interrupted
// runs never leave a truncated artifact behind.
void write_file_atomic(const std::string& path, std::string_view content);

}  // namespace retk
