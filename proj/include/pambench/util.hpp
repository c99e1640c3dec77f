#pragma once

// Small file, hashing and encoding helpers shared by several modules.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pambench {

namespace fs = std::filesystem;

std::vector<std::uint8_t> read_file_bytes(const fs::path& p);
std::string read_file_text(const fs::path& p);

// Writes via a sibling temporary file and rename, so readers never observe a
// partially written file.
void write_file_atomic(const fs::path& p, std::string_view contents);
void write_file_atomic(const fs::path& p, std::span<const std::uint8_t> contents);

std::string base64_encode(std::span<const std::uint8_t> bytes);

// Incremental SHA-256 (OpenSSL EVP underneath).
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(std::span<const std::uint8_t> bytes);
  void update(std::string_view text);
  std::string hex_digest();

 private:
  void* ctx_;
};

std::string sha256_hex(std::string_view text);

// Digest over every regular file below root (sorted relative paths, each
// followed by its bytes). Paths in `exclude` are relative to root.
std::string tree_digest(const fs::path& root, const std::vector<std::string>& exclude = {});

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);

}  // namespace pambench
