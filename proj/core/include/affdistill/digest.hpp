#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace affd {

/// Lowercase hex SHA-256 of a byte span.
std::string sha256_bytes(std::span<const std::uint8_t> bytes);
std::string sha256_bytes(const std::string& bytes);

/// Lowercase hex SHA-256 of a file's contents. Throws Error on IO failure.
std::string sha256_file(const std::filesystem::path& path);

struct ChecksumEntry {
    std::string digest;  // lowercase hex
    std::string path;    // relative path as recorded
};

struct VerifyResult {
    std::string path;
    bool ok = false;
    std::string reason;  // empty when ok
};

/// Writes "<hex>  <path>\n" lines, sha256sum-compatible.
void write_checksums(const std::vector<ChecksumEntry>& entries,
                     const std::filesystem::path& path);

/// Parses a SHA256SUMS-style file. Throws FormatError on malformed lines.
std::vector<ChecksumEntry> read_checksums(const std::filesystem::path& path);

/// Re-hashes every listed file (relative to base_dir) and compares.
/// Missing files are reported as failures, not thrown.
std::vector<VerifyResult> verify_checksums(const std::filesystem::path& sums_file,
                                           const std::filesystem::path& base_dir);

}  // namespace affd
