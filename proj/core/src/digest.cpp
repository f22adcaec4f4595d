#include "affdistill/digest.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <sstream>

#include "affdistill/errors.hpp"

namespace affd {

namespace {

std::string to_hex(const unsigned char* hash, unsigned int len) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(digits[hash[i] >> 4]);
        out.push_back(digits[hash[i] & 0xf]);
    }
    return out;
}

struct DigestCtx {
    EVP_MD_CTX* ctx;
    DigestCtx() : ctx(EVP_MD_CTX_new()) {
        if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1)
            throw Error("sha256: failed to initialize digest context");
    }
    ~DigestCtx() { EVP_MD_CTX_free(ctx); }
    void update(const void* data, std::size_t n) {
        if (EVP_DigestUpdate(ctx, data, n) != 1)
            throw Error("sha256: digest update failed");
    }
    std::string finish() {
        unsigned char hash[EVP_MAX_MD_SIZE];
        unsigned int len = 0;
        if (EVP_DigestFinal_ex(ctx, hash, &len) != 1)
            throw Error("sha256: digest finalize failed");
        return to_hex(hash, len);
    }
};

}  // namespace

std::string sha256_bytes(std::span<const std::uint8_t> bytes) {
    DigestCtx d;
    if (!bytes.empty()) d.update(bytes.data(), bytes.size());
    return d.finish();
}

std::string sha256_bytes(const std::string& bytes) {
    DigestCtx d;
    if (!bytes.empty()) d.update(bytes.data(), bytes.size());
    return d.finish();
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw Error("sha256: cannot open " + path.string());
    DigestCtx d;
    char buf[1 << 16];
    while (file.good()) {
        file.read(buf, sizeof(buf));
        std::streamsize n = file.gcount();
        if (n > 0) d.update(buf, static_cast<std::size_t>(n));
    }
    if (file.bad()) throw Error("sha256: read failure on " + path.string());
    return d.finish();
}

void write_checksums(const std::vector<ChecksumEntry>& entries,
                     const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("checksums: cannot open " + path.string());
    for (const auto& e : entries) out << e.digest << "  " << e.path << "\n";
}

std::vector<ChecksumEntry> read_checksums(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("checksums: cannot open " + path.string());
    std::vector<ChecksumEntry> entries;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        // "<64 hex chars>  <path>"
        if (line.size() < 67 || line[64] != ' ' || line[65] != ' ')
            throw FormatError("checksums: malformed line " + std::to_string(lineno) +
                              " in " + path.string());
        std::string digest = line.substr(0, 64);
        for (char c : digest)
            if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f')))
                throw FormatError("checksums: non-hex digest at line " +
                                  std::to_string(lineno));
        entries.push_back({digest, line.substr(66)});
    }
    return entries;
}

std::vector<VerifyResult> verify_checksums(const std::filesystem::path& sums_file,
                                           const std::filesystem::path& base_dir) {
    auto entries = read_checksums(sums_file);
    std::vector<VerifyResult> results;
    results.reserve(entries.size());
    for (const auto& e : entries) {
        VerifyResult r;
        r.path = e.path;
        auto full = base_dir / e.path;
        if (!std::filesystem::exists(full)) {
            r.ok = false;
            r.reason = "missing file";
        } else {
            try {
                std::string actual = sha256_file(full);
                r.ok = (actual == e.digest);
                if (!r.ok) r.reason = "digest mismatch";
            } catch (const Error& ex) {
                r.ok = false;
                r.reason = ex.what();
            }
        }
        results.push_back(std::move(r));
    }
    return results;
}

}  // namespace affd
