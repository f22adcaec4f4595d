#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace affd {

// NPZ-style array container: a ZIP of stored (uncompressed) entries, each an
// NPY v1.0 array. Element types are 64-bit reals ('<f8'), 64-bit integers
// ('<i8'), and fixed-width byte strings ('|S#', null-padded UTF-8).

enum class DType { F64, I64, Str };

struct Array {
    DType dtype = DType::F64;
    std::vector<std::size_t> shape;
    std::vector<double> f64;
    std::vector<std::int64_t> i64;
    std::vector<std::string> str;

    std::size_t element_count() const;

    static Array from_f64(std::vector<std::size_t> shape, std::vector<double> data);
    static Array from_i64(std::vector<std::size_t> shape, std::vector<std::int64_t> data);
    static Array from_str(std::vector<std::size_t> shape, std::vector<std::string> data);
};

struct ArrayContainer {
    // insertion-ordered; names must be unique
    std::vector<std::pair<std::string, Array>> entries;

    void add(const std::string& name, Array a);
    bool contains(const std::string& name) const;
    const Array& get(const std::string& name) const;
};

/// Serializes the container to memory (ZIP bytes).
std::string serialize_container(const ArrayContainer& c);

/// Writes atomically (temp + rename). Returns the SHA-256 of the file bytes.
std::string write_container(const ArrayContainer& c, const std::filesystem::path& path);

ArrayContainer parse_container(const std::string& bytes);
ArrayContainer read_container(const std::filesystem::path& path);

}  // namespace affd
