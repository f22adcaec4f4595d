#include "affdistill/npz.hpp"

#include <cstring>
#include <fstream>

#include "affdistill/digest.hpp"
#include "affdistill/errors.hpp"

namespace affd {

namespace {

// ---- CRC-32 (polynomial 0xEDB88320), as required by the ZIP format ----

const std::uint32_t* crc_table() {
    static std::uint32_t table[256];
    static bool init = [] {
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint32_t c = i;
            for (int k = 0; k < 8; ++k)
                c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            table[i] = c;
        }
        return true;
    }();
    (void)init;
    return table;
}

std::uint32_t crc32(const std::string& data) {
    const std::uint32_t* table = crc_table();
    std::uint32_t c = 0xFFFFFFFFu;
    for (unsigned char ch : data) c = table[(c ^ ch) & 0xFF] ^ (c >> 8);
    return c ^ 0xFFFFFFFFu;
}

// ---- little-endian scalar IO ----

void put_u16(std::string& s, std::uint16_t v) {
    s.push_back(static_cast<char>(v & 0xFF));
    s.push_back(static_cast<char>((v >> 8) & 0xFF));
}

void put_u32(std::string& s, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint16_t get_u16(const std::string& s, std::size_t off) {
    if (off + 2 > s.size()) throw FormatError("npz: truncated container");
    return static_cast<std::uint16_t>(static_cast<unsigned char>(s[off]) |
                                      (static_cast<unsigned char>(s[off + 1]) << 8));
}

std::uint32_t get_u32(const std::string& s, std::size_t off) {
    if (off + 4 > s.size()) throw FormatError("npz: truncated container");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v |= static_cast<std::uint32_t>(static_cast<unsigned char>(s[off + i])) << (8 * i);
    return v;
}

// ---- NPY v1.0 ----

std::string shape_repr(const std::vector<std::size_t>& shape) {
    std::string s = "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        s += std::to_string(shape[i]);
        if (shape.size() == 1 || i + 1 < shape.size()) s += ",";
        if (i + 1 < shape.size()) s += " ";
    }
    s += ")";
    return s;
}

std::size_t str_width(const Array& a) {
    std::size_t w = 1;
    for (const auto& s : a.str) w = std::max(w, s.size());
    return w;
}

std::string npy_serialize(const Array& a) {
    std::string descr;
    switch (a.dtype) {
        case DType::F64: descr = "<f8"; break;
        case DType::I64: descr = "<i8"; break;
        case DType::Str: descr = "|S" + std::to_string(str_width(a)); break;
    }
    std::string dict = "{'descr': '" + descr + "', 'fortran_order': False, 'shape': " +
                       shape_repr(a.shape) + ", }";
    // pad with spaces so magic+version+hlen+header is a multiple of 64, '\n' last
    std::size_t unpadded = 10 + dict.size() + 1;
    std::size_t padded = (unpadded + 63) / 64 * 64;
    dict.append(padded - unpadded, ' ');
    dict.push_back('\n');
    if (dict.size() > 0xFFFF) throw FormatError("npy: header too large");

    std::string out;
    out += "\x93NUMPY";
    out.push_back('\x01');
    out.push_back('\x00');
    put_u16(out, static_cast<std::uint16_t>(dict.size()));
    out += dict;

    switch (a.dtype) {
        case DType::F64: {
            std::size_t n = a.f64.size();
            std::size_t base = out.size();
            out.resize(base + n * 8);
            if (n) std::memcpy(out.data() + base, a.f64.data(), n * 8);
            break;
        }
        case DType::I64: {
            std::size_t n = a.i64.size();
            std::size_t base = out.size();
            out.resize(base + n * 8);
            if (n) std::memcpy(out.data() + base, a.i64.data(), n * 8);
            break;
        }
        case DType::Str: {
            std::size_t w = str_width(a);
            for (const auto& s : a.str) {
                if (s.size() > w) throw FormatError("npy: string wider than declared");
                out += s;
                out.append(w - s.size(), '\0');
            }
            break;
        }
    }
    return out;
}

// Minimal parser for the NPY header dict; tolerates whitespace variations.
std::string dict_value(const std::string& dict, const std::string& key) {
    auto kpos = dict.find("'" + key + "'");
    if (kpos == std::string::npos) throw FormatError("npy: header missing key " + key);
    auto colon = dict.find(':', kpos);
    if (colon == std::string::npos) throw FormatError("npy: malformed header");
    std::size_t start = colon + 1;
    while (start < dict.size() && dict[start] == ' ') ++start;
    if (start >= dict.size()) throw FormatError("npy: malformed header");
    if (dict[start] == '\'') {
        auto end = dict.find('\'', start + 1);
        if (end == std::string::npos) throw FormatError("npy: malformed header");
        return dict.substr(start + 1, end - start - 1);
    }
    if (dict[start] == '(') {
        auto end = dict.find(')', start);
        if (end == std::string::npos) throw FormatError("npy: malformed header");
        return dict.substr(start, end - start + 1);
    }
    auto end = dict.find_first_of(",}", start);
    if (end == std::string::npos) throw FormatError("npy: malformed header");
    std::string v = dict.substr(start, end - start);
    while (!v.empty() && v.back() == ' ') v.pop_back();
    return v;
}

std::vector<std::size_t> parse_shape(const std::string& tuple) {
    std::vector<std::size_t> shape;
    std::string num;
    for (char c : tuple) {
        if (c >= '0' && c <= '9') {
            num.push_back(c);
        } else if (!num.empty()) {
            shape.push_back(std::stoull(num));
            num.clear();
        }
    }
    return shape;
}

Array npy_parse(const std::string& bytes) {
    if (bytes.size() < 10 || bytes.compare(0, 6, "\x93NUMPY") != 0)
        throw FormatError("npy: bad magic");
    if (bytes[6] != '\x01') throw FormatError("npy: unsupported version");
    std::uint16_t hlen = get_u16(bytes, 8);
    if (10u + hlen > bytes.size()) throw FormatError("npy: truncated header");
    std::string dict = bytes.substr(10, hlen);

    if (dict_value(dict, "fortran_order") != "False")
        throw FormatError("npy: fortran order unsupported");
    std::string descr = dict_value(dict, "descr");
    Array a;
    a.shape = parse_shape(dict_value(dict, "shape"));
    std::size_t count = 1;
    for (auto d : a.shape) count *= d;
    std::size_t data_off = 10 + hlen;
    const std::size_t avail = bytes.size() - data_off;

    if (descr == "<f8") {
        a.dtype = DType::F64;
        if (avail < count * 8) throw FormatError("npy: truncated f8 data");
        a.f64.resize(count);
        if (count) std::memcpy(a.f64.data(), bytes.data() + data_off, count * 8);
    } else if (descr == "<i8") {
        a.dtype = DType::I64;
        if (avail < count * 8) throw FormatError("npy: truncated i8 data");
        a.i64.resize(count);
        if (count) std::memcpy(a.i64.data(), bytes.data() + data_off, count * 8);
    } else if (descr.size() > 2 && (descr[0] == '|' || descr[0] == '<') && descr[1] == 'S') {
        a.dtype = DType::Str;
        std::size_t w = std::stoull(descr.substr(2));
        if (avail < count * w) throw FormatError("npy: truncated string data");
        a.str.reserve(count);
        for (std::size_t i = 0; i < count; ++i) {
            std::string s = bytes.substr(data_off + i * w, w);
            while (!s.empty() && s.back() == '\0') s.pop_back();
            a.str.push_back(std::move(s));
        }
    } else {
        throw FormatError("npy: unsupported dtype " + descr);
    }
    return a;
}

constexpr std::uint32_t kLocalSig = 0x04034b50;
constexpr std::uint32_t kCentralSig = 0x02014b50;
constexpr std::uint32_t kEocdSig = 0x06054b50;

}  // namespace

std::size_t Array::element_count() const {
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    return n;
}

namespace {
void check_payload(const Array& a) {
    std::size_t n = a.element_count();
    std::size_t have = 0;
    switch (a.dtype) {
        case DType::F64: have = a.f64.size(); break;
        case DType::I64: have = a.i64.size(); break;
        case DType::Str: have = a.str.size(); break;
    }
    if (have != n) throw ShapeError("npz: payload length inconsistent with shape");
}
}  // namespace

Array Array::from_f64(std::vector<std::size_t> shape, std::vector<double> data) {
    Array a;
    a.dtype = DType::F64;
    a.shape = std::move(shape);
    a.f64 = std::move(data);
    check_payload(a);
    return a;
}

Array Array::from_i64(std::vector<std::size_t> shape, std::vector<std::int64_t> data) {
    Array a;
    a.dtype = DType::I64;
    a.shape = std::move(shape);
    a.i64 = std::move(data);
    check_payload(a);
    return a;
}

Array Array::from_str(std::vector<std::size_t> shape, std::vector<std::string> data) {
    Array a;
    a.dtype = DType::Str;
    a.shape = std::move(shape);
    a.str = std::move(data);
    check_payload(a);
    return a;
}

void ArrayContainer::add(const std::string& name, Array a) {
    if (contains(name)) throw InvalidArgument("npz: duplicate array name " + name);
    check_payload(a);
    entries.emplace_back(name, std::move(a));
}

bool ArrayContainer::contains(const std::string& name) const {
    for (const auto& [n, _] : entries)
        if (n == name) return true;
    return false;
}

const Array& ArrayContainer::get(const std::string& name) const {
    for (const auto& [n, a] : entries)
        if (n == name) return a;
    throw InvalidArgument("npz: no array named " + name);
}

std::string serialize_container(const ArrayContainer& c) {
    std::string out;
    struct CdRecord {
        std::string name;
        std::uint32_t crc, size, offset;
    };
    std::vector<CdRecord> cd;

    for (const auto& [name, array] : c.entries) {
        std::string payload = npy_serialize(array);
        std::string entry_name = name + ".npy";
        std::uint32_t crc = crc32(payload);
        auto offset = static_cast<std::uint32_t>(out.size());

        put_u32(out, kLocalSig);
        put_u16(out, 20);  // version needed
        put_u16(out, 0);   // flags
        put_u16(out, 0);   // method: stored
        put_u16(out, 0);   // mod time (fixed for reproducibility)
        put_u16(out, 0);   // mod date
        put_u32(out, crc);
        put_u32(out, static_cast<std::uint32_t>(payload.size()));
        put_u32(out, static_cast<std::uint32_t>(payload.size()));
        put_u16(out, static_cast<std::uint16_t>(entry_name.size()));
        put_u16(out, 0);  // extra
        out += entry_name;
        out += payload;

        cd.push_back({entry_name, crc, static_cast<std::uint32_t>(payload.size()), offset});
    }

    auto cd_offset = static_cast<std::uint32_t>(out.size());
    for (const auto& r : cd) {
        put_u32(out, kCentralSig);
        put_u16(out, 20);  // version made by
        put_u16(out, 20);  // version needed
        put_u16(out, 0);   // flags
        put_u16(out, 0);   // method
        put_u16(out, 0);   // time
        put_u16(out, 0);   // date
        put_u32(out, r.crc);
        put_u32(out, r.size);
        put_u32(out, r.size);
        put_u16(out, static_cast<std::uint16_t>(r.name.size()));
        put_u16(out, 0);  // extra
        put_u16(out, 0);  // comment
        put_u16(out, 0);  // disk
        put_u16(out, 0);  // internal attrs
        put_u32(out, 0);  // external attrs
        put_u32(out, r.offset);
        out += r.name;
    }
    auto cd_size = static_cast<std::uint32_t>(out.size()) - cd_offset;

    put_u32(out, kEocdSig);
    put_u16(out, 0);
    put_u16(out, 0);
    put_u16(out, static_cast<std::uint16_t>(cd.size()));
    put_u16(out, static_cast<std::uint16_t>(cd.size()));
    put_u32(out, cd_size);
    put_u32(out, cd_offset);
    put_u16(out, 0);  // comment length
    return out;
}

std::string write_container(const ArrayContainer& c, const std::filesystem::path& path) {
    std::string bytes = serialize_container(c);
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("npz: cannot open " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw Error("npz: write failure on " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
    return sha256_bytes(bytes);
}

ArrayContainer parse_container(const std::string& bytes) {
    // locate end-of-central-directory (no comment support needed for our files,
    // but scan backwards anyway)
    if (bytes.size() < 22) throw FormatError("npz: file too small");
    std::size_t eocd = std::string::npos;
    std::size_t scan_start = bytes.size() >= 22 + 0xFFFF ? bytes.size() - 22 - 0xFFFF : 0;
    for (std::size_t i = bytes.size() - 22 + 1; i-- > scan_start;) {
        if (get_u32(bytes, i) == kEocdSig) {
            eocd = i;
            break;
        }
    }
    if (eocd == std::string::npos) throw FormatError("npz: no end-of-central-directory");

    std::uint16_t count = get_u16(bytes, eocd + 10);
    std::uint32_t cd_offset = get_u32(bytes, eocd + 16);

    ArrayContainer c;
    std::size_t pos = cd_offset;
    for (std::uint16_t i = 0; i < count; ++i) {
        if (get_u32(bytes, pos) != kCentralSig)
            throw FormatError("npz: bad central directory entry");
        std::uint16_t method = get_u16(bytes, pos + 10);
        std::uint32_t crc = get_u32(bytes, pos + 16);
        std::uint32_t csize = get_u32(bytes, pos + 20);
        std::uint16_t name_len = get_u16(bytes, pos + 28);
        std::uint16_t extra_len = get_u16(bytes, pos + 30);
        std::uint16_t comment_len = get_u16(bytes, pos + 32);
        std::uint32_t local_off = get_u32(bytes, pos + 42);
        if (pos + 46 + name_len > bytes.size()) throw FormatError("npz: truncated name");
        std::string entry_name = bytes.substr(pos + 46, name_len);
        pos += 46u + name_len + extra_len + comment_len;

        if (method != 0) throw FormatError("npz: compressed entries unsupported");

        // walk the local header to find the data start
        if (get_u32(bytes, local_off) != kLocalSig)
            throw FormatError("npz: bad local header");
        std::uint16_t lname = get_u16(bytes, local_off + 26);
        std::uint16_t lextra = get_u16(bytes, local_off + 28);
        std::size_t data_off = local_off + 30u + lname + lextra;
        if (data_off + csize > bytes.size()) throw FormatError("npz: truncated entry");
        std::string payload = bytes.substr(data_off, csize);
        if (crc32(payload) != crc) throw FormatError("npz: CRC mismatch in " + entry_name);

        std::string array_name = entry_name;
        if (array_name.size() > 4 && array_name.ends_with(".npy"))
            array_name.resize(array_name.size() - 4);
        c.add(array_name, npy_parse(payload));
    }
    return c;
}

ArrayContainer read_container(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("npz: cannot open " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_container(bytes);
}

}  // namespace affd
