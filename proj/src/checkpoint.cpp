#include "pae/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "pae/errors.hpp"

// Multi-byte integers are written byte-by-byte little-endian; array payloads
// are raw host memory, which matches the declared layout on the
// little-endian targets this project builds for.

namespace pae::ckpt {

namespace {

constexpr char kMagic[4] = {'P', 'A', 'E', '1'};

void put_u16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint16_t get_u16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::size_t dtype_size(const std::string& dtype) {
    if (dtype == "f64") return 8;
    if (dtype == "f32") return 4;
    if (dtype == "u8") return 1;
    throw CheckpointError("checkpoint: unknown dtype '" + dtype + "'");
}

std::vector<unsigned char> read_all(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("checkpoint: cannot open '" + path + "'");
    std::vector<unsigned char> data((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return data;
}

nlohmann::json parse_header(const std::vector<unsigned char>& data, std::size_t& data_start) {
    if (data.size() < 10) throw CheckpointError("checkpoint: file truncated before header");
    if (std::memcmp(data.data(), kMagic, 4) != 0)
        throw CheckpointError("checkpoint: bad magic bytes");
    const std::uint16_t version = get_u16(data.data() + 4);
    if (version != kFormatVersion)
        throw CheckpointError("checkpoint: unsupported format version " +
                              std::to_string(version));
    const std::uint32_t header_len = get_u32(data.data() + 6);
    if (data.size() < 10u + header_len)
        throw CheckpointError("checkpoint: file truncated inside header");
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(data.begin() + 10, data.begin() + 10 + header_len);
    } catch (const nlohmann::json::exception& e) {
        throw CheckpointError(std::string("checkpoint: malformed header JSON: ") + e.what());
    }
    data_start = 10u + header_len;
    return header;
}

}  // namespace

const ArrayRecord& CheckpointFile::array(const std::string& name) const {
    for (const auto& a : arrays)
        if (a.name == name) return a;
    throw CheckpointError("checkpoint: missing array '" + name + "'");
}

bool CheckpointFile::has_array(const std::string& name) const {
    for (const auto& a : arrays)
        if (a.name == name) return true;
    return false;
}

void write_checkpoint_file(const std::string& path, const CheckpointFile& file) {
    nlohmann::json manifest = nlohmann::json::array();
    std::size_t offset = 0;
    for (const auto& a : file.arrays) {
        manifest.push_back({{"name", a.name},
                            {"dtype", a.dtype},
                            {"shape", a.shape},
                            {"offset", offset},
                            {"nbytes", a.bytes.size()}});
        offset += a.bytes.size();
    }
    const std::string header = nlohmann::json{{"meta", file.meta}, {"arrays", manifest}}.dump();

    std::string prefix;
    prefix.append(kMagic, 4);
    put_u16(prefix, kFormatVersion);
    put_u32(prefix, static_cast<std::uint32_t>(header.size()));

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("checkpoint: cannot write '" + path + "'");
    out.write(prefix.data(), static_cast<std::streamsize>(prefix.size()));
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    for (const auto& a : file.arrays)
        out.write(reinterpret_cast<const char*>(a.bytes.data()),
                  static_cast<std::streamsize>(a.bytes.size()));
    if (!out) throw CheckpointError("checkpoint: write failed for '" + path + "'");
}

CheckpointFile read_checkpoint_file(const std::string& path) {
    const auto data = read_all(path);
    std::size_t data_start = 0;
    const auto header = parse_header(data, data_start);

    CheckpointFile file;
    try {
        file.meta = header.at("meta");
        for (const auto& entry : header.at("arrays")) {
            ArrayRecord rec;
            rec.name = entry.at("name").get<std::string>();
            rec.dtype = entry.at("dtype").get<std::string>();
            rec.shape = entry.at("shape").get<std::vector<std::size_t>>();
            const std::size_t offset = entry.at("offset").get<std::size_t>();
            const std::size_t nbytes = entry.at("nbytes").get<std::size_t>();

            std::size_t numel = 1;
            for (std::size_t d : rec.shape) numel *= d;
            if (numel * dtype_size(rec.dtype) != nbytes)
                throw CheckpointError("checkpoint: array '" + rec.name +
                                      "' byte count disagrees with its shape");
            if (data_start + offset + nbytes > data.size())
                throw CheckpointError("checkpoint: file truncated inside array '" + rec.name +
                                      "'");
            rec.bytes.assign(data.begin() + data_start + offset,
                             data.begin() + data_start + offset + nbytes);
            file.arrays.push_back(std::move(rec));
        }
    } catch (const nlohmann::json::exception& e) {
        throw CheckpointError(std::string("checkpoint: malformed manifest: ") + e.what());
    }
    return file;
}

nlohmann::json read_checkpoint_meta(const std::string& path) {
    const auto data = read_all(path);
    std::size_t data_start = 0;
    const auto header = parse_header(data, data_start);
    try {
        return header.at("meta");
    } catch (const nlohmann::json::exception& e) {
        throw CheckpointError(std::string("checkpoint: malformed header: ") + e.what());
    }
}

template <typename T>
std::vector<T> array_values(const ArrayRecord& rec) {
    if (rec.dtype != dtype_name<T>())
        throw CheckpointError("checkpoint: array '" + rec.name + "' has dtype " + rec.dtype +
                              ", expected " + dtype_name<T>());
    std::vector<T> out(rec.bytes.size() / sizeof(T));
    std::memcpy(out.data(), rec.bytes.data(), rec.bytes.size());
    return out;
}

template std::vector<double> array_values<double>(const ArrayRecord&);
template std::vector<float> array_values<float>(const ArrayRecord&);

}  // namespace pae::ckpt
