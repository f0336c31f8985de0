#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "json.hpp"

// Checkpoint container format:
//
//   bytes 0..3   magic "PAE1"
//   bytes 4..5   format version, u16 little-endian
//   bytes 6..9   header length H, u32 little-endian
//   H bytes      UTF-8 JSON: {"meta": {...}, "arrays": [{name, dtype,
//                shape, offset, nbytes}, ...]}; offsets are relative to the
//                start of the data section
//   rest         raw little-endian array data
//
// Readers reject bad magic, unknown versions, truncated files, and
// malformed manifests with CheckpointError.

namespace pae::ckpt {

inline constexpr std::uint16_t kFormatVersion = 1;

struct ArrayRecord {
    std::string name;
    std::string dtype;  // "f64" | "f32" | "u8"
    std::vector<std::size_t> shape;
    std::vector<unsigned char> bytes;
};

struct CheckpointFile {
    nlohmann::json meta;
    std::vector<ArrayRecord> arrays;

    const ArrayRecord& array(const std::string& name) const;
    bool has_array(const std::string& name) const;
};

void write_checkpoint_file(const std::string& path, const CheckpointFile& file);
CheckpointFile read_checkpoint_file(const std::string& path);

// Header-only read; lets callers pick a scalar type before loading arrays.
nlohmann::json read_checkpoint_meta(const std::string& path);

template <typename T>
const char* dtype_name();
template <>
inline const char* dtype_name<double>() {
    return "f64";
}
template <>
inline const char* dtype_name<float>() {
    return "f32";
}

template <typename T>
ArrayRecord make_array(std::string name, const std::vector<std::size_t>& shape,
                       const std::vector<T>& values) {
    ArrayRecord rec;
    rec.name = std::move(name);
    rec.dtype = dtype_name<T>();
    rec.shape = shape;
    rec.bytes.resize(values.size() * sizeof(T));
    std::memcpy(rec.bytes.data(), values.data(), rec.bytes.size());
    return rec;
}

template <typename T>
std::vector<T> array_values(const ArrayRecord& rec);

}  // namespace pae::ckpt
