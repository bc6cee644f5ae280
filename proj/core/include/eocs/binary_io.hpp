#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "eocs/errors.hpp"

namespace eocs::binary {

// Little-endian fixed-width encoding for dataset and checkpoint files.

template <class T>
T to_little(T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    if constexpr (std::endian::native == std::endian::little) {
        return value;
    } else {
        unsigned char bytes[sizeof(T)];
        std::memcpy(bytes, &value, sizeof(T));
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
        std::memcpy(&value, bytes, sizeof(T));
        return value;
    }
}

template <class T>
void write(std::ostream& out, T value) {
    value = to_little(value);
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
    if (!out) throw IoError("write failed");
}

template <class T>
T read(std::istream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw IoError("unexpected end of file");
    return to_little(value);
}

inline void write_magic(std::ostream& out, const char (&magic)[5]) {
    out.write(magic, 4);
    if (!out) throw IoError("write failed");
}

inline bool read_magic(std::istream& in, const char (&magic)[5]) {
    char got[4] = {};
    in.read(got, 4);
    return in && std::memcmp(got, magic, 4) == 0;
}

}  // namespace eocs::binary
