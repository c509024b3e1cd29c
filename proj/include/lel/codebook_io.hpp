#pragma once
// codebook_io.hpp - binary codebook files.
//
// Layout, all integers little-endian:
//   offset  size  field
//   0       4     magic "LECB"
//   4       4     version (u32, currently 1)
//   8       4     n (u32)
//   12      8     M (u64)
//   20      8     R (IEEE-754 binary64)
//   28      4     alphabet size (u32)
//   32      8     seed (u64)
//   40      M*n   codeword symbols, row-major by codeword, one byte each

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "lel/codec.hpp"
#include "lel/error.hpp"

namespace lel {

inline constexpr std::array<char, 4> kCodebookMagic{'L', 'E', 'C', 'B'};
inline constexpr std::uint32_t kCodebookVersion = 1;
inline constexpr std::size_t kCodebookHeaderBytes = 40;

namespace detail {

template <typename T>
void put_le(std::ostream& os, T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        os.put(static_cast<char>(static_cast<std::uint64_t>(v) >> (8 * i) & 0xFF));
    }
}

template <typename T>
T get_le(std::istream& is) {
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        const int c = is.get();
        if (c == std::char_traits<char>::eof()) throw ValidationError("codebook file truncated");
        v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
    }
    return static_cast<T>(v);
}

}  // namespace detail

inline void write_codebook(std::ostream& os, const Codebook& cb) {
    os.write(kCodebookMagic.data(), kCodebookMagic.size());
    detail::put_le<std::uint32_t>(os, kCodebookVersion);
    detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(cb.n));
    detail::put_le<std::uint64_t>(os, cb.size());
    detail::put_le<std::uint64_t>(os, std::bit_cast<std::uint64_t>(cb.rate));
    detail::put_le<std::uint32_t>(os, static_cast<std::uint32_t>(cb.alphabet_size));
    detail::put_le<std::uint64_t>(os, cb.seed);
    os.write(reinterpret_cast<const char*>(cb.words.data()),
             static_cast<std::streamsize>(cb.words.size()));
    if (!os) throw Error("failed writing codebook");
}

inline Codebook read_codebook(std::istream& is) {
    std::array<char, 4> magic{};
    is.read(magic.data(), magic.size());
    if (!is || magic != kCodebookMagic) throw ValidationError("not a codebook file (bad magic)");
    if (const auto version = detail::get_le<std::uint32_t>(is); version != kCodebookVersion) {
        throw ValidationError("unsupported codebook version " + std::to_string(version));
    }
    Codebook cb;
    cb.n = detail::get_le<std::uint32_t>(is);
    const auto m = detail::get_le<std::uint64_t>(is);
    cb.rate = std::bit_cast<double>(detail::get_le<std::uint64_t>(is));
    cb.alphabet_size = detail::get_le<std::uint32_t>(is);
    cb.seed = detail::get_le<std::uint64_t>(is);

    if (cb.n == 0 || cb.alphabet_size == 0 || cb.alphabet_size > kMaxAlphabet) {
        throw ValidationError("codebook header: invalid blocklength or alphabet size");
    }
    if (m != codebook_size(cb.n, cb.rate)) {
        throw ValidationError("codebook header: M = " + std::to_string(m) +
                              " does not equal ceil(2^{nR})");
    }
    cb.words.resize(static_cast<std::size_t>(m) * cb.n);
    is.read(reinterpret_cast<char*>(cb.words.data()), static_cast<std::streamsize>(cb.words.size()));
    if (static_cast<std::size_t>(is.gcount()) != cb.words.size()) {
        throw ValidationError("codebook file truncated");
    }
    for (const Symbol s : cb.words) {
        if (s >= cb.alphabet_size) throw ValidationError("codebook symbol exceeds alphabet size");
    }
    return cb;
}

inline void save_codebook(const std::filesystem::path& path, const Codebook& cb) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot open " + path.string() + " for writing");
    write_codebook(os, cb);
}

inline Codebook load_codebook(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open " + path.string());
    return read_codebook(is);
}

}  // namespace lel
