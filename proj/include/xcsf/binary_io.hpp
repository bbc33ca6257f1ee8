#pragma once

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace xcsf {

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Little-endian fixed-width encoding; doubles are stored by bit pattern so
// every value round-trips exactly.
class BinaryWriter {
public:
    explicit BinaryWriter(std::ostream& os) : os_(os) {}

    void u8(std::uint8_t v) { os_.put(static_cast<char>(v)); }
    void u64(std::uint64_t v) {
        char buf[8];
        for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
        os_.write(buf, 8);
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void str(const std::string& s) {
        u64(s.size());
        os_.write(s.data(), static_cast<std::streamsize>(s.size()));
    }
    void f64s(std::span<const double> v) {
        u64(v.size());
        for (double d : v) f64(d);
    }
    void u8s(std::span<const std::uint8_t> v) {
        u64(v.size());
        os_.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size()));
    }

private:
    std::ostream& os_;
};

class BinaryReader {
public:
    explicit BinaryReader(std::istream& is) : is_(is) {}

    std::uint8_t u8() {
        char c;
        if (!is_.get(c)) throw FormatError("unexpected end of data");
        return static_cast<std::uint8_t>(c);
    }
    std::uint64_t u64() {
        unsigned char buf[8];
        if (!is_.read(reinterpret_cast<char*>(buf), 8)) throw FormatError("unexpected end of data");
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string str() {
        const auto n = length();
        std::string s(n, '\0');
        if (n > 0 && !is_.read(s.data(), static_cast<std::streamsize>(n)))
            throw FormatError("unexpected end of data");
        return s;
    }
    std::vector<double> f64s() {
        const auto n = length();
        std::vector<double> v(n);
        for (auto& d : v) d = f64();
        return v;
    }
    std::vector<std::uint8_t> u8s() {
        const auto n = length();
        std::vector<std::uint8_t> v(n);
        if (n > 0 && !is_.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n)))
            throw FormatError("unexpected end of data");
        return v;
    }

private:
    std::size_t length() {
        const auto n = u64();
        if (n > (std::uint64_t{1} << 32)) throw FormatError("implausible length field");
        return static_cast<std::size_t>(n);
    }

    std::istream& is_;
};

/// FNV-1a over a byte range, used as a checkpoint integrity check.
inline std::uint64_t fnv1a(std::span<const char> bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace xcsf
