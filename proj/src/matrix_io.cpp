// SPDX-License-Identifier: Apache-2.0
#include "etaplab/matrix_io.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace etaplab {

namespace {

constexpr char kMagic[4] = {'A', 'T', 'N', 'M'};

void put_u32le(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32le(std::istream& in) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) {
        throw std::runtime_error("matrix file truncated in header");
    }
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

} // namespace

void save_matrix(std::ostream& out, const Matrix& m) {
    out.write(kMagic, 4);
    put_u32le(out, static_cast<std::uint32_t>(m.rows()));
    put_u32le(out, static_cast<std::uint32_t>(m.cols()));
    for (std::size_t i = 0; i < m.size(); ++i) {
        const float f = static_cast<float>(m.data()[i]);
        std::uint32_t bits;
        std::memcpy(&bits, &f, 4);
        put_u32le(out, bits);
    }
    if (!out) throw std::runtime_error("matrix write failed");
}

void save_matrix(const std::string& path, const Matrix& m) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    save_matrix(f, m);
}

Matrix load_matrix(std::istream& in) {
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
        throw std::runtime_error("not a matrix file: bad magic");
    }
    const std::uint32_t rows = get_u32le(in);
    const std::uint32_t cols = get_u32le(in);
    if (rows < 1 || cols < 1) throw std::runtime_error("matrix file has zero dimension");
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < m.size(); ++i) {
        const std::uint32_t bits = [&] {
            unsigned char b[4];
            if (!in.read(reinterpret_cast<char*>(b), 4)) {
                throw std::runtime_error("matrix file truncated in payload");
            }
            return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
                   (static_cast<std::uint32_t>(b[2]) << 16) |
                   (static_cast<std::uint32_t>(b[3]) << 24);
        }();
        float f;
        std::memcpy(&f, &bits, 4);
        m.data()[i] = static_cast<double>(f);
    }
    return m;
}

Matrix load_matrix(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    return load_matrix(f);
}

} // namespace etaplab
