#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>

#include "spinekpt/tensor.hpp"

namespace spinekpt {

/// Writes a 1xHxW tensor in [0,1] as binary P5 PGM, 8-bit, maxval 255.
inline void write_pgm(const Tensor& image, const std::string& path) {
    if (image.shape.size() != 3 || image.dim(0) != 1)
        throw std::invalid_argument("write_pgm: image must be 1xHxW");
    const std::size_t h = image.dim(1), w = image.dim(2);
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("write_pgm: cannot open " + path);
    os << "P5\n" << w << " " << h << "\n255\n";
    std::string bytes(h * w, '\0');
    for (std::size_t i = 0; i < h * w; ++i) {
        const double v = std::min(std::max(image.data[i], 0.0), 1.0);
        bytes[i] = static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0)));
    }
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!os) throw std::runtime_error("write_pgm: write failed: " + path);
}

/// Reads a binary P5 PGM into a 1xHxW tensor scaled to [0,1].
inline Tensor read_pgm(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("read_pgm: cannot open " + path);

    auto next_token = [&]() -> std::string {
        std::string tok;
        char ch;
        while (is.get(ch)) {
            if (ch == '#') {  // comment to end of line
                while (is.get(ch) && ch != '\n') {}
                continue;
            }
            if (std::isspace(static_cast<unsigned char>(ch))) {
                if (!tok.empty()) return tok;
                continue;
            }
            tok += ch;
        }
        return tok;
    };

    if (next_token() != "P5")
        throw std::runtime_error("read_pgm: not a binary PGM: " + path);
    const std::size_t w = std::stoul(next_token());
    const std::size_t h = std::stoul(next_token());
    const unsigned maxval = static_cast<unsigned>(std::stoul(next_token()));
    if (w == 0 || h == 0 || maxval == 0 || maxval > 255)
        throw std::runtime_error("read_pgm: unsupported header in " + path);

    std::string bytes(h * w, '\0');
    is.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (static_cast<std::size_t>(is.gcount()) != h * w)
        throw std::runtime_error("read_pgm: truncated pixel data in " + path);

    Tensor image({1, h, w});
    for (std::size_t i = 0; i < h * w; ++i)
        image.data[i] = static_cast<unsigned char>(bytes[i]) / static_cast<double>(maxval);
    return image;
}

} // namespace spinekpt
