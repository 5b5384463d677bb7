#include "edp/pgm.hpp"

#include <cmath>
#include <fstream>

namespace edp {

void write_pgm(const std::string& path, const std::vector<std::uint8_t>& pixels, int h, int w) {
    if (static_cast<size_t>(h) * w != pixels.size())
        throw std::invalid_argument("write_pgm: size mismatch");
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("write_pgm: cannot open " + path);
    f << "P5\n" << w << " " << h << "\n255\n";
    f.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
    if (!f) throw DataError("write_pgm: write failed for " + path);
}

std::vector<std::uint8_t> read_pgm(const std::string& path, int& h, int& w) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("read_pgm: cannot open " + path);
    std::string magic;
    int maxval = 0;
    f >> magic;
    if (magic != "P5") throw DataError("read_pgm: not a P5 file: " + path);
    // skip comments between header tokens
    auto next_int = [&f, &path]() {
        for (;;) {
            int c = f.peek();
            if (c == '#') {
                std::string line;
                std::getline(f, line);
            } else if (std::isspace(c)) {
                f.get();
            } else {
                break;
            }
        }
        int v;
        if (!(f >> v)) throw DataError("read_pgm: bad header in " + path);
        return v;
    };
    w = next_int();
    h = next_int();
    maxval = next_int();
    if (maxval != 255) throw DataError("read_pgm: expected maxval 255 in " + path);
    f.get();  // single whitespace after maxval
    std::vector<std::uint8_t> pixels(static_cast<size_t>(h) * w);
    f.read(reinterpret_cast<char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
    if (!f) throw DataError("read_pgm: truncated pixel data in " + path);
    return pixels;
}

void write_image_pgm(const std::string& path, const std::vector<double>& img01, int h, int w) {
    std::vector<std::uint8_t> px(img01.size());
    for (size_t i = 0; i < img01.size(); ++i) {
        double v = std::clamp(img01[i], 0.0, 1.0);
        px[i] = static_cast<std::uint8_t>(std::lround(v * 255.0));
    }
    write_pgm(path, px, h, w);
}

void write_mask_pgm(const std::string& path, const Mask& mask) {
    std::vector<std::uint8_t> px(mask.v.size());
    for (size_t i = 0; i < mask.v.size(); ++i) px[i] = mask.v[i] ? 255 : 0;
    write_pgm(path, px, mask.h, mask.w);
}

std::vector<double> read_image_pgm(const std::string& path, int& h, int& w) {
    auto px = read_pgm(path, h, w);
    std::vector<double> out(px.size());
    for (size_t i = 0; i < px.size(); ++i) out[i] = px[i] / 255.0;
    return out;
}

Mask read_mask_pgm(const std::string& path) {
    int h = 0, w = 0;
    auto px = read_pgm(path, h, w);
    Mask m(h, w);
    for (size_t i = 0; i < px.size(); ++i) m.v[i] = px[i] >= 128 ? 1 : 0;
    return m;
}

}  // namespace edp
