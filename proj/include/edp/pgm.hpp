#pragma once

#include <string>
#include <vector>

#include "edp/star.hpp"

namespace edp {

// Binary 8-bit PGM (P5), maxval 255.
void write_pgm(const std::string& path, const std::vector<std::uint8_t>& pixels, int h, int w);
std::vector<std::uint8_t> read_pgm(const std::string& path, int& h, int& w);

void write_image_pgm(const std::string& path, const std::vector<double>& img01, int h, int w);
void write_mask_pgm(const std::string& path, const Mask& mask);
std::vector<double> read_image_pgm(const std::string& path, int& h, int& w);  // scaled to [0,1]
Mask read_mask_pgm(const std::string& path);

}  // namespace edp
