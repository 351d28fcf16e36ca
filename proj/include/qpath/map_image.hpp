#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "qpath/grid_world.hpp"

namespace qpath {

/// 8-bit grayscale raster, row-major.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;

    std::uint8_t at(int x, int y) const {
        return pixels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                      static_cast<std::size_t>(x)];
    }
};

/// Reads PGM (P2 or P5) or PNG, detected by content. Color PNGs are reduced
/// to luminance. Throws Error(UnreadableImage).
GrayImage read_gray_image(const std::filesystem::path& path);

/// Writes binary P5 PGM. Throws Error(IoError).
void write_pgm(const GrayImage& image, const std::filesystem::path& path);

/// Source-pixel span [begin, end) covered by target bin `i` of `bins` when a
/// `source` extent is divided evenly. Upsampled bins cover one pixel.
struct BinSpan {
    int begin;
    int end;
};
BinSpan bin_span(int i, int bins, int source);

/// Thresholds `image` into an out_width x out_height obstacle mask. A target
/// cell is blocked iff strictly more than half of the source pixels in its bin
/// have luminance below `threshold`. Throws DegenerateDims / UnreadableImage.
BoolGrid ingest_map_image(const GrayImage& image, int threshold, int out_width, int out_height);

/// Single-threaded reference for ingest_map_image, kept for tests and benchmarks.
BoolGrid ingest_map_image_serial(const GrayImage& image, int threshold, int out_width,
                                 int out_height);

}  // namespace qpath
