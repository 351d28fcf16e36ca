#include "qpath/map_image.hpp"

#include <png.h>

#include <cctype>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include "qpath/error.hpp"

namespace qpath {
namespace {

[[noreturn]] void unreadable(const std::filesystem::path& path, const std::string& why) {
    throw Error(ErrorCode::UnreadableImage, path.string() + ": " + why);
}

// Skips whitespace and '#' comments in a PGM header.
void skip_pgm_space(const std::string& data, std::size_t& pos) {
    while (pos < data.size()) {
        if (data[pos] == '#') {
            while (pos < data.size() && data[pos] != '\n') ++pos;
        } else if (std::isspace(static_cast<unsigned char>(data[pos]))) {
            ++pos;
        } else {
            break;
        }
    }
}

long read_pgm_int(const std::string& data, std::size_t& pos, const std::filesystem::path& path) {
    skip_pgm_space(data, pos);
    const std::size_t start = pos;
    while (pos < data.size() && std::isdigit(static_cast<unsigned char>(data[pos]))) ++pos;
    if (start == pos) unreadable(path, "malformed PGM header");
    return std::stol(data.substr(start, pos - start));
}

GrayImage decode_pgm(const std::string& data, const std::filesystem::path& path) {
    const bool ascii = data[1] == '2';
    std::size_t pos = 2;
    GrayImage img;
    img.width = static_cast<int>(read_pgm_int(data, pos, path));
    img.height = static_cast<int>(read_pgm_int(data, pos, path));
    const long maxval = read_pgm_int(data, pos, path);
    if (img.width <= 0 || img.height <= 0) unreadable(path, "empty image");
    if (maxval <= 0 || maxval > 65535) unreadable(path, "bad PGM maxval");
    const std::size_t n = static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height);
    img.pixels.resize(n);
    auto scale = [maxval](long v) {
        return static_cast<std::uint8_t>((v * 255 + maxval / 2) / maxval);
    };
    if (ascii) {
        for (std::size_t i = 0; i < n; ++i) {
            const long v = read_pgm_int(data, pos, path);
            if (v > maxval) unreadable(path, "PGM sample exceeds maxval");
            img.pixels[i] = scale(v);
        }
        return img;
    }
    ++pos;  // single whitespace byte after maxval
    const std::size_t bytes_per = maxval > 255 ? 2 : 1;
    if (data.size() < pos + n * bytes_per) unreadable(path, "truncated PGM raster");
    for (std::size_t i = 0; i < n; ++i) {
        long v = static_cast<unsigned char>(data[pos + i * bytes_per]);
        if (bytes_per == 2) v = (v << 8) | static_cast<unsigned char>(data[pos + i * 2 + 1]);
        img.pixels[i] = scale(std::min(v, maxval));
    }
    return img;
}

GrayImage decode_png(const std::string& data, const std::filesystem::path& path) {
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    if (png_image_begin_read_from_memory(&image, data.data(), data.size()) == 0)
        unreadable(path, image.message);
    image.format = PNG_FORMAT_GRAY;
    GrayImage img;
    img.width = static_cast<int>(image.width);
    img.height = static_cast<int>(image.height);
    img.pixels.resize(PNG_IMAGE_SIZE(image));
    if (png_image_finish_read(&image, nullptr, img.pixels.data(), 0, nullptr) == 0) {
        const std::string why = image.message;
        png_image_free(&image);
        unreadable(path, why);
    }
    if (img.width <= 0 || img.height <= 0) unreadable(path, "empty image");
    return img;
}

}  // namespace

GrayImage read_gray_image(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) unreadable(path, "cannot open file");
    std::string data{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    if (data.size() >= 2 && data[0] == 'P' && (data[1] == '2' || data[1] == '5'))
        return decode_pgm(data, path);
    static constexpr unsigned char kPngMagic[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    if (data.size() >= 8 && std::memcmp(data.data(), kPngMagic, 8) == 0) return decode_png(data, path);
    unreadable(path, "not a PGM or PNG file");
}

void write_pgm(const GrayImage& image, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(image.pixels.data()),
              static_cast<std::streamsize>(image.pixels.size()));
    if (!out) throw Error(ErrorCode::IoError, "short write to " + path.string());
}

BinSpan bin_span(int i, int bins, int source) {
    const auto s = static_cast<std::int64_t>(source);
    int begin = static_cast<int>(static_cast<std::int64_t>(i) * s / bins);
    int end = static_cast<int>(static_cast<std::int64_t>(i + 1) * s / bins);
    if (end <= begin) end = begin + 1;
    return {begin, end};
}

namespace {

void check_ingest_args(const GrayImage& image, int out_width, int out_height) {
    if (out_width < 1 || out_height < 1)
        throw Error(ErrorCode::DegenerateDims, "output dims must be at least 1x1");
    if (image.width < 1 || image.height < 1 ||
        image.pixels.size() !=
            static_cast<std::size_t>(image.width) * static_cast<std::size_t>(image.height))
        throw Error(ErrorCode::UnreadableImage, "empty or inconsistent image");
}

bool bin_blocked(const GrayImage& image, int threshold, BinSpan xs, BinSpan ys) {
    std::int64_t dark = 0;
    for (int y = ys.begin; y < ys.end; ++y)
        for (int x = xs.begin; x < xs.end; ++x)
            if (image.at(x, y) < threshold) ++dark;
    const std::int64_t total =
        static_cast<std::int64_t>(xs.end - xs.begin) * static_cast<std::int64_t>(ys.end - ys.begin);
    return 2 * dark > total;
}

}  // namespace

BoolGrid ingest_map_image_serial(const GrayImage& image, int threshold, int out_width, int out_height) {
    check_ingest_args(image, out_width, out_height);
    BoolGrid mask(out_width, out_height);
    for (int ty = 0; ty < out_height; ++ty) {
        const BinSpan ys = bin_span(ty, out_height, image.height);
        for (int tx = 0; tx < out_width; ++tx)
            mask.set({tx, ty}, bin_blocked(image, threshold, bin_span(tx, out_width, image.width), ys));
    }
    return mask;
}

BoolGrid ingest_map_image(const GrayImage& image, int threshold, int out_width, int out_height) {
    check_ingest_args(image, out_width, out_height);
    BoolGrid mask(out_width, out_height);
    auto cells = mask.raw();
#pragma omp parallel for schedule(static)
    for (int ty = 0; ty < out_height; ++ty) {
        const BinSpan ys = bin_span(ty, out_height, image.height);
        for (int tx = 0; tx < out_width; ++tx) {
            const bool blocked = bin_blocked(image, threshold, bin_span(tx, out_width, image.width), ys);
            cells[static_cast<std::size_t>(ty) * static_cast<std::size_t>(out_width) +
                  static_cast<std::size_t>(tx)] = blocked ? 1 : 0;
        }
    }
    return mask;
}

}  // namespace qpath
