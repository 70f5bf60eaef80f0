#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace geoforge {

// 8-bit row-major interleaved raster; 1 channel (gray) or 3 (RGB).
struct Image {
    int width = 0, height = 0, channels = 1;
    std::vector<uint8_t> data;

    Image() = default;
    Image(int w, int h, int c, uint8_t fill = 0)
        : width(w), height(h), channels(c), data((size_t)w * h * c, fill) {}

    uint8_t& at(int y, int x, int c = 0) {
        return data[((size_t)y * width + x) * channels + c];
    }
    uint8_t at(int y, int x, int c = 0) const {
        return data[((size_t)y * width + x) * channels + c];
    }
    bool operator==(const Image& o) const {
        return width == o.width && height == o.height && channels == o.channels &&
               data == o.data;
    }
};

// Non-interlaced 8-bit PNG, grayscale or RGB, deterministic bytes.
void write_png(const std::string& path, const Image& img);
Image read_png(const std::string& path);

std::string encode_png(const Image& img);
Image decode_png(const std::string& bytes);

}  // namespace geoforge
