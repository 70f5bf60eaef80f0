#include "geoforge/png_io.hpp"

#include <cstdlib>
#include <cstring>

#include <zlib.h>

#include "geoforge/common.hpp"

namespace geoforge {

namespace {

const uint8_t kSignature[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};

void put_u32be(std::string& s, uint32_t v) {
    s.push_back((char)(v >> 24));
    s.push_back((char)(v >> 16));
    s.push_back((char)(v >> 8));
    s.push_back((char)v);
}

uint32_t get_u32be(const uint8_t* p) {
    return ((uint32_t)p[0] << 24) | ((uint32_t)p[1] << 16) | ((uint32_t)p[2] << 8) | p[3];
}

void append_chunk(std::string& out, const char type[4], const std::string& data) {
    put_u32be(out, (uint32_t)data.size());
    std::string body(type, 4);
    body += data;
    out += body;
    uint32_t crc = (uint32_t)crc32(0L, (const Bytef*)body.data(), (uInt)body.size());
    put_u32be(out, crc);
}

int paeth(int a, int b, int c) {
    int p = a + b - c;
    int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
    if (pa <= pb && pa <= pc) return a;
    if (pb <= pc) return b;
    return c;
}

}  // namespace

std::string encode_png(const Image& img) {
    if (img.width <= 0 || img.height <= 0 || (img.channels != 1 && img.channels != 3))
        throw DataError("png encode: image must be WxH with 1 or 3 channels");
    if (img.data.size() != (size_t)img.width * img.height * img.channels)
        throw DataError("png encode: data size does not match dimensions");

    const size_t stride = (size_t)img.width * img.channels;
    std::string raw;
    raw.reserve(img.height * (stride + 1));
    for (int y = 0; y < img.height; ++y) {
        raw.push_back('\0');  // filter type 0 per scanline
        raw.append((const char*)&img.data[y * stride], stride);
    }

    uLongf bound = compressBound((uLong)raw.size());
    std::vector<Bytef> comp(bound);
    if (compress2(comp.data(), &bound, (const Bytef*)raw.data(), (uLong)raw.size(), 6) != Z_OK)
        throw NumericError("png encode: deflate failed");

    std::string out((const char*)kSignature, 8);
    std::string ihdr;
    put_u32be(ihdr, (uint32_t)img.width);
    put_u32be(ihdr, (uint32_t)img.height);
    ihdr.push_back(8);                                // bit depth
    ihdr.push_back(img.channels == 1 ? 0 : 2);        // gray / truecolor
    ihdr.push_back(0);                                // deflate
    ihdr.push_back(0);                                // adaptive filtering
    ihdr.push_back(0);                                // no interlace
    append_chunk(out, "IHDR", ihdr);
    append_chunk(out, "IDAT", std::string((const char*)comp.data(), bound));
    append_chunk(out, "IEND", "");
    return out;
}

Image decode_png(const std::string& bytes) {
    const uint8_t* p = (const uint8_t*)bytes.data();
    const size_t n = bytes.size();
    if (n < 8 || std::memcmp(p, kSignature, 8) != 0)
        throw DataError("png decode: bad signature");

    int width = 0, height = 0, channels = 0;
    std::string idat;
    size_t off = 8;
    bool saw_ihdr = false, saw_iend = false;
    while (off + 12 <= n && !saw_iend) {
        uint32_t len = get_u32be(p + off);
        if (off + 12 + len > n) throw DataError("png decode: truncated chunk");
        std::string type((const char*)p + off + 4, 4);
        const uint8_t* data = p + off + 8;
        uint32_t stored_crc = get_u32be(p + off + 8 + len);
        uint32_t crc = (uint32_t)crc32(0L, p + off + 4, 4 + len);
        if (crc != stored_crc) throw DataError("png decode: chunk crc mismatch");
        if (type == "IHDR") {
            if (len != 13) throw DataError("png decode: bad IHDR length");
            width = (int)get_u32be(data);
            height = (int)get_u32be(data + 4);
            int depth = data[8], color = data[9], interlace = data[12];
            if (depth != 8) throw DataError("png decode: only 8-bit supported");
            if (interlace != 0) throw DataError("png decode: interlaced not supported");
            if (color == 0) channels = 1;
            else if (color == 2) channels = 3;
            else throw DataError("png decode: only gray/RGB supported");
            saw_ihdr = true;
        } else if (type == "IDAT") {
            idat.append((const char*)data, len);
        } else if (type == "IEND") {
            saw_iend = true;
        }
        // ancillary chunks skipped
        off += 12 + len;
    }
    if (!saw_ihdr || width <= 0 || height <= 0)
        throw DataError("png decode: missing IHDR");
    if (idat.empty()) throw DataError("png decode: missing IDAT");

    const size_t stride = (size_t)width * channels;
    const size_t raw_size = (size_t)height * (stride + 1);
    std::vector<uint8_t> raw(raw_size);
    uLongf got = (uLongf)raw_size;
    int zret = uncompress(raw.data(), &got, (const Bytef*)idat.data(), (uLong)idat.size());
    if (zret != Z_OK || got != raw_size)
        throw DataError("png decode: inflate failed");

    Image img(width, height, channels);
    const int bpp = channels;  // bytes per pixel at depth 8
    std::vector<uint8_t> prev(stride, 0);
    for (int y = 0; y < height; ++y) {
        uint8_t filter = raw[y * (stride + 1)];
        uint8_t* cur = &img.data[y * stride];
        const uint8_t* src = &raw[y * (stride + 1) + 1];
        for (size_t i = 0; i < stride; ++i) {
            int a = i >= (size_t)bpp ? cur[i - bpp] : 0;
            int b = prev[i];
            int c = i >= (size_t)bpp ? prev[i - bpp] : 0;
            int x = src[i];
            switch (filter) {
                case 0: cur[i] = (uint8_t)x; break;
                case 1: cur[i] = (uint8_t)(x + a); break;
                case 2: cur[i] = (uint8_t)(x + b); break;
                case 3: cur[i] = (uint8_t)(x + (a + b) / 2); break;
                case 4: cur[i] = (uint8_t)(x + paeth(a, b, c)); break;
                default: throw DataError("png decode: unknown filter type");
            }
        }
        std::memcpy(prev.data(), cur, stride);
    }
    return img;
}

void write_png(const std::string& path, const Image& img) {
    write_text_file(path, encode_png(img));
}

Image read_png(const std::string& path) {
    return decode_png(read_text_file(path));
}

}  // namespace geoforge
