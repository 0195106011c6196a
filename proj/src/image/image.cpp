// Copyright 2026 The eqdisc Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "eqdisc/image.hpp"

#include <jpeglib.h>
#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>

namespace eqdisc {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

std::uint8_t luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    const double y = 0.299 * r + 0.587 * g + 0.114 * b;
    return static_cast<std::uint8_t>(std::min(255.0, y + 0.5));
}

// ---- PNG ----

ByteImage read_png(const std::filesystem::path& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw IoError("cannot open " + path.string());

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("libpng init failed for " + path.string());
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("failed to decode PNG " + path.string());
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);

    png_set_strip_16(png);
    png_set_palette_to_rgb(png);
    png_set_expand_gray_1_2_4_to_8(png);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);

    const int w = static_cast<int>(png_get_image_width(png, info));
    const int h = static_cast<int>(png_get_image_height(png, info));
    const int channels = png_get_channels(png, info);

    std::vector<std::uint8_t> row(std::size_t(w) * channels);
    ByteImage out(w, h);
    for (int y = 0; y < h; ++y) {
        png_read_row(png, row.data(), nullptr);
        if (channels == 1) {
            std::memcpy(&out.pix[std::size_t(y) * w], row.data(), w);
        } else {
            for (int x = 0; x < w; ++x)
                out.at(x, y) = luma(row[x * channels], row[x * channels + 1], row[x * channels + 2]);
        }
    }
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return out;
}

void write_png(const std::filesystem::path& path, int w, int h, int channels,
               const std::uint8_t* data) {
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw IoError("cannot write " + path.string());

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw IoError("libpng init failed for " + path.string());
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("failed to encode PNG " + path.string());
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, w, h, 8,
                 channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < h; ++y)
        png_write_row(png, const_cast<png_bytep>(data + std::size_t(y) * w * channels));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

// ---- JPEG ----

struct JpegErr {
    jpeg_error_mgr mgr;
    std::jmp_buf jump;
};

void jpeg_error_exit(j_common_ptr cinfo) {
    std::longjmp(reinterpret_cast<JpegErr*>(cinfo->err)->jump, 1);
}

ByteImage read_jpeg(const std::filesystem::path& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw IoError("cannot open " + path.string());

    jpeg_decompress_struct cinfo;
    JpegErr err;
    cinfo.err = jpeg_std_error(&err.mgr);
    err.mgr.error_exit = jpeg_error_exit;
    if (setjmp(err.jump)) {
        jpeg_destroy_decompress(&cinfo);
        throw IoError("failed to decode JPEG " + path.string());
    }
    jpeg_create_decompress(&cinfo);
    jpeg_stdio_src(&cinfo, fp.get());
    jpeg_read_header(&cinfo, TRUE);
    jpeg_start_decompress(&cinfo);

    const int w = static_cast<int>(cinfo.output_width);
    const int h = static_cast<int>(cinfo.output_height);
    const int channels = cinfo.output_components;

    std::vector<std::uint8_t> row(std::size_t(w) * channels);
    ByteImage out(w, h);
    for (int y = 0; y < h; ++y) {
        std::uint8_t* rp = row.data();
        jpeg_read_scanlines(&cinfo, &rp, 1);
        if (channels == 1) {
            std::memcpy(&out.pix[std::size_t(y) * w], row.data(), w);
        } else {
            for (int x = 0; x < w; ++x)
                out.at(x, y) = luma(row[x * channels], row[x * channels + 1], row[x * channels + 2]);
        }
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return out;
}

void write_jpeg(const std::filesystem::path& path, const ByteImage& img, int quality) {
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw IoError("cannot write " + path.string());

    jpeg_compress_struct cinfo;
    JpegErr err;
    cinfo.err = jpeg_std_error(&err.mgr);
    err.mgr.error_exit = jpeg_error_exit;
    if (setjmp(err.jump)) {
        jpeg_destroy_compress(&cinfo);
        throw IoError("failed to encode JPEG " + path.string());
    }
    jpeg_create_compress(&cinfo);
    jpeg_stdio_dest(&cinfo, fp.get());
    cinfo.image_width = img.width;
    cinfo.image_height = img.height;
    cinfo.input_components = 1;
    cinfo.in_color_space = JCS_GRAYSCALE;
    jpeg_set_defaults(&cinfo);
    jpeg_set_quality(&cinfo, quality, TRUE);
    jpeg_start_compress(&cinfo, TRUE);
    std::vector<std::uint8_t> row(img.width);
    for (int y = 0; y < img.height; ++y) {
        std::memcpy(row.data(), &img.pix[std::size_t(y) * img.width], img.width);
        std::uint8_t* rp = row.data();
        jpeg_write_scanlines(&cinfo, &rp, 1);
    }
    jpeg_finish_compress(&cinfo);
    jpeg_destroy_compress(&cinfo);
}

// ---- PGM / PPM (binary variants) ----

int read_pnm_int(std::istream& in) {
    int c = in.get();
    while (c == '#' || std::isspace(c)) {
        if (c == '#') {
            while (c != '\n' && c != EOF) c = in.get();
        }
        c = in.get();
    }
    int v = 0;
    while (std::isdigit(c)) {
        v = v * 10 + (c - '0');
        c = in.get();
    }
    return v;
}

ByteImage read_pnm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    char m0 = 0, m1 = 0;
    in.get(m0);
    in.get(m1);
    if (m0 != 'P' || (m1 != '5' && m1 != '6')) throw IoError("unsupported PNM type in " + path.string());
    const int channels = m1 == '5' ? 1 : 3;
    const int w = read_pnm_int(in);
    const int h = read_pnm_int(in);
    const int maxval = read_pnm_int(in);
    if (w <= 0 || h <= 0 || maxval != 255) throw IoError("unsupported PNM header in " + path.string());
    std::vector<std::uint8_t> row(std::size_t(w) * channels);
    ByteImage out(w, h);
    for (int y = 0; y < h; ++y) {
        in.read(reinterpret_cast<char*>(row.data()), row.size());
        if (!in) throw IoError("truncated PNM " + path.string());
        if (channels == 1) {
            std::memcpy(&out.pix[std::size_t(y) * w], row.data(), w);
        } else {
            for (int x = 0; x < w; ++x) out.at(x, y) = luma(row[x * 3], row[x * 3 + 1], row[x * 3 + 2]);
        }
    }
    return out;
}

}  // namespace

ByteImage read_image_gray8(const std::filesystem::path& path) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw IoError("cannot open " + path.string());
    unsigned char magic[2] = {0, 0};
    probe.read(reinterpret_cast<char*>(magic), 2);
    probe.close();
    if (magic[0] == 0x89 && magic[1] == 'P') return read_png(path);
    if (magic[0] == 0xff && magic[1] == 0xd8) return read_jpeg(path);
    if (magic[0] == 'P' && (magic[1] == '5' || magic[1] == '6')) return read_pnm(path);
    throw IoError("unrecognized image format: " + path.string());
}

void write_png_gray8(const std::filesystem::path& path, const ByteImage& img) {
    write_png(path, img.width, img.height, 1, img.pix.data());
}

void write_png_rgb8(const std::filesystem::path& path, const RgbImage& img) {
    write_png(path, img.width, img.height, 3, img.pix.data());
}

void write_jpeg_gray8(const std::filesystem::path& path, const ByteImage& img, int quality) {
    write_jpeg(path, img, quality);
}

void write_pgm(const std::filesystem::path& path, const ByteImage& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pix.data()), img.pix.size());
}

GrayImage downscale_area(const GrayImage& src, int new_w, int new_h) {
    if (new_w == src.width && new_h == src.height) return src;
    GrayImage out(new_w, new_h);
    const double sx = double(src.width) / new_w;
    const double sy = double(src.height) / new_h;
    for (int oy = 0; oy < new_h; ++oy) {
        const double y0 = oy * sy, y1 = (oy + 1) * sy;
        for (int ox = 0; ox < new_w; ++ox) {
            const double x0 = ox * sx, x1 = (ox + 1) * sx;
            double acc = 0.0, area = 0.0;
            for (int iy = int(std::floor(y0)); iy < int(std::ceil(y1)); ++iy) {
                const double cy = std::min(y1, double(iy + 1)) - std::max(y0, double(iy));
                if (cy <= 0) continue;
                for (int ix = int(std::floor(x0)); ix < int(std::ceil(x1)); ++ix) {
                    const double cx = std::min(x1, double(ix + 1)) - std::max(x0, double(ix));
                    if (cx <= 0) continue;
                    acc += cx * cy * src.at(std::min(ix, src.width - 1), std::min(iy, src.height - 1));
                    area += cx * cy;
                }
            }
            out.at(ox, oy) = area > 0 ? acc / area : 0.0;
        }
    }
    return out;
}

ByteImage downscale_nearest(const ByteImage& src, int new_w, int new_h) {
    if (new_w == src.width && new_h == src.height) return src;
    ByteImage out(new_w, new_h);
    for (int oy = 0; oy < new_h; ++oy) {
        const int iy = std::min(src.height - 1, int((oy + 0.5) * src.height / new_h));
        for (int ox = 0; ox < new_w; ++ox) {
            const int ix = std::min(src.width - 1, int((ox + 0.5) * src.width / new_w));
            out.at(ox, oy) = src.at(ix, iy);
        }
    }
    return out;
}

}  // namespace eqdisc
