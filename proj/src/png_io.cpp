#include "blurforge/png_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <memory>

namespace blurforge {

namespace {

struct FileCloser {
    void operator()(FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

struct PngReader {
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngReader() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    }
};

struct PngWriter {
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngWriter() {
        if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    }
};

// Reads any PNG into an 8- or 16-bit buffer with the requested channel count.
void read_png(const std::string& path, int want_channels, int want_depth,
              int& height, int& width, std::vector<std::uint8_t>& out) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw InputError("cannot open PNG for reading: " + path);

    PngReader r;
    r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!r.png) throw InputError("libpng init failed");
    r.info = png_create_info_struct(r.png);
    if (!r.info) throw InputError("libpng info init failed");
    if (setjmp(png_jmpbuf(r.png))) throw InputError("corrupt PNG: " + path);

    png_init_io(r.png, fp.get());
    png_read_info(r.png, r.info);

    const int bit_depth = png_get_bit_depth(r.png, r.info);
    const int color_type = png_get_color_type(r.png, r.info);

    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(r.png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(r.png);
    if (png_get_valid(r.png, r.info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(r.png);
    png_set_strip_alpha(r.png);
    if (want_channels == 3 && (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA))
        png_set_gray_to_rgb(r.png);
    if (want_channels == 1 && (color_type == PNG_COLOR_TYPE_RGB || color_type == PNG_COLOR_TYPE_RGB_ALPHA ||
                               color_type == PNG_COLOR_TYPE_PALETTE))
        png_set_rgb_to_gray_fixed(r.png, 1, -1, -1);
    if (want_depth == 8 && bit_depth == 16) png_set_strip_16(r.png);
    if (want_depth == 16 && bit_depth < 16) throw InputError("expected 16-bit PNG: " + path);

    png_read_update_info(r.png, r.info);

    width = static_cast<int>(png_get_image_width(r.png, r.info));
    height = static_cast<int>(png_get_image_height(r.png, r.info));
    const std::size_t rowbytes = png_get_rowbytes(r.png, r.info);
    const std::size_t expect = static_cast<std::size_t>(width) * want_channels * (want_depth / 8);
    if (rowbytes != expect) throw InputError("unexpected PNG layout: " + path);

    out.resize(rowbytes * height);
    std::vector<png_bytep> rows(height);
    for (int y = 0; y < height; ++y) rows[y] = out.data() + static_cast<std::size_t>(y) * rowbytes;
    png_read_image(r.png, rows.data());
    png_read_end(r.png, nullptr);
}

void write_png(const std::string& path, int height, int width, int channels, int depth,
               const std::uint8_t* data) {
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw InputError("cannot open PNG for writing: " + path);

    PngWriter w;
    w.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!w.png) throw InputError("libpng init failed");
    w.info = png_create_info_struct(w.png);
    if (!w.info) throw InputError("libpng info init failed");
    if (setjmp(png_jmpbuf(w.png))) throw InputError("PNG write failed: " + path);

    png_init_io(w.png, fp.get());
    const int color = channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY;
    png_set_IHDR(w.png, w.info, width, height, depth, color, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(w.png, w.info);

    const std::size_t rowbytes = static_cast<std::size_t>(width) * channels * (depth / 8);
    std::vector<png_bytep> rows(height);
    for (int y = 0; y < height; ++y)
        rows[y] = const_cast<png_bytep>(data + static_cast<std::size_t>(y) * rowbytes);
    png_write_image(w.png, rows.data());
    png_write_end(w.png, nullptr);
}

}  // namespace

Image8 read_png_rgb8(const std::string& path) {
    int h = 0, wpx = 0;
    std::vector<std::uint8_t> buf;
    read_png(path, 3, 8, h, wpx, buf);
    Image8 img(h, wpx);
    std::copy(buf.begin(), buf.end(), img.data());
    return img;
}

void write_png_rgb8(const std::string& path, const Image8& img) {
    write_png(path, img.height(), img.width(), 3, 8, img.data());
}

Gray16Image read_png_gray16(const std::string& path) {
    int h = 0, wpx = 0;
    std::vector<std::uint8_t> buf;
    read_png(path, 1, 16, h, wpx, buf);
    Gray16Image img;
    img.height = h;
    img.width = wpx;
    img.data.resize(static_cast<std::size_t>(h) * wpx);
    // PNG stores 16-bit samples big-endian.
    for (std::size_t i = 0; i < img.data.size(); ++i)
        img.data[i] = static_cast<std::uint16_t>((buf[2 * i] << 8) | buf[2 * i + 1]);
    return img;
}

void write_png_gray16(const std::string& path, const Gray16Image& img) {
    std::vector<std::uint8_t> buf(img.data.size() * 2);
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        buf[2 * i] = static_cast<std::uint8_t>(img.data[i] >> 8);
        buf[2 * i + 1] = static_cast<std::uint8_t>(img.data[i] & 0xff);
    }
    write_png(path, img.height, img.width, 1, 16, buf.data());
}

Gray8Image read_png_gray8(const std::string& path) {
    int h = 0, wpx = 0;
    std::vector<std::uint8_t> buf;
    read_png(path, 1, 8, h, wpx, buf);
    return Gray8Image{h, wpx, std::move(buf)};
}

void write_png_gray8(const std::string& path, const Gray8Image& img) {
    write_png(path, img.height, img.width, 1, 8, img.data.data());
}

DepthFrame read_depth_frame(const std::string& depth_path, const std::string& confidence_path) {
    const Gray16Image mm = read_png_gray16(depth_path);
    const Gray8Image conf = read_png_gray8(confidence_path);
    if (mm.height != conf.height || mm.width != conf.width)
        throw InputError("depth/confidence dimensions differ: " + depth_path);
    DepthFrame f(mm.height, mm.width);
    for (std::size_t i = 0; i < f.pixel_count(); ++i) {
        f.depth[i] = static_cast<float>(mm.data[i]) / 1000.0f;
        f.confidence[i] = static_cast<float>(conf.data[i]) / 255.0f;
    }
    return f;
}

void write_depth_frame(const std::string& depth_path, const std::string& confidence_path,
                       const DepthFrame& frame) {
    Gray16Image mm;
    mm.height = frame.height;
    mm.width = frame.width;
    mm.data.resize(frame.pixel_count());
    Gray8Image conf;
    conf.height = frame.height;
    conf.width = frame.width;
    conf.data.resize(frame.pixel_count());
    for (std::size_t i = 0; i < frame.pixel_count(); ++i) {
        const double mmval = std::lround(static_cast<double>(frame.depth[i]) * 1000.0);
        mm.data[i] = static_cast<std::uint16_t>(std::min(65535.0, std::max(0.0, mmval)));
        conf.data[i] = static_cast<std::uint8_t>(
            std::lround(std::min(1.0f, std::max(0.0f, frame.confidence[i])) * 255.0f));
    }
    write_png_gray16(depth_path, mm);
    write_png_gray8(confidence_path, conf);
}

}  // namespace blurforge
