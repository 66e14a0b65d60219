#include "msr/train/png.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

namespace msr::train {

void write_png(const std::filesystem::path& path, const fourier::Image& image) {
    if (image.height == 0 || image.width == 0) throw ShapeError("write_png: empty image");
    std::vector<png_byte> pixels(image.size());
    for (std::size_t i = 0; i < image.size(); ++i) {
        const double v = std::isfinite(image.data[i]) ? std::clamp(image.data[i], 0.0, 1.0) : 0.0;
        pixels[i] = static_cast<png_byte>(std::lround(v * 255.0));
    }

    std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.c_str(), "wb"), &std::fclose);
    if (!fp) throw IoError("cannot open " + path.string() + " for writing");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw IoError("libpng initialisation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("failed writing " + path.string());
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(image.width),
                 static_cast<png_uint_32>(image.height), 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (std::size_t r = 0; r < image.height; ++r) png_write_row(png, pixels.data() + r * image.width);
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace msr::train
