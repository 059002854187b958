#include "oucd/data/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

#include "oucd/common/error.hpp"

namespace oucd {
namespace {

void write_png(const std::filesystem::path& path, const std::vector<unsigned char>& bytes,
               int height, int width, png_uint_32 format) {
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(width);
    image.height = static_cast<png_uint_32>(height);
    image.format = format;
    if (!png_image_write_to_file(&image, path.c_str(), 0, bytes.data(), 0, nullptr)) {
        const std::string msg = image.message;
        png_image_free(&image);
        throw IoError(path.string() + ": cannot write PNG (" + msg + ")");
    }
}

} // namespace

unsigned char quantize(float v) noexcept {
    const float c = std::clamp(v, 0.0F, 1.0F);
    return static_cast<unsigned char>(std::lround(c * 255.0F));
}

Tensor<float> load_image(const std::filesystem::path& path) {
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.c_str())) {
        throw IoError(path.string() + ": cannot read PNG (" + image.message + ")");
    }
    if ((image.format & PNG_FORMAT_FLAG_COLOR) == 0 || (image.format & PNG_FORMAT_FLAG_ALPHA) != 0) {
        png_image_free(&image);
        throw IoError(path.string() + ": not an RGB image");
    }
    image.format = PNG_FORMAT_RGB;
    const int h = static_cast<int>(image.height);
    const int w = static_cast<int>(image.width);
    std::vector<unsigned char> bytes(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, bytes.data(), 0, nullptr)) {
        const std::string msg = image.message;
        png_image_free(&image);
        throw IoError(path.string() + ": corrupt PNG (" + msg + ")");
    }
    Tensor<float> out(Shape{1, 3, h, w});
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t p = (static_cast<std::size_t>(y) * w + x) * 3;
            for (int c = 0; c < 3; ++c) {
                out.at(0, c, y, x) = static_cast<float>(bytes[p + c]) / 255.0F;
            }
        }
    }
    return out;
}

void save_image(const Tensor<float>& image, const std::filesystem::path& path) {
    const Shape& s = image.shape();
    if (s.c != 3) {
        throw ContractError("save_image expects 3 channels, got " + s.str());
    }
    std::vector<unsigned char> bytes(static_cast<std::size_t>(s.h) * s.w * 3);
    for (int y = 0; y < s.h; ++y) {
        for (int x = 0; x < s.w; ++x) {
            const std::size_t p = (static_cast<std::size_t>(y) * s.w + x) * 3;
            for (int c = 0; c < 3; ++c) {
                bytes[p + c] = quantize(image.at(0, c, y, x));
            }
        }
    }
    write_png(path, bytes, s.h, s.w, PNG_FORMAT_RGB);
}

void save_gray(std::span<const float> plane, int height, int width,
               const std::filesystem::path& path) {
    if (plane.size() != static_cast<std::size_t>(height) * width) {
        throw ContractError("save_gray: plane size does not match " + std::to_string(height) +
                            "x" + std::to_string(width));
    }
    std::vector<unsigned char> bytes(plane.size());
    std::transform(plane.begin(), plane.end(), bytes.begin(), quantize);
    write_png(path, bytes, height, width, PNG_FORMAT_GRAY);
}

} // namespace oucd
