// SPDX-License-Identifier: Apache-2.0
#include "caporch/image.hpp"

#include <png.h>

#include <cstring>

namespace caporch {

Image::Image(int width, int height, Rgb fill)
    : width_(width), height_(height),
      pixels_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill) {}

std::optional<std::string> Image::meta(const std::string& key) const {
    const auto it = metadata_.find(key);
    if (it == metadata_.end()) return std::nullopt;
    return it->second;
}

std::string_view to_string(ImageErrorKind k) {
    switch (k) {
        case ImageErrorKind::DecodeFailed: return "DecodeFailed";
        case ImageErrorKind::EncodeFailed: return "EncodeFailed";
        case ImageErrorKind::NotFound: return "NotFound";
        case ImageErrorKind::Io: return "Io";
    }
    return "?";
}

namespace {

struct ReadCursor {
    std::string_view data;
    std::size_t pos = 0;
};

void png_error_fn(png_structp png, png_const_charp msg) {
    auto* message = static_cast<std::string*>(png_get_error_ptr(png));
    if (message != nullptr) *message = msg;
    png_longjmp(png, 1);
}

void png_warning_fn(png_structp, png_const_charp) {}

void write_fn(png_structp png, png_bytep data, png_size_t length) {
    auto* out = static_cast<std::string*>(png_get_io_ptr(png));
    out->append(reinterpret_cast<const char*>(data), length);
}

void flush_fn(png_structp) {}

void read_fn(png_structp png, png_bytep data, png_size_t length) {
    auto* cur = static_cast<ReadCursor*>(png_get_io_ptr(png));
    if (cur->pos + length > cur->data.size()) png_error(png, "unexpected end of PNG data");
    std::memcpy(data, cur->data.data() + cur->pos, length);
    cur->pos += length;
}

}  // namespace

std::string encode_png(const Image& image) {
    if (image.width() <= 0 || image.height() <= 0) {
        throw ImageError(ImageErrorKind::EncodeFailed, "cannot encode an empty image");
    }
    std::string out;
    std::string message;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &message, png_error_fn,
                                              png_warning_fn);
    png_infop info = png != nullptr ? png_create_info_struct(png) : nullptr;
    if (png == nullptr || info == nullptr) {
        png_destroy_write_struct(&png, &info);
        throw ImageError(ImageErrorKind::EncodeFailed, "libpng initialization failed");
    }
    // Kept outside the setjmp scope so longjmp cannot skip their destructors.
    std::vector<png_text> texts;
    std::vector<png_bytep> rows(static_cast<std::size_t>(image.height()));
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw ImageError(ImageErrorKind::EncodeFailed, "PNG encode failed: " + message);
    }
    png_set_write_fn(png, &out, write_fn, flush_fn);
    png_set_IHDR(png, info, static_cast<png_uint_32>(image.width()),
                 static_cast<png_uint_32>(image.height()), 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_set_compression_level(png, 6);
    for (const auto& [key, value] : image.metadata()) {
        png_text t{};
        t.compression = PNG_TEXT_COMPRESSION_NONE;
        t.key = const_cast<char*>(key.c_str());
        t.text = const_cast<char*>(value.c_str());
        t.text_length = value.size();
        texts.push_back(t);
    }
    if (!texts.empty()) png_set_text(png, info, texts.data(), static_cast<int>(texts.size()));
    png_write_info(png, info);
    auto* base = reinterpret_cast<png_bytep>(const_cast<Rgb*>(image.pixels().data()));
    for (int y = 0; y < image.height(); ++y) {
        rows[static_cast<std::size_t>(y)] =
            base + static_cast<std::size_t>(y) * static_cast<std::size_t>(image.width()) * 3;
    }
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return out;
}

Image decode_png(std::string_view bytes) {
    if (bytes.size() < 8 || png_sig_cmp(reinterpret_cast<png_const_bytep>(bytes.data()), 0, 8)) {
        throw ImageError(ImageErrorKind::DecodeFailed, "not a PNG image");
    }
    std::string message;
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &message, png_error_fn,
                                             png_warning_fn);
    png_infop info = png != nullptr ? png_create_info_struct(png) : nullptr;
    if (png == nullptr || info == nullptr) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw ImageError(ImageErrorKind::DecodeFailed, "libpng initialization failed");
    }
    ReadCursor cursor{bytes, 0};
    Image image;
    std::vector<png_byte> buffer;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw ImageError(ImageErrorKind::DecodeFailed, "PNG decode failed: " + message);
    }
    png_set_read_fn(png, &cursor, read_fn);
    png_read_info(png, info);
    const auto width = png_get_image_width(png, info);
    const auto height = png_get_image_height(png, info);
    const auto color = png_get_color_type(png, info);
    if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) {
        png_set_expand_gray_1_2_4_to_8(png);
        png_set_gray_to_rgb(png);
    }
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);

    const std::size_t stride = png_get_rowbytes(png, info);
    buffer.resize(stride * height);
    rows.resize(height);
    for (png_uint_32 y = 0; y < height; ++y) rows[y] = buffer.data() + y * stride;
    png_read_image(png, rows.data());
    png_read_end(png, info);

    image = Image(static_cast<int>(width), static_cast<int>(height));
    for (png_uint_32 y = 0; y < height; ++y) {
        for (png_uint_32 x = 0; x < width; ++x) {
            const png_bytep p = rows[y] + x * 3;
            image.set(static_cast<int>(x), static_cast<int>(y), Rgb{p[0], p[1], p[2]});
        }
    }
    png_textp texts = nullptr;
    int n_text = 0;
    png_get_text(png, info, &texts, &n_text);
    for (int i = 0; i < n_text; ++i) {
        image.metadata()[texts[i].key] = std::string(texts[i].text, texts[i].text_length);
    }
    png_destroy_read_struct(&png, &info, nullptr);
    return image;
}

}  // namespace caporch
