// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "caporch/error.hpp"

namespace caporch {

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    auto operator<=>(const Rgb&) const = default;
};

static_assert(sizeof(Rgb) == 3, "Rgb must be tightly packed for PNG row access");

// 8-bit RGB raster plus a string metadata side channel (PNG tEXt chunks).
class Image {
public:
    Image() = default;
    Image(int width, int height, Rgb fill = {255, 255, 255});

    int width() const { return width_; }
    int height() const { return height_; }
    bool in_bounds(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

    Rgb at(int x, int y) const { return pixels_[index(x, y)]; }
    void set(int x, int y, Rgb c) { pixels_[index(x, y)] = c; }
    // No-op outside the raster.
    void plot(int x, int y, Rgb c) {
        if (in_bounds(x, y)) set(x, y, c);
    }

    const std::vector<Rgb>& pixels() const { return pixels_; }

    std::map<std::string, std::string>& metadata() { return metadata_; }
    const std::map<std::string, std::string>& metadata() const { return metadata_; }
    std::optional<std::string> meta(const std::string& key) const;

    bool operator==(const Image&) const = default;

private:
    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<Rgb> pixels_;
    std::map<std::string, std::string> metadata_;
};

enum class ImageErrorKind { DecodeFailed, EncodeFailed, NotFound, Io };
std::string_view to_string(ImageErrorKind k);
using ImageError = KindedError<ImageErrorKind>;

// Lossless PNG; metadata written as tEXt chunks in key order. Byte-stable.
std::string encode_png(const Image& image);
Image decode_png(std::string_view bytes);

struct ImageRef {
    std::string id;
    int width = 0;
    int height = 0;

    bool operator==(const ImageRef&) const = default;
};

// Content-addressed, append-only image store. Safe for concurrent use.
class ImageStore {
public:
    ImageStore() = default;
    // Every stored image is also written to `dir/<id>.png`.
    explicit ImageStore(std::filesystem::path persist_dir);

    ImageRef put(const Image& image);
    // Stores the encoded bytes as-is (format-preserving); id is their hash.
    ImageRef put_encoded(std::string bytes);
    ImageRef put_file(const std::filesystem::path& path);

    bool contains(std::string_view id) const;
    std::shared_ptr<const Image> get(std::string_view id) const;  // throws NotFound
    std::string bytes(std::string_view id) const;                 // throws NotFound
    std::optional<ImageRef> ref(std::string_view id) const;
    std::size_t size() const;

    // Loads every <id>.png under `dir`.
    void load_dir(const std::filesystem::path& dir);

    static std::string id_for(std::string_view encoded);

private:
    struct Entry {
        std::string bytes;
        std::shared_ptr<const Image> image;
    };

    mutable std::shared_mutex mutex_;
    std::map<std::string, Entry, std::less<>> entries_;
    std::optional<std::filesystem::path> persist_dir_;
};

}  // namespace caporch
