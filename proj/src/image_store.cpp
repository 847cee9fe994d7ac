// SPDX-License-Identifier: Apache-2.0
#include "caporch/image.hpp"

#include <fstream>
#include <iterator>
#include <mutex>

#include "caporch/util.hpp"

namespace caporch {

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ImageError(ImageErrorKind::Io, "cannot read " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

ImageStore::ImageStore(std::filesystem::path persist_dir) : persist_dir_(std::move(persist_dir)) {
    std::filesystem::create_directories(*persist_dir_);
}

std::string ImageStore::id_for(std::string_view encoded) {
    return "img-" + sha256_hex(encoded).substr(0, 16);
}

ImageRef ImageStore::put(const Image& image) { return put_encoded(encode_png(image)); }

ImageRef ImageStore::put_encoded(std::string bytes) {
    auto image = std::make_shared<const Image>(decode_png(bytes));
    const auto id = id_for(bytes);
    ImageRef ref{id, image->width(), image->height()};
    std::unique_lock lock(mutex_);
    if (entries_.contains(id)) return ref;
    if (persist_dir_) {
        std::ofstream out(*persist_dir_ / (id + ".png"), std::ios::binary);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw ImageError(ImageErrorKind::Io, "cannot persist image " + id);
    }
    entries_.emplace(id, Entry{std::move(bytes), std::move(image)});
    return ref;
}

ImageRef ImageStore::put_file(const std::filesystem::path& path) {
    return put_encoded(read_file(path));
}

bool ImageStore::contains(std::string_view id) const {
    std::shared_lock lock(mutex_);
    return entries_.find(id) != entries_.end();
}

std::shared_ptr<const Image> ImageStore::get(std::string_view id) const {
    std::shared_lock lock(mutex_);
    const auto it = entries_.find(id);
    if (it == entries_.end()) {
        throw ImageError(ImageErrorKind::NotFound, "unknown image id '" + std::string(id) + "'");
    }
    return it->second.image;
}

std::string ImageStore::bytes(std::string_view id) const {
    std::shared_lock lock(mutex_);
    const auto it = entries_.find(id);
    if (it == entries_.end()) {
        throw ImageError(ImageErrorKind::NotFound, "unknown image id '" + std::string(id) + "'");
    }
    return it->second.bytes;
}

std::optional<ImageRef> ImageStore::ref(std::string_view id) const {
    std::shared_lock lock(mutex_);
    const auto it = entries_.find(id);
    if (it == entries_.end()) return std::nullopt;
    return ImageRef{it->first, it->second.image->width(), it->second.image->height()};
}

std::size_t ImageStore::size() const {
    std::shared_lock lock(mutex_);
    return entries_.size();
}

void ImageStore::load_dir(const std::filesystem::path& dir) {
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() == ".png") put_file(entry.path());
    }
}

}  // namespace caporch
