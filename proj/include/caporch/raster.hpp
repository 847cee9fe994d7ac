// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include <json.hpp>

#include "caporch/error.hpp"
#include "caporch/image.hpp"

namespace caporch::raster {

struct Rect {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;

    bool operator==(const Rect&) const = default;
    bool contains(int px, int py) const { return px >= x && py >= y && px < x + w && py < y + h; }
};

struct PixelPoint {
    int x = 0;
    int y = 0;
    bool operator==(const PixelPoint&) const = default;
};

struct AnnotationStyle {
    Rgb color{255, 0, 0};
    int stroke_width = 2;
};

struct Highlight {
    Rect rect;
};
struct Arrow {
    PixelPoint from;
    PixelPoint to;
};
struct Bbox {
    Rect rect;
    std::string label;
};
using Annotation = std::variant<Highlight, Arrow, Bbox>;

enum class RasterErrorKind {
    InvalidRect,
    RectOutOfBounds,
    GeometryOutOfBounds,
    ZeroLengthArrow,
    InvalidColor,
};
std::string_view to_string(RasterErrorKind k);
using RasterError = KindedError<RasterErrorKind>;

// Accepts {"x","y","w","h"} or [x, y, w, h]. Throws InvalidRect when w or h <= 0.
Rect rect_from_json(const nlohmann::json& v);
// Accepts a color name or [r, g, b].
Rgb color_from_json(const nlohmann::json& v);
std::optional<Rgb> color_by_name(std::string_view name);
// Nearest named palette color.
std::string_view color_name(Rgb c);

// Region must lie fully inside the image. Throws RectOutOfBounds.
Image crop(const Image& image, const Rect& rect);

// Returns a new image; the input is never modified. Throws GeometryOutOfBounds
// or ZeroLengthArrow. Rasterized without anti-aliasing.
Image annotate(const Image& image, const Annotation& op, const AnnotationStyle& style);

struct RegionStats {
    int width = 0;
    int height = 0;
    Rgb background;  // most frequent color of the whole image
    // Most frequent non-background color, if any.
    std::optional<Rgb> dominant;
    // 4-connected components of non-background pixels.
    int blobs = 0;
    std::map<std::string, int> blobs_by_color;
};

RegionStats region_stats(const Image& image, const std::optional<Rect>& rect = std::nullopt);

}  // namespace caporch::raster
