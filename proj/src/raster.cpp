// SPDX-License-Identifier: Apache-2.0
#include "caporch/raster.hpp"

#include <array>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <vector>

#include "caporch/util.hpp"

namespace caporch::raster {

using nlohmann::json;

namespace {

struct NamedColor {
    std::string_view name;
    Rgb rgb;
};

constexpr std::array<NamedColor, 11> kPalette = {{
    {"black", {0, 0, 0}},
    {"white", {255, 255, 255}},
    {"gray", {128, 128, 128}},
    {"red", {220, 30, 30}},
    {"green", {30, 160, 30}},
    {"blue", {30, 60, 220}},
    {"yellow", {240, 220, 30}},
    {"orange", {245, 140, 20}},
    {"purple", {130, 40, 170}},
    {"cyan", {30, 200, 220}},
    {"magenta", {220, 40, 200}},
}};

// 3x5 bitmap glyphs; each row is 3 bits, MSB = left column.
std::array<std::uint8_t, 5> glyph(char c) {
    switch (c) {
        case 'A': return {2, 5, 7, 5, 5};
        case 'B': return {6, 5, 6, 5, 6};
        case 'C': return {3, 4, 4, 4, 3};
        case 'D': return {6, 5, 5, 5, 6};
        case 'E': return {7, 4, 6, 4, 7};
        case 'F': return {7, 4, 6, 4, 4};
        case 'G': return {3, 4, 5, 5, 3};
        case 'H': return {5, 5, 7, 5, 5};
        case 'I': return {7, 2, 2, 2, 7};
        case 'J': return {1, 1, 1, 5, 2};
        case 'K': return {5, 5, 6, 5, 5};
        case 'L': return {4, 4, 4, 4, 7};
        case 'M': return {5, 7, 7, 5, 5};
        case 'N': return {6, 5, 5, 5, 5};
        case 'O': return {2, 5, 5, 5, 2};
        case 'P': return {6, 5, 6, 4, 4};
        case 'Q': return {2, 5, 5, 6, 3};
        case 'R': return {6, 5, 6, 5, 5};
        case 'S': return {3, 4, 2, 1, 6};
        case 'T': return {7, 2, 2, 2, 2};
        case 'U': return {5, 5, 5, 5, 7};
        case 'V': return {5, 5, 5, 5, 2};
        case 'W': return {5, 5, 7, 7, 5};
        case 'X': return {5, 5, 2, 5, 5};
        case 'Y': return {5, 5, 2, 2, 2};
        case 'Z': return {7, 1, 2, 4, 7};
        case '0': return {7, 5, 5, 5, 7};
        case '1': return {2, 6, 2, 2, 7};
        case '2': return {6, 1, 2, 4, 7};
        case '3': return {6, 1, 2, 1, 6};
        case '4': return {5, 5, 7, 1, 1};
        case '5': return {7, 4, 6, 1, 6};
        case '6': return {3, 4, 7, 5, 7};
        case '7': return {7, 1, 2, 2, 2};
        case '8': return {7, 5, 7, 5, 7};
        case '9': return {7, 5, 7, 1, 6};
        case '-': return {0, 0, 7, 0, 0};
        default: return {0, 0, 0, 0, 0};
    }
}

void require_inside(const Image& image, const Rect& r, RasterErrorKind kind) {
    if (r.w <= 0 || r.h <= 0) throw RasterError(RasterErrorKind::InvalidRect, "rect must have w > 0 and h > 0");
    if (r.x < 0 || r.y < 0 || r.x + r.w > image.width() || r.y + r.h > image.height()) {
        throw RasterError(kind, "rect outside image");
    }
}

void stamp(Image& img, int cx, int cy, int width, Rgb color) {
    const int lo = -(width - 1) / 2;
    const int hi = width / 2;
    for (int dy = lo; dy <= hi; ++dy) {
        for (int dx = lo; dx <= hi; ++dx) img.plot(cx + dx, cy + dy, color);
    }
}

void line(Image& img, int x0, int y0, int x1, int y1, int width, Rgb color) {
    const int dx = std::abs(x1 - x0);
    const int dy = -std::abs(y1 - y0);
    const int sx = x0 < x1 ? 1 : -1;
    const int sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    while (true) {
        stamp(img, x0, y0, width, color);
        if (x0 == x1 && y0 == y1) return;
        const int e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            x0 += sx;
        }
        if (e2 <= dx) {
            err += dx;
            y0 += sy;
        }
    }
}

void text(Image& img, int x, int y, std::string_view s, Rgb color) {
    for (char raw : s) {
        const auto rows = glyph(static_cast<char>(std::toupper(static_cast<unsigned char>(raw))));
        for (int r = 0; r < 5; ++r) {
            for (int c = 0; c < 3; ++c) {
                if (rows[static_cast<std::size_t>(r)] & (4 >> c)) img.plot(x + c, y + r, color);
            }
        }
        x += 4;
    }
}

}  // namespace

std::string_view to_string(RasterErrorKind k) {
    switch (k) {
        case RasterErrorKind::InvalidRect: return "InvalidRect";
        case RasterErrorKind::RectOutOfBounds: return "RectOutOfBounds";
        case RasterErrorKind::GeometryOutOfBounds: return "GeometryOutOfBounds";
        case RasterErrorKind::ZeroLengthArrow: return "ZeroLengthArrow";
        case RasterErrorKind::InvalidColor: return "InvalidColor";
    }
    return "?";
}

Rect rect_from_json(const json& v) {
    Rect r;
    auto as_int = [](const json& n) { return static_cast<int>(std::lround(n.get<double>())); };
    if (v.is_array() && v.size() == 4) {
        r = {as_int(v[0]), as_int(v[1]), as_int(v[2]), as_int(v[3])};
    } else if (v.is_object() && v.contains("x") && v.contains("y") && v.contains("w") && v.contains("h")) {
        r = {as_int(v["x"]), as_int(v["y"]), as_int(v["w"]), as_int(v["h"])};
    } else {
        throw RasterError(RasterErrorKind::InvalidRect, "rect must be [x, y, w, h] or {x, y, w, h}");
    }
    if (r.w <= 0 || r.h <= 0) throw RasterError(RasterErrorKind::InvalidRect, "rect must have w > 0 and h > 0");
    return r;
}

std::optional<Rgb> color_by_name(std::string_view name) {
    const auto key = to_lower(name);
    for (const auto& c : kPalette) {
        if (c.name == key) return c.rgb;
    }
    return std::nullopt;
}

Rgb color_from_json(const json& v) {
    if (v.is_string()) {
        if (auto c = color_by_name(v.get<std::string>())) return *c;
        throw RasterError(RasterErrorKind::InvalidColor, "unknown color '" + v.get<std::string>() + "'");
    }
    if (v.is_array() && v.size() == 3) {
        std::array<std::uint8_t, 3> ch{};
        for (std::size_t i = 0; i < 3; ++i) {
            if (!v[i].is_number_integer() || v[i].get<int>() < 0 || v[i].get<int>() > 255) {
                throw RasterError(RasterErrorKind::InvalidColor, "color channels must be 0..255");
            }
            ch[i] = static_cast<std::uint8_t>(v[i].get<int>());
        }
        return {ch[0], ch[1], ch[2]};
    }
    throw RasterError(RasterErrorKind::InvalidColor, "color must be a name or [r, g, b]");
}

std::string_view color_name(Rgb c) {
    std::string_view best;
    long best_d = std::numeric_limits<long>::max();
    for (const auto& p : kPalette) {
        const long dr = long{c.r} - p.rgb.r;
        const long dg = long{c.g} - p.rgb.g;
        const long db = long{c.b} - p.rgb.b;
        const long d = dr * dr + dg * dg + db * db;
        if (d < best_d) {
            best_d = d;
            best = p.name;
        }
    }
    return best;
}

Image crop(const Image& image, const Rect& rect) {
    require_inside(image, rect, RasterErrorKind::RectOutOfBounds);
    Image out(rect.w, rect.h);
    for (int y = 0; y < rect.h; ++y) {
        for (int x = 0; x < rect.w; ++x) out.set(x, y, image.at(rect.x + x, rect.y + y));
    }
    out.metadata() = image.metadata();
    return out;
}

Image annotate(const Image& image, const Annotation& op, const AnnotationStyle& style) {
    Image out = image;
    const int width = std::max(1, style.stroke_width);
    std::visit(
        [&](const auto& a) {
            using T = std::decay_t<decltype(a)>;
            if constexpr (std::is_same_v<T, Highlight>) {
                require_inside(image, a.rect, RasterErrorKind::GeometryOutOfBounds);
                for (int y = a.rect.y; y < a.rect.y + a.rect.h; ++y) {
                    for (int x = a.rect.x; x < a.rect.x + a.rect.w; ++x) {
                        const Rgb p = image.at(x, y);
                        const Rgb blended{static_cast<std::uint8_t>((p.r + style.color.r) / 2),
                                          static_cast<std::uint8_t>((p.g + style.color.g) / 2),
                                          static_cast<std::uint8_t>((p.b + style.color.b) / 2)};
                        // Guarantee a visible change even where the pixel already has the tint.
                        out.set(x, y, blended == p ? Rgb{static_cast<std::uint8_t>(255 - p.r),
                                                         static_cast<std::uint8_t>(255 - p.g),
                                                         static_cast<std::uint8_t>(255 - p.b)}
                                                   : blended);
                    }
                }
            } else if constexpr (std::is_same_v<T, Arrow>) {
                if (a.from == a.to) {
                    throw RasterError(RasterErrorKind::ZeroLengthArrow, "arrow has zero length");
                }
                if (!image.in_bounds(a.from.x, a.from.y) || !image.in_bounds(a.to.x, a.to.y)) {
                    throw RasterError(RasterErrorKind::GeometryOutOfBounds, "arrow endpoint outside image");
                }
                line(out, a.from.x, a.from.y, a.to.x, a.to.y, width, style.color);
                const double dx = a.to.x - a.from.x;
                const double dy = a.to.y - a.from.y;
                const double len = std::hypot(dx, dy);
                const double head = std::min(8.0, len / 2.0);
                for (double angle : {2.6, -2.6}) {
                    const double c = std::cos(angle);
                    const double s = std::sin(angle);
                    const double hx = (dx * c - dy * s) / len * head;
                    const double hy = (dx * s + dy * c) / len * head;
                    line(out, a.to.x, a.to.y, a.to.x + static_cast<int>(std::lround(hx)),
                         a.to.y + static_cast<int>(std::lround(hy)), width, style.color);
                }
            } else {
                require_inside(image, a.rect, RasterErrorKind::GeometryOutOfBounds);
                const int x0 = a.rect.x;
                const int y0 = a.rect.y;
                const int x1 = a.rect.x + a.rect.w - 1;
                const int y1 = a.rect.y + a.rect.h - 1;
                for (int t = 0; t < width; ++t) {
                    for (int x = x0; x <= x1; ++x) {
                        out.plot(x, y0 + t, style.color);
                        out.plot(x, y1 - t, style.color);
                    }
                    for (int y = y0; y <= y1; ++y) {
                        out.plot(x0 + t, y, style.color);
                        out.plot(x1 - t, y, style.color);
                    }
                }
                if (!a.label.empty()) {
                    const int ty = y0 >= 7 ? y0 - 7 : y0 + width + 1;
                    text(out, x0, ty, a.label, style.color);
                }
            }
        },
        op);
    return out;
}

RegionStats region_stats(const Image& image, const std::optional<Rect>& rect) {
    const Rect r = rect.value_or(Rect{0, 0, image.width(), image.height()});
    require_inside(image, r, RasterErrorKind::RectOutOfBounds);
    RegionStats stats;
    stats.width = r.w;
    stats.height = r.h;

    // Background comes from the whole image, so a region filled by one object
    // still reports that object as dominant.
    std::map<Rgb, int> whole;
    for (const Rgb& c : image.pixels()) ++whole[c];
    std::map<Rgb, int> histogram;
    for (int y = r.y; y < r.y + r.h; ++y) {
        for (int x = r.x; x < r.x + r.w; ++x) ++histogram[image.at(x, y)];
    }
    // Ties resolve to the smallest color in Rgb order.
    auto most_frequent = [](const std::map<Rgb, int>& hist, std::optional<Rgb> exclude) {
        std::optional<Rgb> best;
        int best_n = 0;
        for (const auto& [c, n] : hist) {
            if (exclude && c == *exclude) continue;
            if (n > best_n) {
                best = c;
                best_n = n;
            }
        }
        return best;
    };
    stats.background = *most_frequent(whole, std::nullopt);
    stats.dominant = most_frequent(histogram, stats.background);

    std::vector<char> seen(static_cast<std::size_t>(r.w) * static_cast<std::size_t>(r.h), 0);
    auto idx = [&](int x, int y) {
        return static_cast<std::size_t>(y - r.y) * static_cast<std::size_t>(r.w) +
               static_cast<std::size_t>(x - r.x);
    };
    std::vector<std::pair<int, int>> stack;
    for (int y = r.y; y < r.y + r.h; ++y) {
        for (int x = r.x; x < r.x + r.w; ++x) {
            if (seen[idx(x, y)] || image.at(x, y) == stats.background) continue;
            ++stats.blobs;
            std::map<Rgb, int> blob_colors;
            stack.assign(1, {x, y});
            seen[idx(x, y)] = 1;
            while (!stack.empty()) {
                const auto [cx, cy] = stack.back();
                stack.pop_back();
                ++blob_colors[image.at(cx, cy)];
                constexpr std::array<std::pair<int, int>, 4> kSteps = {{{0, -1}, {-1, 0}, {0, 1}, {1, 0}}};
                for (const auto& [sx, sy] : kSteps) {
                    const int nx = cx + sx;
                    const int ny = cy + sy;
                    if (!r.contains(nx, ny) || seen[idx(nx, ny)]) continue;
                    if (image.at(nx, ny) == stats.background) continue;
                    seen[idx(nx, ny)] = 1;
                    stack.emplace_back(nx, ny);
                }
            }
            Rgb main_color = blob_colors.begin()->first;
            int main_n = 0;
            for (const auto& [c, n] : blob_colors) {
                if (n > main_n) {
                    main_color = c;
                    main_n = n;
                }
            }
            ++stats.blobs_by_color[std::string(color_name(main_color))];
        }
    }
    return stats;
}

}  // namespace caporch::raster
