// SPDX-License-Identifier: Apache-2.0
#include "caporch/builtin_tools.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

#include "caporch/expression.hpp"
#include "caporch/geometry.hpp"
#include "caporch/maze.hpp"
#include "caporch/raster.hpp"
#include "caporch/util.hpp"

namespace caporch {

using nlohmann::json;

namespace {

using geometry::Point;

class Lines {
public:
    Lines& add(std::string_view key, std::string_view value) {
        if (!text_.empty()) text_ += '\n';
        text_.append(key).append(": ").append(value);
        return *this;
    }
    Lines& add(std::string_view key, double value) { return add(key, format_number(value)); }
    Lines& add(std::string_view key, int value) { return add(key, std::to_string(value)); }
    const std::string& str() const { return text_; }

private:
    std::string text_;
};

std::shared_ptr<const Image> single_image(std::span<const std::string> ids, const ImageStore& store,
                                          std::string_view tool) {
    if (ids.size() != 1) {
        throw std::invalid_argument(std::string(tool) + " expects exactly one image, got " + std::to_string(ids.size()));
    }
    return store.get(ids.front());
}

Point to_point(const json& v) { return {v.at(0).get<double>(), v.at(1).get<double>()}; }

std::string point_text(Point p) { return "[" + format_number(p.x) + ", " + format_number(p.y) + "]"; }

std::string cell_text(maze::Cell c) { return "[" + std::to_string(c.row) + ", " + std::to_string(c.col) + "]"; }

std::string size_text(int w, int h) { return std::to_string(w) + "x" + std::to_string(h); }

void add_region(Lines& lines, const raster::RegionStats& stats, std::string_view prefix) {
    const std::string p(prefix);
    lines.add(p + "background", raster::color_name(stats.background));
    lines.add(p + "dominant_color", stats.dominant ? raster::color_name(*stats.dominant) : "none");
    lines.add(p + "blobs", stats.blobs);
    std::string by_color;
    for (const auto& [name, n] : stats.blobs_by_color) {
        if (!by_color.empty()) by_color += ", ";
        by_color += name + "=" + std::to_string(n);
    }
    lines.add(p + "blobs_by_color", by_color.empty() ? "none" : by_color);
}

raster::AnnotationStyle style_from(const json& args, Rgb default_color) {
    raster::AnnotationStyle style;
    style.color = args.contains("color") ? raster::color_from_json(args["color"]) : default_color;
    style.stroke_width = args.value("width", 2);
    return style;
}

std::string join_grid(const std::vector<std::string>& grid) {
    std::string out;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (i > 0) out += '/';
        out += grid[i];
    }
    return out;
}

maze::GridMaze maze_from_args(const json& args, std::span<const std::string> ids, const ImageStore& store) {
    if (args.contains("grid")) return maze::maze_parse(maze::grid_from_json(args["grid"]));
    if (args.contains("start") || args.contains("goal") || args.contains("rows")) {
        for (const char* k : {"rows", "cols", "start", "goal"}) {
            if (!args.contains(k)) throw std::invalid_argument(std::string("structured maze needs '") + k + "'");
        }
        auto cell = [](const json& v) {
            return maze::Cell{static_cast<int>(v.at(0).get<double>()), static_cast<int>(v.at(1).get<double>())};
        };
        std::set<maze::Cell> obstacles;
        for (const auto& o : args.value("obstacles", json::array())) obstacles.insert(cell(o));
        return maze::make_maze(args["rows"].get<int>(), args["cols"].get<int>(), cell(args["start"]),
                               cell(args["goal"]), obstacles);
    }
    if (!ids.empty()) {
        return maze::maze_parse(maze::simplify_image(*single_image(ids, store, "maze_shortest_path")));
    }
    throw std::invalid_argument("maze_shortest_path needs a grid, structured fields, or a grid image");
}

ToolOutput region_caption(const json& args, std::span<const std::string> ids, ImageStore& store) {
    const auto image = single_image(ids, store, "region_caption");
    std::optional<raster::Rect> rect;
    if (args.contains("rect")) rect = raster::rect_from_json(args["rect"]);
    const auto stats = raster::region_stats(*image, rect);
    Lines lines;
    lines.add("size", size_text(stats.width, stats.height));
    add_region(lines, stats, "");
    if (auto caption = image->meta("caption")) lines.add("caption", *caption);
    // Only a clean grid rendering is legible; a raw scene photo has to be simplified first.
    if (const auto grid_meta = image->meta("grid"); grid_meta && !rect) {
        try {
            const auto m = maze::maze_parse(maze::grid_from_json(json::parse(*grid_meta)));
            std::string obstacles = "[";
            for (const auto& o : m.obstacles) {
                if (obstacles.size() > 1) obstacles += ", ";
                obstacles += cell_text(o);
            }
            obstacles += "]";
            lines.add("grid_rows", m.rows)
                .add("grid_cols", m.cols)
                .add("start", cell_text(m.start))
                .add("goal", cell_text(m.goal))
                .add("obstacle_count", static_cast<int>(m.obstacles.size()))
                .add("obstacles", obstacles);
        } catch (const std::exception& e) {
            lines.add("grid_error", e.what());
        }
    }
    return {lines.str(), {}};
}

ToolOutput highlight(const json& args, std::span<const std::string> ids, ImageStore& store) {
    const auto image = single_image(ids, store, "highlight");
    const auto rect = raster::rect_from_json(args.at("rect"));
    const auto out = raster::annotate(*image, raster::Highlight{rect}, style_from(args, {240, 220, 30}));
    const auto stats = raster::region_stats(*image, rect);
    const auto ref = store.put(out);
    Lines lines;
    lines.add("image", ref.id).add("size", size_text(ref.width, ref.height));
    add_region(lines, stats, "region_");
    return {lines.str(), {ref.id}};
}

ToolOutput arrow(const json& args, std::span<const std::string> ids, ImageStore& store) {
    const auto image = single_image(ids, store, "arrow");
    auto pixel = [](const json& v) {
        return raster::PixelPoint{static_cast<int>(std::lround(v.at(0).get<double>())),
                                  static_cast<int>(std::lround(v.at(1).get<double>()))};
    };
    const auto op = raster::Arrow{pixel(args.at("from")), pixel(args.at("to"))};
    const auto ref = store.put(raster::annotate(*image, op, style_from(args, {220, 30, 30})));
    Lines lines;
    lines.add("image", ref.id).add("size", size_text(ref.width, ref.height));
    return {lines.str(), {ref.id}};
}

ToolOutput draw_bbox(const json& args, std::span<const std::string> ids, ImageStore& store) {
    const auto image = single_image(ids, store, "draw_bbox");
    const auto rect = raster::rect_from_json(args.at("rect"));
    const auto op = raster::Bbox{rect, args.value("label", "")};
    const auto stats = raster::region_stats(*image, rect);
    const auto ref = store.put(raster::annotate(*image, op, style_from(args, {220, 30, 30})));
    Lines lines;
    lines.add("image", ref.id).add("size", size_text(ref.width, ref.height));
    add_region(lines, stats, "region_");
    return {lines.str(), {ref.id}};
}

ToolOutput crop(const json& args, std::span<const std::string> ids, ImageStore& store) {
    const auto image = single_image(ids, store, "crop");
    const auto ref = store.put(raster::crop(*image, raster::rect_from_json(args.at("rect"))));
    Lines lines;
    lines.add("image", ref.id).add("size", size_text(ref.width, ref.height));
    return {lines.str(), {ref.id}};
}

ToolOutput geometry_calculator(const json& args, std::span<const std::string>, ImageStore&) {
    const auto shape = to_lower(args.at("shape").get<std::string>());
    geometry::Shape2D s;
    if (shape == "polygon" || shape == "triangle" || shape == "rectangle" || shape == "quadrilateral") {
        geometry::Polygon poly;
        for (const auto& p : args.at("points")) poly.vertices.push_back(to_point(p));
        s = poly;
    } else if (shape == "circle") {
        s = geometry::Circle{to_point(args.at("center")), args.at("radius").get<double>()};
    } else if (shape == "segment") {
        s = geometry::LineSegment{to_point(args.at("p")), to_point(args.at("q"))};
    } else {
        throw std::invalid_argument("unknown shape '" + shape + "' (polygon, circle, segment)");
    }
    const auto m = geometry::measure(s);
    Lines lines;
    lines.add("shape", shape).add("area", m.area).add("perimeter", m.perimeter);
    return {lines.str(), {}};
}

ToolOutput geom_perp_intersect(const json& args, std::span<const std::string>, ImageStore&) {
    const auto& line = args.at("line");
    if (line.size() != 2) throw std::invalid_argument("line must have exactly two points");
    const Point a = to_point(line[0]);
    const Point b = to_point(line[1]);
    const Point p = to_point(args.at("point"));
    const Point foot = geometry::perpendicular_foot(a, b, p);
    Lines lines;
    lines.add("foot", point_text(foot))
        .add("foot_x", foot.x)
        .add("foot_y", foot.y)
        .add("distance", geometry::point_distance(p, foot));
    return {lines.str(), {}};
}

ToolOutput point_distance(const json& args, std::span<const std::string>, ImageStore&) {
    Lines lines;
    lines.add("distance", geometry::point_distance(to_point(args.at("p")), to_point(args.at("q"))));
    return {lines.str(), {}};
}

ToolOutput evaluate(const std::string& source) {
    Lines lines;
    lines.add("value", eval_expression(source));
    return {lines.str(), {}};
}

ToolOutput maze_shortest_path(const json& args, std::span<const std::string> ids, ImageStore& store) {
    const auto m = maze_from_args(args, ids, store);
    const auto path = maze::shortest_path(m);
    Lines lines;
    lines.add("path", maze::join_actions(path))
        .add("length", static_cast<int>(path.size()))
        .add("start", cell_text(m.start))
        .add("goal", cell_text(m.goal));
    return {lines.str(), {}};
}

ToolOutput simplify_image(const json& args, std::span<const std::string> ids, ImageStore& store) {
    std::vector<std::string> grid;
    if (args.contains("scene")) {
        grid = maze::simplify_scene(args["scene"]);
    } else if (!ids.empty()) {
        grid = maze::simplify_image(*single_image(ids, store, "simplify_image"));
    } else {
        throw maze::MazeError(maze::MazeErrorKind::NoStructuredGrid, "no scene description or image given");
    }
    const auto ref = store.put(maze::render_grid_image(grid));
    Lines lines;
    lines.add("image", ref.id)
        .add("rows", static_cast<int>(grid.size()))
        .add("cols", static_cast<int>(grid.front().size()))
        .add("grid", join_grid(grid));
    return {lines.str(), {ref.id}};
}

}  // namespace

const std::map<std::string, LocalHandler>& builtin_local_handlers() {
    static const std::map<std::string, LocalHandler> handlers = {
        {"region_caption", region_caption},
        {"highlight", highlight},
        {"arrow", arrow},
        {"draw_bbox", draw_bbox},
        {"geometry_calculator", geometry_calculator},
        {"geom_perp_intersect", geom_perp_intersect},
        {"point_distance", point_distance},
        {"code_agent", [](const json& a, std::span<const std::string>, ImageStore&) {
             return evaluate(a.at("code").get<std::string>());
         }},
        {"eval_expression", [](const json& a, std::span<const std::string>, ImageStore&) {
             return evaluate(a.at("expr").get<std::string>());
         }},
        {"maze_shortest_path", maze_shortest_path},
        {"crop", crop},
        {"simplify_image", simplify_image},
    };
    return handlers;
}

}  // namespace caporch
