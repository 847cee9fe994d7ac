// SPDX-License-Identifier: Apache-2.0
// Writes the shipped task sets: data/starter (30 tasks), data/ablation (12 tasks)
// and data/fixtures/maze_case (the 7x7 maze case study). Gold answers are
// computed here; transcripts drive the scripted provider.
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "caporch/evaluation.hpp"
#include "caporch/geometry.hpp"
#include "caporch/image.hpp"
#include "caporch/maze.hpp"
#include "caporch/raster.hpp"
#include "caporch/util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace caporch;

namespace {

// Zero-padded to two digits: "maze-03".
std::string fmt_id(const std::string& prefix, int n) {
    return prefix + (n < 10 ? "-0" : "-") + std::to_string(n);
}

const std::string kPerception = "Fine-grained Visual Perception";
const std::string kAugmentation = "Visual Augmentation & Marking";
const std::string kSpatial = "Spatial & Geometric Understanding";
const std::string kTransform = "Visual Transformation & Editing";
const std::string kGeneration = "Visual Creation & Generation";

std::string step(const std::string& think, const std::string& cap, const std::string& tool, const std::string& args,
                 const std::string& images = "[]") {
    return "<think>" + think + "</think>\n<cap>" + cap + "</cap>\n<tool_call>{\"name\": \"" + tool +
           "\", \"arguments\": " + args + ", \"images\": " + images + "}</tool_call>";
}

std::string answer(const std::string& think, const std::string& text) {
    return "<think>" + think + "</think>\n<answer>" + text + "</answer>";
}

class SetWriter {
public:
    explicit SetWriter(fs::path dir) : dir_(std::move(dir)) {
        fs::create_directories(dir_ / "images");
    }

    std::string image(const std::string& name, const Image& img) {
        const std::string rel = "images/" + name + ".png";
        std::ofstream(dir_ / rel, std::ios::binary) << encode_png(img);
        return rel;
    }

    void add(const std::string& id, const std::string& instruction, const std::vector<std::string>& images,
             const std::string& gold, const std::string& mode, const std::string& family,
             const std::vector<std::string>& caps, const std::vector<std::string>& script, double tolerance = -1) {
        json t = {{"id", id},       {"instruction", instruction}, {"images", images},
                  {"gold", gold},   {"answer_mode", mode},        {"family", family},
                  {"capability_labels", caps}};
        if (tolerance >= 0) t["tolerance"] = tolerance;
        tasks_ += t.dump() + "\n";
        json entries = json::array();
        for (const auto& s : script) entries.push_back({{"response", s}});
        transcripts_ += json{{"task_id", id}, {"entries", entries}}.dump() + "\n";
    }

    void finish(const std::string& config_comment) {
        std::ofstream(dir_ / "tasks.jsonl") << tasks_;
        std::ofstream(dir_ / "transcripts.jsonl") << transcripts_;
        std::ofstream(dir_ / "config.json") << "// " << config_comment << "\n"
                                            << R"({
  "providers": {
    "scripted": {"kind": "scripted", "transcripts": "transcripts.jsonl"}
  },
  "routing": {"global": "scripted"},
  "run": {"max_turn": 10, "temperature": 0.3, "top_p": 1.0, "budget_fraction": 0.6},
  "run_dir": "runs",
  "log_level": "warn"
}
)";
    }

private:
    fs::path dir_;
    std::string tasks_;
    std::string transcripts_;
};

// Input-style maze picture: textured floor, the clean grid only as a scene description.
Image maze_photo(const std::vector<std::string>& grid) {
    constexpr int px = 12;
    Image img = maze::render_grid_image(grid, px);
    img.metadata().clear();
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            const Rgb c = img.at(x, y);
            const bool floor = c.r == 255 && c.g == 255 && c.b == 255;
            if (floor) img.set(x, y, (x % px == 0 || y % px == 0) ? Rgb{200, 190, 170} : Rgb{240, 230, 210});
        }
    }
    img.metadata()["scene"] = maze::render_scene(maze::maze_parse(grid)).dump();
    return img;
}

std::vector<std::string> random_maze(std::mt19937& rng, int rows, int cols, double density) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> rr(0, rows - 1);
    std::uniform_int_distribution<int> cc(0, cols - 1);
    for (;;) {
        std::vector<std::string> g(static_cast<std::size_t>(rows), std::string(static_cast<std::size_t>(cols), '.'));
        for (auto& row : g) {
            for (auto& ch : row) ch = u(rng) < density ? '#' : '.';
        }
        const int sr = rr(rng), sc = cc(rng), gr = rr(rng), gc = cc(rng);
        if (std::abs(sr - gr) + std::abs(sc - gc) < (rows + cols) / 2) continue;
        g[sr][sc] = 'S';
        g[gr][gc] = 'G';
        try {
            const auto path = maze::shortest_path(maze::maze_parse(g));
            if (path.size() >= 6) return g;
        } catch (const maze::MazeError&) {
        }
    }
}

std::vector<std::string> maze_script(bool first_is_case_study) {
    const std::string why = first_is_case_study
                                ? "The photo is cluttered; rebuild it as a clean grid before planning a route."
                                : "Convert the maze picture into a clean symbolic grid first.";
    return {
        step(why, kGeneration, "simplify_image", "{}", R"(["input:0"])"),
        step("Read the start, goal and walls from the simplified grid.", kPerception, "region_caption", "{}",
             R"(["latest"])"),
        step("Search the grid for the shortest route.", "Logic", "maze_shortest_path",
             R"({"rows": {{obs:grid_rows}}, "cols": {{obs:grid_cols}}, "start": {{obs:start}}, "goal": {{obs:goal}}, "obstacles": {{obs:obstacles}}})"),
        answer("The solver returned the optimal move sequence.", "{{obs:path}}"),
    };
}

const char* kMazeInstruction =
    "Find the shortest sequence of moves from the start (green) to the goal (red). Moves are U, D, L, R; "
    "answer as a comma-separated list.";

void add_maze(SetWriter& w, const std::string& id, const std::vector<std::string>& grid, bool case_study = false) {
    const auto path = maze::shortest_path(maze::maze_parse(grid));
    const std::string img = w.image(id, maze_photo(grid));
    w.add(id, kMazeInstruction, {img}, maze::join_actions(path), "action_sequence", "maze",
          {"Generation", "Perception", "Logic"}, maze_script(case_study));
}

struct Expr {
    std::string text;
    double value;
};

void add_expression(SetWriter& w, const std::string& id, const Expr& e) {
    w.add(id, "Compute the value of " + e.text + ".", {}, format_number(e.value), "numeric", "expression", {"Logic"},
          {step("Evaluate the arithmetic exactly with a tool.", "logical programming", "eval_expression",
                json{{"expr", e.text}}.dump()),
           answer("The evaluator reported the value.", "{{obs:value}}")},
          1e-9);
}

std::string pts(const std::vector<geometry::Point>& ps) {
    json a = json::array();
    for (const auto& p : ps) a.push_back({p.x, p.y});
    return a.dump();
}

void add_polygon_area(SetWriter& w, const std::string& id, const std::vector<geometry::Point>& ps,
                      const std::string& what) {
    const auto m = geometry::measure(geometry::Polygon{ps});
    const bool area = what == "area";
    w.add(id, "What is the " + what + " of the polygon with vertices " + pts(ps) + "?", {},
          format_number(area ? m.area : m.perimeter), "numeric", "geometry", {"Spatial"},
          {step("Measure the polygon.", kSpatial, "geometry_calculator",
                R"({"shape": "polygon", "points": )" + pts(ps) + "}"),
           answer("Read the measurement.", area ? "{{obs:area}}" : "{{obs:perimeter}}")},
          1e-6);
}

void add_perp_distance(SetWriter& w, const std::string& id, geometry::Point a, geometry::Point b, geometry::Point p) {
    const auto foot = geometry::perpendicular_foot(a, b, p);
    w.add(id,
          "How far is the point " + pts({p}).substr(1, pts({p}).size() - 2) + " from the line through " +
              pts({a, b}) + "?",
          {}, format_number(geometry::point_distance(p, foot)), "numeric", "geometry", {"Spatial"},
          {step("Drop a perpendicular onto the line.", "geometry", "geom_perp_intersect",
                R"({"line": )" + pts({a, b}) + R"(, "point": )" + pts({p}).substr(1, pts({p}).size() - 2) + "}"),
           answer("The perpendicular length is the distance.", "{{obs:distance}}")},
          1e-6);
}

struct Square {
    int x, y, size;
    Rgb color;
};

Image canvas_with(const std::vector<Square>& squares, int w, int h) {
    Image img(w, h);
    for (const auto& s : squares) {
        for (int y = s.y; y < s.y + s.size; ++y) {
            for (int x = s.x; x < s.x + s.size; ++x) img.set(x, y, s.color);
        }
    }
    return img;
}

bool overlaps(const Square& a, const Square& b, int gap) {
    return a.x < b.x + b.size + gap && b.x < a.x + a.size + gap && a.y < b.y + b.size + gap &&
           b.y < a.y + a.size + gap;
}

const std::vector<std::pair<std::string, Rgb>> kColors = {
    {"red", {220, 30, 30}},     {"blue", {30, 60, 220}},  {"green", {30, 160, 30}},
    {"orange", {245, 140, 20}}, {"purple", {130, 40, 170}}, {"cyan", {30, 200, 220}},
};

// Squares that lie either fully inside or fully outside `region`.
std::vector<Square> scatter(std::mt19937& rng, int n, const raster::Rect& region, int w, int h) {
    std::uniform_int_distribution<int> px(0, w - 8), py(0, h - 8), pc(0, static_cast<int>(kColors.size()) - 1);
    std::uniform_int_distribution<int> ix(region.x, region.x + region.w - 6), iy(region.y, region.y + region.h - 6);
    std::vector<Square> out;
    while (static_cast<int>(out.size()) < n) {
        // Every other square is drawn from the region so counts are not trivially small.
        const bool aim_inside = out.size() % 2 == 0;
        Square s{aim_inside ? ix(rng) : px(rng), aim_inside ? iy(rng) : py(rng), 6,
                 kColors[static_cast<std::size_t>(pc(rng))].second};
        const bool inside = s.x >= region.x && s.y >= region.y && s.x + s.size <= region.x + region.w &&
                            s.y + s.size <= region.y + region.h;
        const bool outside = s.x + s.size + 1 < region.x || s.y + s.size + 1 < region.y ||
                             s.x > region.x + region.w || s.y > region.y + region.h;
        if (!inside && !outside) continue;
        bool clash = false;
        for (const auto& o : out) clash = clash || overlaps(s, o, 2);
        if (!clash) out.push_back(s);
    }
    return out;
}

int count_inside(const std::vector<Square>& squares, const raster::Rect& r) {
    int n = 0;
    for (const auto& s : squares) {
        if (s.x >= r.x && s.y >= r.y && s.x + s.size <= r.x + r.w && s.y + s.size <= r.y + r.h) ++n;
    }
    return n;
}

std::string rect_json(const raster::Rect& r) { return json{{"x", r.x}, {"y", r.y}, {"w", r.w}, {"h", r.h}}.dump(); }

std::string rect_text(const raster::Rect& r) {
    return "x=" + std::to_string(r.x) + ", y=" + std::to_string(r.y) + ", w=" + std::to_string(r.w) +
           ", h=" + std::to_string(r.h);
}

void write_starter(const fs::path& root, std::mt19937& rng) {
    SetWriter w(root / "starter");

    // maze: Generation -> Perception -> Logic
    add_maze(w, "maze-01", {"#######", "#.#...#", "#....##", "#G##.##", "###..S#", "#...#.#", "#######"}, true);
    for (int i = 2; i <= 6; ++i) {
        const int n = 5 + i;
        add_maze(w, fmt_id("maze", i), random_maze(rng, n, n, 0.25));
    }

    // geometry: Spatial
    add_polygon_area(w, "geometry-01", {{0, 0}, {3, 0}, {0, 4}}, "area");
    add_polygon_area(w, "geometry-02", {{0, 0}, {3, 0}, {0, 4}}, "perimeter");
    add_polygon_area(w, "geometry-03", {{1, 1}, {7, 2}, {8, 6}, {4, 9}, {0, 5}}, "area");
    add_polygon_area(w, "geometry-04", {{-2, -1}, {5, -1}, {5, 3}, {-2, 3}}, "perimeter");
    add_perp_distance(w, "geometry-05", {0, 0}, {4, 0}, {1, 3});
    add_perp_distance(w, "geometry-06", {-1, 2}, {3, 5}, {4, -2});

    // expression: Logic
    add_expression(w, "expression-01", {"(3 + 4) × 2", 14});
    add_expression(w, "expression-02", {"2^10 - 24", 1000});
    add_expression(w, "expression-03", {"sqrt(144) + 7 ÷ 2", 15.5});
    add_expression(w, "expression-04", {"-(5 - 12) * (3 - 1.5)", 10.5});
    add_expression(w, "expression-05", {"max(3, 9) / min(4, 6)", 2.25});
    w.add("expression-06",
          "Which is larger? (A) 2^5 (B) 5^2 + 10. Answer with the letter.", {}, "B", "multiple_choice",
          "expression", {"Logic"}, {answer("32 versus 35, so B is larger.", "B")});

    // counting: Transform -> Perception
    for (int i = 1; i <= 6; ++i) {
        const raster::Rect region{16 + 4 * i, 12 + 2 * i, 48, 40};
        const auto squares = scatter(rng, 5 + i, region, 112, 96);
        const std::string id = fmt_id("counting", i);
        const std::string img = w.image(id, canvas_with(squares, 112, 96));
        w.add(id, "How many squares lie inside the region " + rect_text(region) + "?", {img},
              std::to_string(count_inside(squares, region)), "numeric", "counting", {"Transform", "Perception"},
              {step("Cut the region out so only it is examined.", kTransform, "crop",
                    R"({"rect": )" + rect_json(region) + "}", R"(["input:0"])"),
               step("Count the separate objects in the crop.", kPerception, "region_caption", "{}",
                    R"(["latest"])"),
               answer("The caption reports the blob count.", "{{obs:blobs}}")},
              0);
    }

    // marking: Augmentation (with perception of the marked region)
    for (int i = 1; i <= 6; ++i) {
        const auto& [name, color] = kColors[static_cast<std::size_t>(i - 1)];
        std::vector<Square> squares;
        const Square target{20 + 7 * i, 18 + 5 * i, 10, color};
        squares.push_back(target);
        std::uniform_int_distribution<int> px(0, 100), py(0, 84), pc(0, static_cast<int>(kColors.size()) - 1);
        while (squares.size() < 6) {
            Square s{px(rng), py(rng), 8, kColors[static_cast<std::size_t>(pc(rng))].second};
            bool clash = false;
            for (const auto& o : squares) clash = clash || overlaps(s, o, 4);
            if (!clash) squares.push_back(s);
        }
        const raster::Rect box{target.x - 2, target.y - 2, target.size + 4, target.size + 4};
        const std::string id = fmt_id("marking", i);
        const std::string img = w.image(id, canvas_with(squares, 112, 96));
        w.add(id, "Mark the region " + rect_text(box) + " and name the color of the object inside it.", {img}, name,
              "exact_text", "marking", {"Augmentation", "Perception"},
              {step("Highlight the queried region to focus on it.", kAugmentation, "highlight",
                    R"({"rect": )" + rect_json(box) + "}", R"(["input:0"])"),
               answer("The marked region contains one object.", "{{obs:region_dominant_color}}")});
    }
    w.finish("Starter set: scripted provider replaying transcripts.jsonl.");
}

void write_ablation(const fs::path& root, std::mt19937& rng) {
    SetWriter w(root / "ablation");
    for (int i = 1; i <= 4; ++i) add_maze(w, fmt_id("abl-maze", i), random_maze(rng, 7 + i, 7 + i, 0.2));
    const std::vector<Expr> exprs = {{"12 * 12 - 44", 100}, {"(7 + 8) ÷ 4", 3.75}, {"3^3 + 4^3", 91}, {"abs(2 - 19)", 17}};
    for (int i = 1; i <= 4; ++i) add_expression(w, fmt_id("abl-expression", i), exprs[static_cast<std::size_t>(i - 1)]);
    add_polygon_area(w, "abl-geometry-01", {{0, 0}, {6, 0}, {6, 2}, {0, 2}}, "area");
    add_polygon_area(w, "abl-geometry-02", {{0, 0}, {5, 0}, {0, 12}}, "perimeter");
    add_perp_distance(w, "abl-geometry-03", {0, 1}, {1, 2}, {3, 0});
    add_polygon_area(w, "abl-geometry-04", {{2, 1}, {6, 3}, {3, 7}}, "area");
    w.finish("Ablation set: Logic-dependent mazes and expressions plus Spatial-only geometry.");
}

void write_case_study(const fs::path& root) {
    SetWriter w(root / "fixtures" / "maze_case");
    add_maze(w, "maze-case", {"#######", "#.#...#", "#....##", "#G##.##", "###..S#", "#...#.#", "#######"}, true);
    w.finish("7x7 maze case study: simplify, read the grid, solve.");
}

}  // namespace

int main(int argc, char** argv) {
    const fs::path root = argc > 1 ? fs::path(argv[1]) : fs::path(CAPORCH_DATA_DIR);
    std::mt19937 rng(20240617);
    write_starter(root, rng);
    write_ablation(root, rng);
    write_case_study(root);
    std::cout << "wrote task sets under " << root << "\n";
    return 0;
}
