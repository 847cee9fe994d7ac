// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "caporch/error.hpp"
#include "caporch/image.hpp"

namespace caporch::maze {

// Cell codes of the grid scene format.
inline constexpr char kEmpty = '.';
inline constexpr char kObstacle = '#';
inline constexpr char kStart = 'S';
inline constexpr char kGoal = 'G';

struct Cell {
    int row = 0;
    int col = 0;
    auto operator<=>(const Cell&) const = default;
};

struct GridMaze {
    int rows = 0;
    int cols = 0;
    Cell start;
    Cell goal;
    std::set<Cell> obstacles;

    bool in_bounds(Cell c) const { return c.row >= 0 && c.col >= 0 && c.row < rows && c.col < cols; }
    bool blocked(Cell c) const { return obstacles.contains(c); }
    // Rows of cell codes.
    std::vector<std::string> to_grid() const;
};

// U = row-1, D = row+1, L = col-1, R = col+1.
enum class Action { Up, Left, Down, Right };
char to_char(Action a);
Cell apply(Cell c, Action a);
// "L,U,U,L"
std::string join_actions(const std::vector<Action>& path);

enum class MazeErrorKind {
    NonRectangular,
    EmptyGrid,
    InvalidCell,
    MultipleStarts,
    MultipleGoals,
    MissingStart,
    MissingGoal,
    InvalidMaze,
    NoPath,
    NoStructuredGrid,
};
std::string_view to_string(MazeErrorKind k);
using MazeError = KindedError<MazeErrorKind>;

// 'E' and 'O' are accepted as spellings of empty and obstacle.
GridMaze maze_parse(const std::vector<std::string>& grid);
// Accepts ["#S.", ...] or [["#","S","."], ...].
std::vector<std::string> grid_from_json(const nlohmann::json& grid);

// Builds and validates a maze from structured fields (rows, cols, start, goal, obstacles).
GridMaze make_maze(int rows, int cols, Cell start, Cell goal, const std::set<Cell>& obstacles);

// Breadth-first search over 4-connected moves; neighbors expanded in the fixed
// order U, L, D, R, so ties resolve to the BFS-first path. Throws NoPath.
std::vector<Action> shortest_path(const GridMaze& maze);

// {"version": 1, "grid": ["#S.", ...]}
nlohmann::json render_scene(const GridMaze& maze);

// Clean grid from a scene description (object with "grid"). Throws NoStructuredGrid.
std::vector<std::string> simplify_scene(const nlohmann::json& scene);
// Clean grid from an image carrying a "scene" (or "grid") metadata entry.
std::vector<std::string> simplify_image(const Image& image);

// Flat rendering of a grid, `cell_px` pixels per cell, with the grid stored
// under the "grid" metadata key.
Image render_grid_image(const std::vector<std::string>& grid, int cell_px = 8);

}  // namespace caporch::maze
