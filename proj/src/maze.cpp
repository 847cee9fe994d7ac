// SPDX-License-Identifier: Apache-2.0
#include "caporch/maze.hpp"

#include <array>
#include <deque>
#include <map>

namespace caporch::maze {

using nlohmann::json;

std::string_view to_string(MazeErrorKind k) {
    switch (k) {
        case MazeErrorKind::NonRectangular: return "NonRectangular";
        case MazeErrorKind::EmptyGrid: return "EmptyGrid";
        case MazeErrorKind::InvalidCell: return "InvalidCell";
        case MazeErrorKind::MultipleStarts: return "MultipleStarts";
        case MazeErrorKind::MultipleGoals: return "MultipleGoals";
        case MazeErrorKind::MissingStart: return "MissingStart";
        case MazeErrorKind::MissingGoal: return "MissingGoal";
        case MazeErrorKind::InvalidMaze: return "InvalidMaze";
        case MazeErrorKind::NoPath: return "NoPath";
        case MazeErrorKind::NoStructuredGrid: return "NoStructuredGrid";
    }
    return "?";
}

std::vector<std::string> GridMaze::to_grid() const {
    std::vector<std::string> grid(static_cast<std::size_t>(rows),
                                  std::string(static_cast<std::size_t>(cols), kEmpty));
    for (const auto& o : obstacles) grid[o.row][o.col] = kObstacle;
    grid[start.row][start.col] = kStart;
    grid[goal.row][goal.col] = kGoal;
    return grid;
}

char to_char(Action a) {
    switch (a) {
        case Action::Up: return 'U';
        case Action::Left: return 'L';
        case Action::Down: return 'D';
        case Action::Right: return 'R';
    }
    return '?';
}

Cell apply(Cell c, Action a) {
    switch (a) {
        case Action::Up: return {c.row - 1, c.col};
        case Action::Left: return {c.row, c.col - 1};
        case Action::Down: return {c.row + 1, c.col};
        case Action::Right: return {c.row, c.col + 1};
    }
    return c;
}

std::string join_actions(const std::vector<Action>& path) {
    std::string out;
    for (std::size_t i = 0; i < path.size(); ++i) {
        if (i > 0) out.push_back(',');
        out.push_back(to_char(path[i]));
    }
    return out;
}

GridMaze maze_parse(const std::vector<std::string>& grid) {
    if (grid.empty() || grid.front().empty()) {
        throw MazeError(MazeErrorKind::EmptyGrid, "grid is empty");
    }
    GridMaze maze;
    maze.rows = static_cast<int>(grid.size());
    maze.cols = static_cast<int>(grid.front().size());
    std::optional<Cell> start;
    std::optional<Cell> goal;
    for (int r = 0; r < maze.rows; ++r) {
        const auto& row = grid[static_cast<std::size_t>(r)];
        if (static_cast<int>(row.size()) != maze.cols) {
            throw MazeError(MazeErrorKind::NonRectangular,
                            "row " + std::to_string(r) + " has " + std::to_string(row.size()) +
                                " cells, expected " + std::to_string(maze.cols));
        }
        for (int c = 0; c < maze.cols; ++c) {
            switch (row[static_cast<std::size_t>(c)]) {
                case kEmpty:
                case 'E': break;
                case kObstacle:
                case 'O': maze.obstacles.insert({r, c}); break;
                case kStart:
                    if (start) throw MazeError(MazeErrorKind::MultipleStarts, "more than one start cell");
                    start = Cell{r, c};
                    break;
                case kGoal:
                    if (goal) throw MazeError(MazeErrorKind::MultipleGoals, "more than one goal cell");
                    goal = Cell{r, c};
                    break;
                default:
                    throw MazeError(MazeErrorKind::InvalidCell,
                                    std::string("invalid cell code '") +
                                        row[static_cast<std::size_t>(c)] + "'");
            }
        }
    }
    if (!start) throw MazeError(MazeErrorKind::MissingStart, "grid has no start cell");
    if (!goal) throw MazeError(MazeErrorKind::MissingGoal, "grid has no goal cell");
    maze.start = *start;
    maze.goal = *goal;
    return maze;
}

std::vector<std::string> grid_from_json(const json& grid) {
    if (!grid.is_array()) throw MazeError(MazeErrorKind::NoStructuredGrid, "grid must be an array");
    std::vector<std::string> rows;
    for (const auto& row : grid) {
        if (row.is_string()) {
            rows.push_back(row.get<std::string>());
        } else if (row.is_array()) {
            std::string s;
            for (const auto& cell : row) {
                const auto code = cell.is_string() ? cell.get<std::string>() : std::string();
                if (code.size() != 1) {
                    throw MazeError(MazeErrorKind::InvalidCell, "cell codes must be single characters");
                }
                s += code;
            }
            rows.push_back(std::move(s));
        } else {
            throw MazeError(MazeErrorKind::NoStructuredGrid, "grid rows must be strings or arrays");
        }
    }
    return rows;
}

GridMaze make_maze(int rows, int cols, Cell start, Cell goal, const std::set<Cell>& obstacles) {
    GridMaze maze{rows, cols, start, goal, obstacles};
    if (rows <= 0 || cols <= 0) throw MazeError(MazeErrorKind::InvalidMaze, "grid size must be positive");
    if (!maze.in_bounds(start) || !maze.in_bounds(goal)) {
        throw MazeError(MazeErrorKind::InvalidMaze, "start and goal must be inside the grid");
    }
    if (start == goal) throw MazeError(MazeErrorKind::InvalidMaze, "start equals goal");
    for (const auto& o : obstacles) {
        if (!maze.in_bounds(o)) throw MazeError(MazeErrorKind::InvalidMaze, "obstacle outside the grid");
    }
    if (maze.blocked(start) || maze.blocked(goal)) {
        throw MazeError(MazeErrorKind::InvalidMaze, "start or goal is an obstacle");
    }
    return maze;
}

std::vector<Action> shortest_path(const GridMaze& maze) {
    constexpr std::array<Action, 4> kOrder = {Action::Up, Action::Left, Action::Down, Action::Right};
    std::map<Cell, std::pair<Cell, Action>> parent;
    std::deque<Cell> frontier{maze.start};
    parent.emplace(maze.start, std::pair{maze.start, Action::Up});
    while (!frontier.empty()) {
        const Cell cur = frontier.front();
        frontier.pop_front();
        if (cur == maze.goal) {
            std::vector<Action> path;
            for (Cell c = cur; c != maze.start; c = parent.at(c).first) {
                path.push_back(parent.at(c).second);
            }
            return {path.rbegin(), path.rend()};
        }
        for (Action a : kOrder) {
            const Cell next = apply(cur, a);
            if (!maze.in_bounds(next) || maze.blocked(next) || parent.contains(next)) continue;
            parent.emplace(next, std::pair{cur, a});
            frontier.push_back(next);
        }
    }
    throw MazeError(MazeErrorKind::NoPath, "goal is unreachable from start");
}

json render_scene(const GridMaze& maze) { return {{"version", 1}, {"grid", maze.to_grid()}}; }

std::vector<std::string> simplify_scene(const json& scene) {
    if (!scene.is_object() || !scene.contains("grid")) {
        throw MazeError(MazeErrorKind::NoStructuredGrid, "scene description has no grid");
    }
    auto grid = grid_from_json(scene.at("grid"));
    // Validates codes, shape and start/goal uniqueness.
    maze_parse(grid);
    return grid;
}

std::vector<std::string> simplify_image(const Image& image) {
    for (const char* key : {"scene", "grid"}) {
        const auto raw = image.meta(key);
        if (!raw) continue;
        json doc = json::parse(*raw, nullptr, false);
        if (doc.is_discarded()) {
            throw MazeError(MazeErrorKind::NoStructuredGrid,
                            std::string("image metadata '") + key + "' is not valid JSON");
        }
        if (doc.is_array()) doc = json{{"grid", doc}};
        return simplify_scene(doc);
    }
    throw MazeError(MazeErrorKind::NoStructuredGrid,
                    "image carries no structured grid; route to a remote generation backend");
}

Image render_grid_image(const std::vector<std::string>& grid, int cell_px) {
    const int rows = static_cast<int>(grid.size());
    const int cols = rows > 0 ? static_cast<int>(grid.front().size()) : 0;
    Image image(cols * cell_px, rows * cell_px);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            Rgb color{255, 255, 255};
            switch (grid[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]) {
                case kObstacle: color = {0, 0, 0}; break;
                case kStart: color = {0, 160, 0}; break;
                case kGoal: color = {200, 0, 0}; break;
                default: break;
            }
            for (int y = 0; y < cell_px; ++y) {
                for (int x = 0; x < cell_px; ++x) image.set(c * cell_px + x, r * cell_px + y, color);
            }
        }
    }
    image.metadata()["grid"] = json(grid).dump();
    return image;
}

}  // namespace caporch::maze
