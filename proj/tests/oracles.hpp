// SPDX-License-Identifier: Apache-2.0
// Independent reference computations shared by the unit tests and the
// acceptance runner. None of these call into the code under test.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace oracle {

struct Pt {
    double x = 0;
    double y = 0;
};

// Even-odd ray casting.
inline bool inside(const std::vector<Pt>& poly, double x, double y) {
    bool in = false;
    const std::size_t n = poly.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Pt& a = poly[i];
        const Pt& b = poly[j];
        if ((a.y > y) != (b.y > y)) {
            const double cross_x = a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (x < cross_x) in = !in;
        }
    }
    return in;
}

// Area by uniform sampling of the bounding box.
inline double monte_carlo_area(const std::vector<Pt>& poly, int samples, std::mt19937_64& rng) {
    double lx = poly[0].x, hx = poly[0].x, ly = poly[0].y, hy = poly[0].y;
    for (const auto& p : poly) {
        lx = std::min(lx, p.x);
        hx = std::max(hx, p.x);
        ly = std::min(ly, p.y);
        hy = std::max(hy, p.y);
    }
    std::uniform_real_distribution<double> ux(lx, hx), uy(ly, hy);
    int hits = 0;
    for (int i = 0; i < samples; ++i) hits += inside(poly, ux(rng), uy(rng)) ? 1 : 0;
    return (hx - lx) * (hy - ly) * hits / samples;
}

// Star-shaped around the origin with strictly increasing angles: always simple.
inline std::vector<Pt> random_simple_polygon(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> ua(0.0, 2 * std::numbers::pi), ur(1.0, 10.0);
    std::vector<double> angles(static_cast<std::size_t>(n));
    for (;;) {
        for (auto& a : angles) a = ua(rng);
        std::sort(angles.begin(), angles.end());
        bool spread = true;
        for (std::size_t i = 1; i < angles.size(); ++i) spread = spread && angles[i] - angles[i - 1] > 1e-3;
        if (spread) break;
    }
    std::vector<Pt> out;
    for (double a : angles) {
        const double r = ur(rng);
        out.push_back({r * std::cos(a), r * std::sin(a)});
    }
    return out;
}

// ---- mazes -------------------------------------------------------------

struct Maze {
    int rows = 0;
    int cols = 0;
    std::vector<char> cells;  // '.', '#', 'S', 'G'
    int start = 0;
    int goal = 0;

    char at(int r, int c) const { return cells[static_cast<std::size_t>(r * cols + c)]; }
    std::vector<std::string> grid() const {
        std::vector<std::string> g;
        for (int r = 0; r < rows; ++r) g.emplace_back(cells.begin() + r * cols, cells.begin() + (r + 1) * cols);
        return g;
    }
};

// Distance-to-goal by repeated relaxation until a fixpoint (Bellman-Ford on the grid).
inline std::vector<int> dp_distances(const Maze& m) {
    constexpr int inf = std::numeric_limits<int>::max() / 2;
    std::vector<int> d(m.cells.size(), inf);
    d[static_cast<std::size_t>(m.goal)] = 0;
    for (bool changed = true; changed;) {
        changed = false;
        for (int r = 0; r < m.rows; ++r) {
            for (int c = 0; c < m.cols; ++c) {
                if (m.at(r, c) == '#') continue;
                const int i = r * m.cols + c;
                const int nb[4][2] = {{r - 1, c}, {r + 1, c}, {r, c - 1}, {r, c + 1}};
                for (const auto& q : nb) {
                    if (q[0] < 0 || q[1] < 0 || q[0] >= m.rows || q[1] >= m.cols || m.at(q[0], q[1]) == '#') continue;
                    const int j = q[0] * m.cols + q[1];
                    if (d[static_cast<std::size_t>(j)] + 1 < d[static_cast<std::size_t>(i)]) {
                        d[static_cast<std::size_t>(i)] = d[static_cast<std::size_t>(j)] + 1;
                        changed = true;
                    }
                }
            }
        }
    }
    return d;
}

inline std::optional<int> dp_shortest(const Maze& m) {
    const int d = dp_distances(m)[static_cast<std::size_t>(m.start)];
    if (d >= std::numeric_limits<int>::max() / 2) return std::nullopt;
    return d;
}

// True when `moves` (U/L/D/R letters) walks from start to goal through free cells.
inline bool valid_walk(const Maze& m, const std::string& moves) {
    int r = m.start / m.cols, c = m.start % m.cols;
    for (char mv : moves) {
        switch (mv) {
            case 'U': --r; break;
            case 'D': ++r; break;
            case 'L': --c; break;
            case 'R': ++c; break;
            default: return false;
        }
        if (r < 0 || c < 0 || r >= m.rows || c >= m.cols || m.at(r, c) == '#') return false;
    }
    return r * m.cols + c == m.goal;
}

// Calls f(maze) for every maze of the given size with <= max_obstacles walls.
template <typename F>
void for_each_maze(int rows, int cols, int max_obstacles, F&& f) {
    const int n = rows * cols;
    for (int s = 0; s < n; ++s) {
        for (int g = 0; g < n; ++g) {
            if (g == s) continue;
            std::vector<int> free;
            for (int i = 0; i < n; ++i) {
                if (i != s && i != g) free.push_back(i);
            }
            const int k_max = std::min<int>(max_obstacles, static_cast<int>(free.size()));
            for (int k = 0; k <= k_max; ++k) {
                std::vector<int> pick(static_cast<std::size_t>(k));
                for (int i = 0; i < k; ++i) pick[static_cast<std::size_t>(i)] = i;
                for (;;) {
                    Maze m{rows, cols, std::vector<char>(static_cast<std::size_t>(n), '.'), s, g};
                    m.cells[static_cast<std::size_t>(s)] = 'S';
                    m.cells[static_cast<std::size_t>(g)] = 'G';
                    for (int p : pick) m.cells[static_cast<std::size_t>(free[static_cast<std::size_t>(p)])] = '#';
                    f(m);
                    // next k-combination of free.size()
                    int i = k - 1;
                    while (i >= 0 && pick[static_cast<std::size_t>(i)] == static_cast<int>(free.size()) - k + i) --i;
                    if (i < 0) break;
                    ++pick[static_cast<std::size_t>(i)];
                    for (int j = i + 1; j < k; ++j) pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
                }
            }
        }
    }
}

// Shortest walk length by exhaustive depth-first enumeration of simple paths,
// pruned only by bounds that cannot discard a shorter path.
inline std::optional<int> min_simple_path(const Maze& m) {
    const int gr = m.goal / m.cols, gc = m.goal % m.cols;
    std::vector<char> seen(m.cells.size(), 0);
    int best = std::numeric_limits<int>::max();
    auto dfs = [&](auto&& self, int r, int c, int depth) -> void {
        if (depth + std::abs(r - gr) + std::abs(c - gc) >= best) return;
        if (r == gr && c == gc) {
            best = depth;
            return;
        }
        const int nb[4][2] = {{r - 1, c}, {r + 1, c}, {r, c - 1}, {r, c + 1}};
        for (const auto& q : nb) {
            if (q[0] < 0 || q[1] < 0 || q[0] >= m.rows || q[1] >= m.cols) continue;
            const auto j = static_cast<std::size_t>(q[0] * m.cols + q[1]);
            if (seen[j] || m.cells[j] == '#') continue;
            seen[j] = 1;
            self(self, q[0], q[1], depth + 1);
            seen[j] = 0;
        }
    };
    seen[static_cast<std::size_t>(m.start)] = 1;
    dfs(dfs, m.start / m.cols, m.start % m.cols, 0);
    if (best == std::numeric_limits<int>::max()) return std::nullopt;
    return best;
}

inline Maze random_maze(std::mt19937_64& rng, int rows, int cols, double density) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> cell(0, rows * cols - 1);
    Maze m{rows, cols, std::vector<char>(static_cast<std::size_t>(rows * cols), '.'), 0, 0};
    for (auto& ch : m.cells) ch = u(rng) < density ? '#' : '.';
    m.start = cell(rng);
    do {
        m.goal = cell(rng);
    } while (m.goal == m.start);
    m.cells[static_cast<std::size_t>(m.start)] = 'S';
    m.cells[static_cast<std::size_t>(m.goal)] = 'G';
    return m;
}

// ---- arithmetic expressions ---------------------------------------------

// Expression tree rendered with the minimum parentheses the grammar needs;
// its value is computed from the tree, not by parsing.
struct Expr {
    std::string text;
    double value = 0;
    int prec = 4;  // 1 additive, 2 multiplicative, 3 unary, 4 power, 5 atom
    bool div_by_zero = false;  // some sub-expression divides by zero
};

inline std::string paren(const Expr& e, bool needed) { return needed ? "(" + e.text + ")" : e.text; }

inline Expr random_expr(std::mt19937_64& rng, int depth) {
    std::uniform_int_distribution<int> pick(0, 9);
    std::uniform_int_distribution<int> lit(0, 20);
    std::uniform_int_distribution<int> sp(0, 3);
    const auto space = [&] { return sp(rng) == 0 ? std::string(" ") : std::string(); };
    if (depth <= 0 || pick(rng) < 2) {
        const int v = lit(rng);
        if (pick(rng) == 0) return {std::to_string(v) + ".5", v + 0.5, 5};
        return {std::to_string(v), static_cast<double>(v), 5};
    }
    const int op = pick(rng);
    if (op == 0) {  // unary minus; its operand must bind at least as tightly as '^'
        const Expr a = random_expr(rng, depth - 1);
        return {"-" + paren(a, a.prec < 4), -a.value, 3, a.div_by_zero};
    }
    if (op == 1) {  // power with a small integer exponent
        const Expr base = random_expr(rng, depth - 1);
        const int k = std::uniform_int_distribution<int>(0, 3)(rng);
        return {paren(base, base.prec <= 4) + space() + "^" + space() + std::to_string(k), std::pow(base.value, k), 4,
                base.div_by_zero};
    }
    if (op == 2) {  // function call
        const Expr a = random_expr(rng, depth - 1);
        const Expr b = random_expr(rng, depth - 1);
        if (pick(rng) < 5) return {"abs(" + a.text + ")", std::fabs(a.value), 5, a.div_by_zero};
        return {"max(" + a.text + "," + space() + b.text + ")", std::max(a.value, b.value), 5,
                a.div_by_zero || b.div_by_zero};
    }
    const Expr a = random_expr(rng, depth - 1);
    const Expr b = random_expr(rng, depth - 1);
    static const char* kOps[] = {"+", "-", "*", "/", "×", "÷"};
    const std::string sym = kOps[std::uniform_int_distribution<int>(0, 5)(rng)];
    const bool additive = sym == "+" || sym == "-";
    const int prec = additive ? 1 : 2;
    // Left-associative: the right operand needs parentheses at equal precedence.
    const std::string text = paren(a, a.prec < prec) + space() + sym + space() + paren(b, b.prec <= prec);
    double v = 0;
    bool bad = a.div_by_zero || b.div_by_zero;
    if (sym == "+") v = a.value + b.value;
    if (sym == "-") v = a.value - b.value;
    if (sym == "*" || sym == "×") v = a.value * b.value;
    if (sym == "/" || sym == "÷") {
        bad = bad || b.value == 0;
        v = b.value == 0 ? 0 : a.value / b.value;
    }
    return {text, v, prec, bad};
}


// ---- tag soup ------------------------------------------------------------

// Random text biased towards the protocol tags: whole and truncated tags,
// stray angle brackets, JSON fragments, non-ASCII bytes and raw binary.
inline std::string tag_soup(std::mt19937_64& rng) {
    static const std::vector<std::string> pieces = {
        "<think>", "</think>", "<cap>", "</cap>", "<tool_call>", "</tool_call>", "<answer>", "</answer>",
        "<", ">", "</", "<thi", "</answ", "<CAP>", "<tool_call >", "<<answer>>", "{\"name\": \"crop\"}",
        "Logic", " ", "\n", "\t", "42", "é", "\xe2\x9c\x93", "plain words", "<cap/>", "\\", "\"",
    };
    std::uniform_int_distribution<int> len(0, 40);
    std::uniform_int_distribution<std::size_t> which(0, pieces.size() - 1);
    std::uniform_int_distribution<int> coin(0, 9);
    std::uniform_int_distribution<int> byte(0, 255);
    std::string out;
    const int n = len(rng);
    for (int i = 0; i < n; ++i) {
        if (coin(rng) == 0) {
            out.push_back(static_cast<char>(byte(rng)));
        } else {
            out += pieces[which(rng)];
        }
    }
    return out;
}

struct TagRegion {
    std::string name;  // "think", "cap", "tool_call", "answer"
    std::size_t start = 0;
    std::size_t end = 0;
    bool first = false;  // first region of this name
};

// Left-to-right scan: at each '<' that opens a known tag with a matching close
// further on, the whole region is consumed; otherwise move one byte on.
inline std::vector<TagRegion> tag_regions(const std::string& raw) {
    static const std::vector<std::string> tag_names = {"think", "cap", "tool_call", "answer"};
    std::vector<TagRegion> out;
    std::set<std::string> seen;
    std::size_t i = 0;
    while (i < raw.size()) {
        bool matched = false;
        for (const auto& name : tag_names) {
            const std::string open = "<" + name + ">";
            const std::string close = "</" + name + ">";
            if (raw.compare(i, open.size(), open) != 0) continue;
            const auto c = raw.find(close, i + open.size());
            if (c == std::string::npos) {
                i += open.size();
            } else {
                out.push_back({name, i, c + close.size(), seen.insert(name).second});
                i = c + close.size();
            }
            matched = true;
            break;
        }
        if (!matched) ++i;
    }
    return out;
}

}  // namespace oracle
