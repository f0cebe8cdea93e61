#include "cadence/grid_world.hpp"

#include <algorithm>
#include <queue>
#include <stdexcept>

namespace cadence {

GridWorld::GridWorld(int width, int height, double cell_size, uint64_t seed)
    : width_(width),
      height_(height),
      cell_size_(cell_size),
      seed_(seed),
      occupancy_(size_t(width) * height, 0),
      material_(size_t(width) * height, uint8_t(Material::Ground)) {
    if (width < 4 || height < 4) throw std::invalid_argument("world too small");
    if (cell_size <= 0) throw std::invalid_argument("cell_size must be positive");
}

void GridWorld::set_cell(int cx, int cy, bool occupied, Material m) {
    occupancy_[index(cx, cy)] = occupied ? 1 : 0;
    material_[index(cx, cy)] = uint8_t(m);
}

void GridWorld::rebuild_free_lists() {
    free_training_.clear();
    free_holdout_.clear();
    for (int cy = 0; cy < height_; ++cy) {
        for (int cx = 0; cx < width_; ++cx) {
            if (occupied(cx, cy)) continue;
            if (region(cx, cy) == Region::Holdout) {
                free_holdout_.push_back(index(cx, cy));
            } else {
                free_training_.push_back(index(cx, cy));
            }
        }
    }
}

std::vector<std::string> GridWorld::dump_rows() const {
    static const char glyph[4] = {'.', 'H', 'T', 'C'};
    std::vector<std::string> rows;
    rows.reserve(height_);
    for (int cy = height_ - 1; cy >= 0; --cy) {
        std::string row(width_, '.');
        for (int cx = 0; cx < width_; ++cx) {
            row[cx] = occupied(cx, cy) ? glyph[uint8_t(material(cx, cy))] : '.';
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

GridWorld GridWorld::from_rows(const std::vector<std::string>& rows,
                               double cell_size, uint64_t seed) {
    if (rows.empty()) throw std::invalid_argument("empty grid dump");
    const int height = int(rows.size());
    const int width = int(rows.front().size());
    GridWorld w(width, height, cell_size, seed);
    for (int r = 0; r < height; ++r) {
        if (int(rows[r].size()) != width) throw std::invalid_argument("ragged grid dump");
        const int cy = height - 1 - r;
        for (int cx = 0; cx < width; ++cx) {
            switch (rows[r][cx]) {
                case '.': break;
                case 'H': w.set_cell(cx, cy, true, Material::House); break;
                case 'T': w.set_cell(cx, cy, true, Material::Tree); break;
                case 'C': w.set_cell(cx, cy, true, Material::Car); break;
                default: throw std::invalid_argument("unknown grid glyph");
            }
        }
    }
    w.rebuild_free_lists();
    return w;
}

double albedo(Material m) {
    switch (m) {
        case Material::Ground: return 0.55;
        case Material::House: return 0.85;
        case Material::Tree: return 0.65;
        case Material::Car: return 0.75;
    }
    return 0.55;
}

namespace {

// Free space is connected iff every free cell is reachable from the first
// one. Connectivity also rules out isolated free cells.
bool free_space_connected(const GridWorld& w) {
    const int W = w.width(), H = w.height();
    std::vector<uint8_t> seen(size_t(W) * H, 0);
    int first_x = -1, first_y = -1;
    size_t free_total = 0;
    for (int cy = 0; cy < H && first_x < 0; ++cy) {
        for (int cx = 0; cx < W; ++cx) {
            if (!w.occupied(cx, cy)) {
                first_x = cx;
                first_y = cy;
                break;
            }
        }
    }
    for (int cy = 0; cy < H; ++cy) {
        for (int cx = 0; cx < W; ++cx) {
            if (!w.occupied(cx, cy)) ++free_total;
        }
    }
    if (first_x < 0) return false;
    std::queue<std::pair<int, int>> q;
    q.push({first_x, first_y});
    seen[w.index(first_x, first_y)] = 1;
    size_t reached = 0;
    static const int dx[4] = {1, -1, 0, 0};
    static const int dy[4] = {0, 0, 1, -1};
    while (!q.empty()) {
        auto [cx, cy] = q.front();
        q.pop();
        ++reached;
        for (int d = 0; d < 4; ++d) {
            const int nx = cx + dx[d], ny = cy + dy[d];
            if (!w.in_bounds(nx, ny) || w.occupied(nx, ny)) continue;
            if (seen[w.index(nx, ny)]) continue;
            seen[w.index(nx, ny)] = 1;
            q.push({nx, ny});
        }
    }
    return reached == free_total;
}

// Road corridor lines: fixed offsets jittered per seed, never on the border.
std::vector<int> road_lines(int extent, int period, Rng& rng) {
    std::vector<int> lines;
    if (period <= 0) return lines;
    for (int base = period / 2; base < extent - 1; base += period) {
        int line = base + int(rng.range(-2, 2));
        line = std::clamp(line, 1, extent - 2);
        lines.push_back(line);
    }
    return lines;
}

GridWorld generate_attempt(uint64_t seed, uint64_t attempt_seed,
                           const WorldGenParams& p) {
    GridWorld w(p.width, p.height, p.cell_size, seed);
    Rng rng(attempt_seed);
    const int W = p.width, H = p.height;

    for (int cx = 0; cx < W; ++cx) {
        w.set_cell(cx, 0, true, Material::House);
        w.set_cell(cx, H - 1, true, Material::House);
    }
    for (int cy = 0; cy < H; ++cy) {
        w.set_cell(0, cy, true, Material::House);
        w.set_cell(W - 1, cy, true, Material::House);
    }

    std::vector<uint8_t> road(size_t(W) * H, 0);
    for (int y : road_lines(H, p.road_period, rng)) {
        for (int cx = 1; cx < W - 1; ++cx) road[w.index(cx, y)] = 1;
    }
    for (int x : road_lines(W, p.road_period, rng)) {
        for (int cy = 1; cy < H - 1; ++cy) road[w.index(x, cy)] = 1;
    }

    // House blocks. Placement skips roads and previously occupied cells so
    // corridors stay free.
    const long target_house_cells = long(p.house_density * W * H);
    long placed = 0;
    int tries = 0;
    const int max_tries = 40 * W;
    while (placed < target_house_cells && tries < max_tries) {
        ++tries;
        const int bw = int(rng.range(p.house_min, p.house_max));
        const int bh = int(rng.range(p.house_min, p.house_max));
        const int x0 = int(rng.range(1, W - 1 - bw));
        const int y0 = int(rng.range(1, H - 1 - bh));
        bool ok = true;
        for (int cy = y0; cy < y0 + bh && ok; ++cy) {
            for (int cx = x0; cx < x0 + bw && ok; ++cx) {
                if (road[w.index(cx, cy)] || w.occupied(cx, cy)) ok = false;
            }
        }
        if (!ok) continue;
        for (int cy = y0; cy < y0 + bh; ++cy) {
            for (int cx = x0; cx < x0 + bw; ++cx) {
                w.set_cell(cx, cy, true, Material::House);
            }
        }
        placed += long(bw) * bh;
    }

    auto scatter = [&](double density, Material m) {
        const long target = long(density * W * H);
        long done = 0;
        long t = 0;
        const long scatter_tries = 30 * target + 30;
        while (done < target && t < scatter_tries) {
            ++t;
            const int cx = int(rng.range(1, W - 2));
            const int cy = int(rng.range(1, H - 2));
            if (w.occupied(cx, cy) || road[w.index(cx, cy)]) continue;
            w.set_cell(cx, cy, true, m);
            ++done;
        }
    };
    scatter(p.tree_density, Material::Tree);
    scatter(p.car_density, Material::Car);

    w.rebuild_free_lists();
    return w;
}

}  // namespace

GridWorld generate_world(uint64_t seed, const WorldGenParams& p) {
    if (p.width < 32 || p.height < 32) {
        throw std::invalid_argument("generate_world: map must be at least 32x32");
    }
    for (double d : {p.house_density, p.tree_density, p.car_density}) {
        if (d < 0.0 || d > 1.0) {
            throw std::invalid_argument("generate_world: densities must be in [0,1]");
        }
    }
    for (int attempt = 0; attempt < p.max_attempts; ++attempt) {
        GridWorld w = generate_attempt(seed, hash_combine(seed, uint64_t(attempt)), p);
        const double free_frac =
            double(w.free_cell_count()) / (double(p.width) * p.height);
        if (free_frac < p.min_free_fraction) continue;
        if (!free_space_connected(w)) continue;
        return w;
    }
    throw std::runtime_error(
        "generate_world: no connected layout found; densities too high");
}

}  // namespace cadence
