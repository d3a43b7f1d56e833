#include "asmcrop/patterns.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace asmcrop {

namespace {

// Sector of a fine-cell center relative to the crop center.  Angles use the
// usual math convention (x right, y up), so image rows are negated.  Sector
// boundaries sit at odd multiples of 22.5 degrees; an exact boundary angle
// belongs to the counter-clockwise sector.  Returned partition numbering is
// compass order: 1=N, 2=NE, 3=E, 4=SE, 5=S, 6=SW, 7=W, 8=NW.
int direction_partition(double dx_right, double dy_down) {
    double angle = std::atan2(-dy_down, dx_right);                // (-pi, pi]
    double eighth = std::floor((angle + std::numbers::pi / 8.0) / (std::numbers::pi / 4.0));
    int ccw_from_east = static_cast<int>(eighth);                 // -4..4
    ccw_from_east = ((ccw_from_east % 8) + 8) % 8;                // 0=E,1=NE,2=N,...
    return ((10 - ccw_from_east) % 8) + 1;
}

void validate_channel_map(const GridExpansion& e, int partitions) {
    if (e.channel_map.size() != static_cast<std::size_t>(e.cells_x) * e.cells_y)
        throw std::logic_error("channel map size mismatch");
    std::vector<bool> seen(static_cast<std::size_t>(partitions), false);
    for (int v : e.channel_map) {
        if (v < 1 || v > partitions) throw std::logic_error("channel map entry out of range");
        seen[static_cast<std::size_t>(v) - 1] = true;
    }
    if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }))
        throw std::logic_error("channel map does not cover all partitions");
}

}  // namespace

CompositionPattern CompositionPattern::grid(int cols, int rows) {
    if (cols < 1 || rows < 1) throw std::invalid_argument("grid pattern needs positive cell counts");
    CompositionPattern p;
    p.kind_ = PatternKind::Grid;
    p.partitions_ = cols * rows;
    p.expansion_.cells_x = cols;
    p.expansion_.cells_y = rows;
    p.expansion_.channel_map.resize(static_cast<std::size_t>(cols) * rows);
    for (std::size_t i = 0; i < p.expansion_.channel_map.size(); ++i)
        p.expansion_.channel_map[i] = static_cast<int>(i) + 1;
    p.name_ = "grid:" + std::to_string(cols) + "x" + std::to_string(rows);
    validate_channel_map(p.expansion_, p.partitions_);
    return p;
}

CompositionPattern CompositionPattern::multi_rectangle(int rings) {
    if (rings < 1) throw std::invalid_argument("multirect pattern needs at least one ring");
    CompositionPattern p;
    p.kind_ = PatternKind::MultiRectangle;
    p.partitions_ = rings;
    int n = 2 * rings;
    p.expansion_.cells_x = n;
    p.expansion_.cells_y = n;
    p.expansion_.channel_map.resize(static_cast<std::size_t>(n) * n);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            int depth = std::min(std::min(r, c), std::min(n - 1 - r, n - 1 - c));
            p.expansion_.channel_map[static_cast<std::size_t>(r) * n + c] = rings - depth;
        }
    }
    p.name_ = "multirect:" + std::to_string(rings);
    validate_channel_map(p.expansion_, p.partitions_);
    return p;
}

CompositionPattern CompositionPattern::multi_direction() {
    CompositionPattern p;
    p.kind_ = PatternKind::MultiDirection;
    p.partitions_ = 8;
    constexpr int n = 12;
    p.expansion_.cells_x = n;
    p.expansion_.cells_y = n;
    p.expansion_.channel_map.resize(n * n);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            double dx = (c + 0.5) / n - 0.5;
            double dy = (r + 0.5) / n - 0.5;
            p.expansion_.channel_map[static_cast<std::size_t>(r) * n + c] = direction_partition(dx, dy);
        }
    }
    p.name_ = "multidir";
    validate_channel_map(p.expansion_, p.partitions_);
    return p;
}

CompositionPattern CompositionPattern::cross_rectangle() {
    // Thirds layout: 8 outer cells numbered row-major skipping the center,
    // then the 4 center quadrants (TL, TR, BL, BR) as partitions 9..12.
    CompositionPattern p;
    p.kind_ = PatternKind::CrossRectangle;
    p.partitions_ = 12;
    constexpr int n = 6;
    p.expansion_.cells_x = n;
    p.expansion_.cells_y = n;
    p.expansion_.channel_map.resize(n * n);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            int tr = r / 2;   // thirds cell
            int tc = c / 2;
            int idx;
            if (tr == 1 && tc == 1) {
                idx = 9 + (r % 2) * 2 + (c % 2);
            } else {
                int outer = tr * 3 + tc;
                if (outer > 4) --outer;   // skip the center slot
                idx = outer + 1;
            }
            p.expansion_.channel_map[static_cast<std::size_t>(r) * n + c] = idx;
        }
    }
    p.name_ = "cross";
    validate_channel_map(p.expansion_, p.partitions_);
    return p;
}

CompositionPattern CompositionPattern::parse(const std::string& name) {
    auto bad = [&]() -> std::invalid_argument {
        return std::invalid_argument("unknown pattern '" + name +
                                     "' (expected grid:XxY, multirect:R, multidir, or cross)");
    };
    if (name == "multidir") return multi_direction();
    if (name == "cross") return cross_rectangle();
    if (name.rfind("grid:", 0) == 0) {
        std::string spec = name.substr(5);
        auto sep = spec.find('x');
        if (sep == std::string::npos || sep == 0 || sep + 1 >= spec.size()) throw bad();
        int cols = 0, rows = 0;
        try {
            std::size_t used = 0;
            cols = std::stoi(spec.substr(0, sep), &used);
            if (used != sep) throw bad();
            rows = std::stoi(spec.substr(sep + 1), &used);
            if (used != spec.size() - sep - 1) throw bad();
        } catch (const std::invalid_argument&) {
            throw bad();
        } catch (const std::out_of_range&) {
            throw bad();
        }
        if (cols < 1 || rows < 1) throw bad();
        return grid(cols, rows);
    }
    if (name.rfind("multirect:", 0) == 0) {
        std::string spec = name.substr(10);
        int rings = 0;
        try {
            std::size_t used = 0;
            rings = std::stoi(spec, &used);
            if (used != spec.size()) throw bad();
        } catch (const std::invalid_argument&) {
            throw bad();
        } catch (const std::out_of_range&) {
            throw bad();
        }
        if (rings < 1) throw bad();
        return multi_rectangle(rings);
    }
    throw bad();
}

int CompositionPattern::fine_cell_index(const CropRect& crop, int i, int j) const {
    if (!crop.contains_pixel(i, j)) {
        throw std::out_of_range("pixel (" + std::to_string(i) + "," + std::to_string(j) +
                                ") lies outside the crop");
    }
    long long rel_r = i - crop.y;
    long long rel_c = j - crop.x;
    int cell_r = static_cast<int>(rel_r * expansion_.cells_y / crop.h);
    int cell_c = static_cast<int>(rel_c * expansion_.cells_x / crop.w);
    return cell_r * expansion_.cells_x + cell_c;
}

int CompositionPattern::partition_index(const CropRect& crop, int i, int j) const {
    return expansion_.channel_map[static_cast<std::size_t>(fine_cell_index(crop, i, j))];
}

}  // namespace asmcrop
