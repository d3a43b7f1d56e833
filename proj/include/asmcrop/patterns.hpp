#pragma once

#include <string>
#include <vector>

#include "asmcrop/geometry.hpp"

namespace asmcrop {

enum class PatternKind { Grid, MultiRectangle, MultiDirection, CrossRectangle };

// Uniform fine grid a pattern expands to for cell-wise pooling.
// channel_map assigns every fine cell (row-major) a coarse partition in 1..L;
// every partition appears at least once.
struct GridExpansion {
    int cells_x = 0;                // fine cells along the width
    int cells_y = 0;                // fine cells along the height
    std::vector<int> channel_map;   // size cells_x * cells_y, values in 1..L
};

// A fixed decomposition of any crop into L non-overlapping partitions.
//
// Supported layouts:
//   grid:XxY     X columns by Y rows of equal cells, L = X*Y
//   multirect:R  R concentric rectangular rings (ring 1 = center), L = R
//   multidir     8 angular sectors around the crop center, L = 8
//   cross        rule-of-thirds 3x3 with the center cell split into 4
//                quadrants by the half lines, L = 12
class CompositionPattern {
public:
    static CompositionPattern grid(int cols, int rows);
    static CompositionPattern multi_rectangle(int rings = 3);
    static CompositionPattern multi_direction();
    static CompositionPattern cross_rectangle();

    // Parses the CLI/config grammar: grid:XxY | multirect:R | multidir | cross.
    static CompositionPattern parse(const std::string& name);

    PatternKind kind() const { return kind_; }
    int partition_count() const { return partitions_; }   // L
    const GridExpansion& expansion() const { return expansion_; }
    const std::string& name() const { return name_; }

    // Partition index of pixel (i, j) = (row, col) inside `crop`, in 1..L.
    // Pixels are binned into the fine grid with the floor rule
    //   cell_row = floor((i - crop.y) * cells_y / crop.h)
    // and mapped through channel_map.  Throws if the pixel is outside the crop.
    int partition_index(const CropRect& crop, int i, int j) const;

    // Fine-cell index (row-major) of a pixel, same floor rule, no mapping.
    int fine_cell_index(const CropRect& crop, int i, int j) const;

    // A crop is poolable only if every fine cell is nonempty.
    bool crop_big_enough(const CropRect& crop) const {
        return crop.w >= expansion_.cells_x && crop.h >= expansion_.cells_y;
    }

private:
    CompositionPattern() = default;

    PatternKind kind_ = PatternKind::Grid;
    int partitions_ = 0;
    GridExpansion expansion_;
    std::string name_;
};

// Pixel range [begin, end) of fine cell `cell` along an axis split into
// `cells` bins over `extent` pixels, consistent with the floor rule above.
inline int fine_cell_begin(int cell, int cells, int extent) {
    return static_cast<int>((static_cast<long long>(cell) * extent + cells - 1) / cells);
}

}  // namespace asmcrop
