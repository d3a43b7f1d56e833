#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace asmcrop {

// Axis-aligned rectangular crop in integer pixel coordinates.
// x/y is the top-left corner (x = column, y = row), w/h the size in pixels.
struct CropRect {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;

    long long area() const { return static_cast<long long>(w) * h; }
    int right() const { return x + w; }    // exclusive
    int bottom() const { return y + h; }   // exclusive

    // Pixel (i, j) = (row, col) in absolute image coordinates.
    bool contains_pixel(int i, int j) const {
        return j >= x && j < x + w && i >= y && i < y + h;
    }

    bool well_formed() const { return x >= 0 && y >= 0 && w >= 1 && h >= 1; }

    bool inside_image(int image_w, int image_h) const {
        return well_formed() && x + w <= image_w && y + h <= image_h;
    }

    friend bool operator==(const CropRect&, const CropRect&) = default;
};

inline void require_crop_in_image(const CropRect& crop, int image_w, int image_h) {
    if (!crop.inside_image(image_w, image_h)) {
        throw std::invalid_argument(
            "crop (" + std::to_string(crop.x) + "," + std::to_string(crop.y) + "," +
            std::to_string(crop.w) + "," + std::to_string(crop.h) + ") does not lie inside a " +
            std::to_string(image_w) + "x" + std::to_string(image_h) + " image");
    }
}

// Circular crop. The enclosing square is the axis-aligned square whose
// inscribed circle this is; its partition layout drives per-pixel scores.
struct CropCircle {
    double cx = 0.0;   // center, column coordinate
    double cy = 0.0;   // center, row coordinate
    double r = 0.0;
    CropRect enclosing_square;

    // Inscribed circle of a square crop.
    static CropCircle inscribed(const CropRect& square) {
        if (square.w != square.h) throw std::invalid_argument("inscribed circle requires a square crop");
        if (square.w < 1) throw std::invalid_argument("degenerate square crop");
        CropCircle c;
        c.cx = square.x + square.w / 2.0;
        c.cy = square.y + square.h / 2.0;
        c.r = square.w / 2.0;
        c.enclosing_square = square;
        return c;
    }

    // Rounding rule: square side = round(2r), top-left = round(center - r).
    static CropCircle from_center(double cx, double cy, double r) {
        if (!(r > 0.0)) throw std::invalid_argument("circle radius must be positive");
        CropCircle c;
        c.cx = cx;
        c.cy = cy;
        c.r = r;
        int side = static_cast<int>(std::lround(2.0 * r));
        c.enclosing_square = CropRect{static_cast<int>(std::lround(cx - r)),
                                      static_cast<int>(std::lround(cy - r)), side, side};
        return c;
    }

    // Membership rule: the pixel center (j + 0.5, i + 0.5) lies within distance r.
    bool contains_pixel(int i, int j) const {
        double dx = j + 0.5 - cx;
        double dy = i + 0.5 - cy;
        return dx * dx + dy * dy <= r * r;
    }

    bool inside_image(int image_w, int image_h) const {
        return r > 0.0 && enclosing_square.inside_image(image_w, image_h);
    }
};

// Simple row-major 2-D field of doubles (heat maps, saliency-like planes).
struct ScalarField {
    int height = 0;
    int width = 0;
    std::vector<double> values;

    ScalarField() = default;
    ScalarField(int h, int w, double fill = 0.0)
        : height(h), width(w), values(static_cast<std::size_t>(h) * w, fill) {}

    double at(int i, int j) const { return values[static_cast<std::size_t>(i) * width + j]; }
    double& at(int i, int j) { return values[static_cast<std::size_t>(i) * width + j]; }
};

}  // namespace asmcrop
