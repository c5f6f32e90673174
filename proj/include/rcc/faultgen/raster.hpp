#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "rcc/error.hpp"

namespace rcc {

/// 8-bit RGB image, row-major, three bytes per pixel.
struct Raster {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> rgb;

    Raster() = default;
    Raster(int w, int h, std::uint8_t fill = 0) : width(w), height(h) {
        if (w <= 0 || h <= 0) fail(Errc::InvalidArgument, "raster dimensions must be positive");
        rgb.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3, fill);
    }

    std::size_t offset(int x, int y) const {
        return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) * 3;
    }
    std::uint8_t& at(int x, int y, int c) { return rgb[offset(x, y) + static_cast<std::size_t>(c)]; }
    std::uint8_t at(int x, int y, int c) const { return rgb[offset(x, y) + static_cast<std::size_t>(c)]; }

    void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
        const auto o = offset(x, y);
        rgb[o] = r;
        rgb[o + 1] = g;
        rgb[o + 2] = b;
    }

    bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }

    friend bool operator==(const Raster&, const Raster&) = default;
};

/// RGB image plus a per-pixel alpha mask (0 transparent, 255 opaque).
struct Sprite {
    Raster image;
    std::vector<std::uint8_t> alpha;
};

struct Color {
    std::uint8_t r = 0, g = 0, b = 0;
};

inline std::uint8_t clamp_byte(double v) { return static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0, 255.0)); }

}  // namespace rcc
