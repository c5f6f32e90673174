#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "rcc/faultgen/raster.hpp"
#include "rcc/random.hpp"

namespace rcc {

/// Additive Gaussian noise, sigma in normalized [0, 1] units:
///   v' = clamp(round(v + 255 g)), g ~ N(0, sigma^2), one draw per channel.
inline Raster add_gaussian_noise(const Raster& img, double sigma = 0.1, std::uint64_t seed = 0) {
    if (!(sigma >= 0.0)) fail(Errc::InvalidArgument, "noise sigma must be >= 0");
    if (sigma == 0.0) return img;
    Rng rng(seed);
    Raster out = img;
    for (auto& v : out.rgb) v = clamp_byte(static_cast<double>(v) + 255.0 * sigma * rng.normal());
    return out;
}

/// Normalized 1-D Gaussian weights for offsets -r..r, r = ceil(3 sigma).
inline std::vector<double> gaussian_kernel(double sigma) {
    const int r = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k(static_cast<std::size_t>(2 * r + 1));
    double sum = 0.0;
    for (int i = -r; i <= r; ++i) {
        const double w = std::exp(-0.5 * (i * i) / (sigma * sigma));
        k[static_cast<std::size_t>(i + r)] = w;
        sum += w;
    }
    for (auto& w : k) w /= sum;
    return k;
}

/// Separable Gaussian blur with sigma = radius and clamp-to-edge borders.
/// Both passes run in double precision; rounding happens once at the end.
inline Raster gaussian_blur(const Raster& img, double radius = 30.0) {
    if (!(radius >= 0.0)) fail(Errc::InvalidArgument, "blur radius must be >= 0");
    if (radius == 0.0) return img;
    const auto k = gaussian_kernel(radius);
    const int r = static_cast<int>(k.size() / 2);
    const int w = img.width, h = img.height;
    std::vector<double> tmp(img.rgb.size());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c) {
                double s = 0.0;
                for (int i = -r; i <= r; ++i) s += k[static_cast<std::size_t>(i + r)] * img.at(std::clamp(x + i, 0, w - 1), y, c);
                tmp[img.offset(x, y) + static_cast<std::size_t>(c)] = s;
            }
    Raster out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c) {
                double s = 0.0;
                for (int i = -r; i <= r; ++i)
                    s += k[static_cast<std::size_t>(i + r)] * tmp[img.offset(x, std::clamp(y + i, 0, h - 1)) + static_cast<std::size_t>(c)];
                out.at(x, y, c) = clamp_byte(s);
            }
    return out;
}

/// Brightness scaling: v' = clamp(round(v * factor)).
inline Raster darken(const Raster& img, double factor = 0.3) {
    if (!(factor >= 0.0 && factor <= 1.0)) fail(Errc::InvalidArgument, "darken factor must lie in [0, 1]");
    Raster out = img;
    for (auto& v : out.rgb) v = clamp_byte(static_cast<double>(v) * factor);
    return out;
}

/// Shrink amount used when none is given: a third of the short side for
/// large images (1200 -> 400), 22% otherwise (320 -> 70).
inline int default_shrink_delta(int width, int height) {
    const int m = std::min(width, height);
    return static_cast<int>(std::lround(m >= 1200 ? m / 3.0 : 0.22 * m));
}

/// Bilinear resize with pixel-center alignment.
inline Raster resize_bilinear(const Raster& img, int w, int h) {
    Raster out(w, h);
    const double sx = static_cast<double>(img.width) / w;
    const double sy = static_cast<double>(img.height) / h;
    for (int y = 0; y < h; ++y) {
        const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(img.height - 1));
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, img.height - 1);
        const double ty = fy - y0;
        for (int x = 0; x < w; ++x) {
            const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(img.width - 1));
            const int x0 = static_cast<int>(fx);
            const int x1 = std::min(x0 + 1, img.width - 1);
            const double tx = fx - x0;
            for (int c = 0; c < 3; ++c) {
                const double top = img.at(x0, y0, c) * (1 - tx) + img.at(x1, y0, c) * tx;
                const double bottom = img.at(x0, y1, c) * (1 - tx) + img.at(x1, y1, c) * tx;
                out.at(x, y, c) = clamp_byte(top * (1 - ty) + bottom * ty);
            }
        }
    }
    return out;
}

/// Content resized to (w - delta) x (h - delta) and centered on a black
/// canvas of the original size (left/top border = delta / 2, rounded down).
inline Raster scale_shrink(const Raster& img, int delta) {
    if (delta <= 0 || delta >= std::min(img.width, img.height))
        fail(Errc::DeltaTooLarge, "shrink delta " + std::to_string(delta) + " must lie in (0, min side)");
    const Raster small = resize_bilinear(img, img.width - delta, img.height - delta);
    Raster out(img.width, img.height);
    const int off = delta / 2;
    for (int y = 0; y < small.height; ++y)
        for (int x = 0; x < small.width; ++x)
            for (int c = 0; c < 3; ++c) out.at(x + off, y + off, c) = small.at(x, y, c);
    return out;
}

/// Alpha-composites `sprite` with its top-left corner at (x, y).
inline Raster paste_object(const Raster& img, const Sprite& sprite, int x, int y) {
    const auto& s = sprite.image;
    if (sprite.alpha.size() != static_cast<std::size_t>(s.width) * static_cast<std::size_t>(s.height))
        fail(Errc::InvalidArgument, "sprite alpha does not match its size");
    if (x < 0 || y < 0 || x + s.width > img.width || y + s.height > img.height)
        fail(Errc::OutOfBounds, "sprite does not fit inside the image at the given position");
    Raster out = img;
    for (int sy = 0; sy < s.height; ++sy)
        for (int sx = 0; sx < s.width; ++sx) {
            const double a = sprite.alpha[static_cast<std::size_t>(sy) * static_cast<std::size_t>(s.width) + static_cast<std::size_t>(sx)] / 255.0;
            for (int c = 0; c < 3; ++c)
                out.at(x + sx, y + sy, c) = clamp_byte(a * s.at(sx, sy, c) + (1.0 - a) * img.at(x + sx, y + sy, c));
        }
    return out;
}

}  // namespace rcc
