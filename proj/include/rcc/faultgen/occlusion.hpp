#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rcc/faultgen/raster.hpp"

namespace rcc {

struct Point {
    double x = 0.0, y = 0.0;
};

/// Named face key points (left_eye, right_eye, nose, mouth, chin); any may be absent.
using KeypointSet = std::map<std::string, Point>;

enum class Occlusion { Mask, Sunglasses, Eyeglasses, Hand };

inline const char* occlusion_name(Occlusion k) {
    switch (k) {
        case Occlusion::Mask: return "mask";
        case Occlusion::Sunglasses: return "sunglasses";
        case Occlusion::Eyeglasses: return "eyeglasses";
        case Occlusion::Hand: return "hand";
    }
    return "?";
}

/// Geometry knobs for the drawn occluders.
struct OcclusionStyle {
    double eye_semi_major = 0.35;  // x inter-eye distance
    double eye_semi_minor = 0.22;
    double band_half_width = 0.06;  // sunglasses bridge, x inter-eye distance
    int stroke = 3;                 // eyeglasses outline, px
    Color skin{224, 172, 105};
    double hand_fraction = 0.25;  // share of the face box covered by the hand
    double face_margin = 0.25;    // face box padding around the key points, per side
};

namespace detail {

inline double cross(Point o, Point a, Point b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

}  // namespace detail

/// Convex hull (Andrew's monotone chain), counter-clockwise in image axes.
inline std::vector<Point> convex_hull(std::vector<Point> pts) {
    std::sort(pts.begin(), pts.end(), [](Point a, Point b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
    if (pts.size() < 3) return pts;
    std::vector<Point> h(2 * pts.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        while (k >= 2 && detail::cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
        h[k++] = pts[i];
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
        while (k >= t && detail::cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
        h[k++] = pts[i];
    }
    h.resize(k - 1);
    return h;
}

/// Point-in-convex-polygon test (boundary counts as inside).
inline bool inside_convex(const std::vector<Point>& poly, Point p) {
    if (poly.size() < 3) return false;
    bool pos = false, neg = false;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const double c = detail::cross(poly[i], poly[(i + 1) % poly.size()], p);
        pos |= c > 0;
        neg |= c < 0;
    }
    return !(pos && neg);
}

/// Polygon of the mask: nose, two cheeks, two jaw corners and the chin.
/// Cheek spread comes from the inter-eye distance when both eyes are known,
/// otherwise from the nose-to-chin height.
inline std::vector<Point> mask_polygon(const KeypointSet& kp) {
    const Point nose = kp.at("nose"), mouth = kp.at("mouth"), chin = kp.at("chin");
    const double height = std::max(1.0, std::hypot(chin.x - nose.x, chin.y - nose.y));
    double half = 0.9 * height;
    if (kp.count("left_eye") && kp.count("right_eye"))
        half = 0.75 * std::hypot(kp.at("right_eye").x - kp.at("left_eye").x, kp.at("right_eye").y - kp.at("left_eye").y);
    const double cheek_y = nose.y + 0.2 * (chin.y - nose.y);
    const double jaw_y = mouth.y + 0.5 * (chin.y - mouth.y);
    return convex_hull({nose,
                        {nose.x - half, cheek_y},
                        {nose.x + half, cheek_y},
                        {chin.x - 0.7 * half, jaw_y},
                        {chin.x + 0.7 * half, jaw_y},
                        mouth,
                        chin});
}

/// Axis box around the face: key point bounds padded by `margin` per side.
/// A single key point gives a square of 30% of the short image side.
struct Box {
    double x0, y0, x1, y1;
    double area() const { return (x1 - x0) * (y1 - y0); }
};

inline Box face_box(const KeypointSet& kp, const Raster& img, double margin) {
    if (kp.empty()) fail(Errc::MissingKeypoints, "hand: no face key point");
    Box b{1e300, 1e300, -1e300, -1e300};
    for (const auto& [name, p] : kp) {
        b.x0 = std::min(b.x0, p.x);
        b.y0 = std::min(b.y0, p.y);
        b.x1 = std::max(b.x1, p.x);
        b.y1 = std::max(b.y1, p.y);
    }
    const double side = 0.3 * std::min(img.width, img.height);
    if (b.x1 - b.x0 < 1.0) {
        b.x0 -= side / 2;
        b.x1 += side / 2;
    }
    if (b.y1 - b.y0 < 1.0) {
        b.y0 -= side / 2;
        b.y1 += side / 2;
    }
    const double mx = margin * (b.x1 - b.x0), my = margin * (b.y1 - b.y0);
    return {b.x0 - mx, b.y0 - my, b.x1 + mx, b.y1 + my};
}

namespace detail {

// Ellipse level value at p: < 1 inside. Major axis along `angle`.
inline double ellipse_level(Point c, double a, double b, double angle, Point p) {
    const double dx = p.x - c.x, dy = p.y - c.y;
    const double u = dx * std::cos(angle) + dy * std::sin(angle);
    const double v = -dx * std::sin(angle) + dy * std::cos(angle);
    return (u * u) / (a * a) + (v * v) / (b * b);
}

template <class Pred>
void fill_where(Raster& img, Color col, Pred&& pred) {
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            if (pred(Point{x + 0.5, y + 0.5})) img.set(x, y, col.r, col.g, col.b);
}

inline void require(const KeypointSet& kp, Occlusion kind, std::initializer_list<const char*> names) {
    for (const char* n : names)
        if (!kp.count(n)) fail(Errc::MissingKeypoints, std::string(occlusion_name(kind)) + ": missing " + n);
}

}  // namespace detail

/// Draws the occluder over `img` using pixel-center sampling.
inline Raster overlay_occlusion(const Raster& img, Occlusion kind, const KeypointSet& kp, const OcclusionStyle& st = {}) {
    for (const auto& [name, p] : kp)
        if (!(p.x >= 0 && p.y >= 0 && p.x <= img.width && p.y <= img.height))
            fail(Errc::OutOfBounds, "key point " + name + " lies outside the image");
    Raster out = img;
    switch (kind) {
        case Occlusion::Mask: {
            detail::require(kp, kind, {"nose", "mouth", "chin"});
            const auto poly = mask_polygon(kp);
            detail::fill_where(out, {255, 255, 255}, [&](Point p) { return inside_convex(poly, p); });
            break;
        }
        case Occlusion::Sunglasses:
        case Occlusion::Eyeglasses: {
            detail::require(kp, kind, {"left_eye", "right_eye"});
            const Point l = kp.at("left_eye"), r = kp.at("right_eye");
            const double dist = std::max(1.0, std::hypot(r.x - l.x, r.y - l.y));
            const double angle = std::atan2(r.y - l.y, r.x - l.x);
            const double a = st.eye_semi_major * dist, b = st.eye_semi_minor * dist;
            if (kind == Occlusion::Sunglasses) {
                const double hw = st.band_half_width * dist;
                detail::fill_where(out, {0, 0, 0}, [&](Point p) {
                    if (detail::ellipse_level(l, a, b, angle, p) <= 1.0 || detail::ellipse_level(r, a, b, angle, p) <= 1.0)
                        return true;
                    // Band along the eye axis between the two centers.
                    const double dx = p.x - l.x, dy = p.y - l.y;
                    const double along = dx * std::cos(angle) + dy * std::sin(angle);
                    const double across = -dx * std::sin(angle) + dy * std::cos(angle);
                    return along >= 0 && along <= dist && std::abs(across) <= hw;
                });
            } else {
                // Outline `stroke` px thick straddling each ellipse, plus a bridge of the same thickness.
                const double h = st.stroke / 2.0;
                detail::fill_where(out, {0, 0, 0}, [&](Point p) {
                    for (Point c : {l, r}) {
                        if (detail::ellipse_level(c, a + h, b + h, angle, p) <= 1.0 &&
                            detail::ellipse_level(c, a - h, b - h, angle, p) > 1.0)
                            return true;
                    }
                    const double dx = p.x - l.x, dy = p.y - l.y;
                    const double along = dx * std::cos(angle) + dy * std::sin(angle);
                    const double across = -dx * std::sin(angle) + dy * std::cos(angle);
                    return along >= a && along <= dist - a && std::abs(across) <= h;
                });
            }
            break;
        }
        case Occlusion::Hand: {
            const Box face = face_box(kp, img, st.face_margin);
            const double scale = std::sqrt(std::clamp(st.hand_fraction, 0.0, 1.0));
            const double w = (face.x1 - face.x0) * scale, hgt = (face.y1 - face.y0) * scale;
            // Centered under the face center so the hand sits over nose and mouth.
            const double cx = (face.x0 + face.x1) / 2, cy = face.y0 + 0.6 * (face.y1 - face.y0);
            const double x0 = cx - w / 2, y0 = std::max(face.y0, cy - hgt / 2);
            const double x1 = x0 + w, y1 = std::min(face.y1, y0 + hgt);
            const double rad = 0.25 * std::min(w, hgt);
            detail::fill_where(out, st.skin, [&](Point p) {
                if (p.x < x0 || p.x > x1 || p.y < y0 || p.y > y1) return false;
                const double qx = std::clamp(p.x, x0 + rad, x1 - rad);
                const double qy = std::clamp(p.y, y0 + rad, y1 - rad);
                return std::hypot(p.x - qx, p.y - qy) <= rad;
            });
            break;
        }
    }
    return out;
}

// Keypoint file: {"<image_id>": {"left_eye": [x, y], ...}, ...}

inline std::map<std::string, KeypointSet> parse_keypoints(const nlohmann::json& j) {
    if (!j.is_object()) fail(Errc::ParseError, "keypoint file must be a JSON object");
    std::map<std::string, KeypointSet> out;
    for (const auto& [id, points] : j.items()) {
        KeypointSet kp;
        for (const auto& [name, xy] : points.items()) {
            if (!xy.is_array() || xy.size() != 2) fail(Errc::ParseError, "keypoint " + id + "/" + name + " must be [x, y]");
            kp[name] = {xy[0].get<double>(), xy[1].get<double>()};
        }
        out[id] = std::move(kp);
    }
    return out;
}

}  // namespace rcc
