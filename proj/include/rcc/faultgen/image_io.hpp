#pragma once

#include <cctype>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include <png.h>

#include "rcc/faultgen/raster.hpp"

namespace rcc {

namespace detail {

inline std::string lower_ext(const std::filesystem::path& p) {
    auto e = p.extension().string();
    for (auto& ch : e) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return e;
}

}  // namespace detail

// Binary PPM (P6, maxval 255).

inline Raster read_ppm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::MissingFile, path.string());
    auto token = [&]() {
        std::string t;
        char ch;
        while (in.get(ch)) {
            if (ch == '#') {
                std::string skip;
                std::getline(in, skip);
                continue;
            }
            if (std::isspace(static_cast<unsigned char>(ch))) {
                if (!t.empty()) break;
                continue;
            }
            t.push_back(ch);
        }
        return t;
    };
    if (token() != "P6") fail(Errc::ParseError, path.string() + ": not a binary PPM");
    int w = 0, h = 0, maxval = 0;
    try {
        w = std::stoi(token());
        h = std::stoi(token());
        maxval = std::stoi(token());
    } catch (const std::exception&) {
        fail(Errc::ParseError, path.string() + ": bad PPM header");
    }
    if (maxval != 255) fail(Errc::ParseError, path.string() + ": only maxval 255 is supported");
    Raster r(w, h);
    in.read(reinterpret_cast<char*>(r.rgb.data()), static_cast<std::streamsize>(r.rgb.size()));
    if (in.gcount() != static_cast<std::streamsize>(r.rgb.size())) fail(Errc::ParseError, path.string() + ": truncated PPM");
    return r;
}

inline void write_ppm(const Raster& r, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(Errc::IoError, path.string());
    out << "P6\n" << r.width << ' ' << r.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(r.rgb.data()), static_cast<std::streamsize>(r.rgb.size()));
    if (!out) fail(Errc::IoError, path.string());
}

// PNG through libpng's simplified API.

namespace detail {

inline std::vector<std::uint8_t> read_png_pixels(const std::filesystem::path& path, png_uint_32 format, int& w, int& h) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::MissingFile, path.string());
    const std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size()))
        fail(Errc::ParseError, path.string() + ": " + img.message);
    img.format = format;
    std::vector<std::uint8_t> px(PNG_IMAGE_SIZE(img));
    if (!png_image_finish_read(&img, nullptr, px.data(), 0, nullptr)) {
        png_image_free(&img);
        fail(Errc::ParseError, path.string() + ": " + img.message);
    }
    w = static_cast<int>(img.width);
    h = static_cast<int>(img.height);
    return px;
}

inline void write_png_pixels(const std::filesystem::path& path, const std::uint8_t* px, int w, int h, png_uint_32 format) {
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    img.width = static_cast<png_uint_32>(w);
    img.height = static_cast<png_uint_32>(h);
    img.format = format;
    if (!png_image_write_to_file(&img, path.string().c_str(), 0, px, 0, nullptr))
        fail(Errc::IoError, path.string() + ": " + img.message);
}

}  // namespace detail

inline Raster read_png(const std::filesystem::path& path) {
    int w = 0, h = 0;
    auto px = detail::read_png_pixels(path, PNG_FORMAT_RGB, w, h);
    Raster r;
    r.width = w;
    r.height = h;
    r.rgb = std::move(px);
    return r;
}

inline void write_png(const Raster& r, const std::filesystem::path& path) {
    detail::write_png_pixels(path, r.rgb.data(), r.width, r.height, PNG_FORMAT_RGB);
}

/// RGBA PNG split into colour and alpha.
inline Sprite read_sprite(const std::filesystem::path& path) {
    int w = 0, h = 0;
    const auto px = detail::read_png_pixels(path, PNG_FORMAT_RGBA, w, h);
    Sprite s{Raster(w, h), std::vector<std::uint8_t>(static_cast<std::size_t>(w) * static_cast<std::size_t>(h))};
    for (std::size_t i = 0; i < s.alpha.size(); ++i) {
        for (std::size_t c = 0; c < 3; ++c) s.image.rgb[i * 3 + c] = px[i * 4 + c];
        s.alpha[i] = px[i * 4 + 3];
    }
    return s;
}

inline void write_sprite(const Sprite& s, const std::filesystem::path& path) {
    std::vector<std::uint8_t> px(s.alpha.size() * 4);
    for (std::size_t i = 0; i < s.alpha.size(); ++i) {
        for (std::size_t c = 0; c < 3; ++c) px[i * 4 + c] = s.image.rgb[i * 3 + c];
        px[i * 4 + 3] = s.alpha[i];
    }
    detail::write_png_pixels(path, px.data(), s.image.width, s.image.height, PNG_FORMAT_RGBA);
}

/// Dispatch on extension: .png or .ppm.
inline Raster load_image(const std::filesystem::path& path) {
    const auto e = detail::lower_ext(path);
    if (e == ".png") return read_png(path);
    if (e == ".ppm") return read_ppm(path);
    fail(Errc::InvalidArgument, "unsupported image format: " + path.string());
}

inline void save_image(const Raster& r, const std::filesystem::path& path) {
    const auto e = detail::lower_ext(path);
    if (e == ".png") return write_png(r, path);
    if (e == ".ppm") return write_ppm(r, path);
    fail(Errc::InvalidArgument, "unsupported image format: " + path.string());
}

}  // namespace rcc
