#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "rcc/core/types.hpp"
#include "rcc/csv.hpp"

namespace rcc {

enum class FeatureFormat { Csv, Fmx1 };

inline FeatureFormat format_from_extension(const std::filesystem::path& p) {
    const auto ext = p.extension().string();
    return (ext == ".csv" || ext == ".CSV") ? FeatureFormat::Csv : FeatureFormat::Fmx1;
}

namespace detail {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <class T>
void put_le(std::string& out, T v) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
    out.append(reinterpret_cast<const char*>(b), sizeof(T));
}

template <class T>
T get_le(const std::string& in, std::size_t& pos) {
    if (pos + sizeof(T) > in.size()) fail(Errc::ParseError, "FMX1: truncated file");
    unsigned char b[sizeof(T)];
    std::memcpy(b, in.data() + pos, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
    pos += sizeof(T);
    T v;
    std::memcpy(&v, b, sizeof(T));
    return v;
}

inline std::string read_binary(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) fail(Errc::MissingFile, p.string());
    return std::string(std::istreambuf_iterator<char>(in), {});
}

inline FeatureMatrix load_fmx1(const std::filesystem::path& p) {
    const std::string data = read_binary(p);
    if (data.size() < 20 || data.compare(0, 4, "FMX1") != 0) fail(Errc::ParseError, p.string() + ": bad FMX1 magic");
    std::size_t pos = 4;
    const auto n = get_le<std::uint64_t>(data, pos);
    const auto m = get_le<std::uint64_t>(data, pos);
    if (m == 0) fail(Errc::ParseError, "FMX1: zero columns");
    if (n == 0) fail(Errc::ParseError, "FMX1: zero rows");
    if (n > (data.size() - pos) / 8 / m) fail(Errc::ParseError, "FMX1: truncated value block");
    Matrix values(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
    for (std::uint64_t r = 0; r < n; ++r) {
        for (std::uint64_t c = 0; c < m; ++c) {
            const double v = get_le<double>(data, pos);
            if (!std::isfinite(v)) fail(Errc::NonFiniteValue, "row " + std::to_string(r) + ", col " + std::to_string(c));
            values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
        }
    }
    std::vector<std::string> ids;
    ids.reserve(n);
    for (std::uint64_t r = 0; r < n; ++r) {
        const auto len = get_le<std::uint32_t>(data, pos);
        if (pos + len > data.size()) fail(Errc::ParseError, "FMX1: truncated id table");
        ids.emplace_back(data.substr(pos, len));
        pos += len;
    }
    if (pos != data.size()) fail(Errc::ParseError, "FMX1: trailing bytes");
    return FeatureMatrix(std::move(ids), std::move(values));
}

inline FeatureMatrix load_feature_csv(const std::filesystem::path& p) {
    const auto lines = csv::read_lines(p.string());
    if (lines.empty()) fail(Errc::ParseError, "line 1: empty file");
    const auto header = csv::split_line(lines[0]);
    if (header.size() < 2 || header[0] != "id") fail(Errc::ParseError, "line 1: header must be id,f0,...");
    const std::size_t m = header.size() - 1;
    std::vector<std::string> ids;
    std::vector<double> flat;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (csv::trim(lines[i]).empty()) continue;
        const auto f = csv::split_line(lines[i]);
        const std::size_t row = ids.size();
        if (f.size() != m + 1) fail(Errc::RaggedRow, "row " + std::to_string(row) + " (line " + std::to_string(i + 1) + ")");
        ids.push_back(f[0]);
        for (std::size_t c = 0; c < m; ++c) {
            const auto v = csv::parse_double(f[c + 1]);
            if (!v) fail(Errc::ParseError, "line " + std::to_string(i + 1) + ": bad number '" + f[c + 1] + "'");
            if (!std::isfinite(*v)) fail(Errc::NonFiniteValue, "row " + std::to_string(row) + ", col " + std::to_string(c));
            flat.push_back(*v);
        }
    }
    if (ids.empty()) fail(Errc::ParseError, "no data rows");
    Matrix values = Eigen::Map<Matrix>(flat.data(), static_cast<Eigen::Index>(ids.size()), static_cast<Eigen::Index>(m));
    return FeatureMatrix(std::move(ids), std::move(values));
}

}  // namespace detail

/// Format chosen by content: files starting with the FMX1 magic are binary, everything else CSV.
inline FeatureMatrix load_feature_matrix(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) fail(Errc::MissingFile, p.string());
    char magic[4] = {};
    in.read(magic, 4);
    if (in.gcount() == 4 && std::memcmp(magic, "FMX1", 4) == 0) return detail::load_fmx1(p);
    return detail::load_feature_csv(p);
}

inline std::string encode_fmx1(const FeatureMatrix& m) {
    std::string out = "FMX1";
    detail::put_le<std::uint64_t>(out, m.rows());
    detail::put_le<std::uint64_t>(out, m.cols());
    const auto& v = m.values();
    for (Eigen::Index r = 0; r < v.rows(); ++r)
        for (Eigen::Index c = 0; c < v.cols(); ++c) detail::put_le<double>(out, v(r, c));
    for (const auto& id : m.ids()) {
        detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(id.size()));
        out += id;
    }
    return out;
}

inline std::string encode_feature_csv(const FeatureMatrix& m) {
    std::string out = "id";
    for (std::size_t c = 0; c < m.cols(); ++c) out += ",f" + std::to_string(c);
    out += '\n';
    const auto& v = m.values();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        out += csv::quote(m.ids()[r]);
        for (Eigen::Index c = 0; c < v.cols(); ++c) {
            out += ',';
            out += csv::format_double(v(static_cast<Eigen::Index>(r), c));
        }
        out += '\n';
    }
    return out;
}

inline void write_feature_matrix(const FeatureMatrix& m, const std::filesystem::path& p, FeatureFormat format) {
    if (m.rows() == 0 || m.cols() == 0) fail(Errc::InvalidArgument, "refusing to write an empty feature matrix");
    csv::write_text(p.string(), format == FeatureFormat::Fmx1 ? encode_fmx1(m) : encode_feature_csv(m));
}

}  // namespace rcc
