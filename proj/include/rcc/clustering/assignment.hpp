#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "rcc/csv.hpp"
#include "rcc/error.hpp"

namespace rcc {

inline constexpr int kNoise = -1;

/// Per-image cluster labels. Labels are 0..C-1 (all used) or kNoise.
class ClusterAssignment {
public:
    ClusterAssignment() = default;

    ClusterAssignment(std::vector<std::string> ids, std::vector<int> labels)
        : ids_(std::move(ids)), labels_(std::move(labels)) {
        if (ids_.size() != labels_.size()) fail(Errc::InvalidArgument, "ids and labels differ in length");
        int max_label = -1;
        for (int l : labels_) {
            if (l < kNoise) fail(Errc::InvalidArgument, "label below -1");
            max_label = std::max(max_label, l);
        }
        std::vector<bool> used(static_cast<std::size_t>(max_label + 1), false);
        for (int l : labels_)
            if (l >= 0) used[static_cast<std::size_t>(l)] = true;
        if (std::find(used.begin(), used.end(), false) != used.end())
            fail(Errc::InvalidArgument, "cluster labels are not contiguous");
        n_clusters_ = max_label + 1;
    }

    const std::vector<std::string>& ids() const { return ids_; }
    const std::vector<int>& labels() const { return labels_; }
    std::size_t size() const { return ids_.size(); }
    int n_clusters() const { return n_clusters_; }

    std::size_t n_noise() const {
        return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), kNoise));
    }

    /// Member indices per cluster, in input order.
    std::vector<std::vector<std::size_t>> members() const {
        std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(n_clusters_));
        for (std::size_t i = 0; i < labels_.size(); ++i)
            if (labels_[i] >= 0) out[static_cast<std::size_t>(labels_[i])].push_back(i);
        return out;
    }

    friend bool operator==(const ClusterAssignment&, const ClusterAssignment&) = default;

private:
    std::vector<std::string> ids_;
    std::vector<int> labels_;
    int n_clusters_ = 0;
};

/// Relabels clusters in order of first appearance; noise stays -1.
inline std::vector<int> canonical_labels(const std::vector<int>& labels) {
    std::map<int, int> remap;
    std::vector<int> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0) {
            out[i] = kNoise;
            continue;
        }
        auto [it, inserted] = remap.emplace(labels[i], static_cast<int>(remap.size()));
        out[i] = it->second;
    }
    return out;
}

inline std::string encode_assignment_csv(const ClusterAssignment& a) {
    std::ostringstream out;
    out << "id,cluster\n";
    for (std::size_t i = 0; i < a.size(); ++i) out << csv::quote(a.ids()[i]) << ',' << a.labels()[i] << '\n';
    return out.str();
}

inline void write_assignment(const ClusterAssignment& a, const std::filesystem::path& p) {
    csv::write_text(p.string(), encode_assignment_csv(a));
}

inline ClusterAssignment load_assignment(const std::filesystem::path& p) {
    const auto lines = csv::read_lines(p.string());
    if (lines.empty() || csv::split_line(lines[0]) != std::vector<std::string>{"id", "cluster"})
        fail(Errc::ParseError, "line 1: header must be id,cluster");
    std::vector<std::string> ids;
    std::vector<int> labels;
    std::unordered_set<std::string> seen;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (csv::trim(lines[i]).empty()) continue;
        const auto f = csv::split_line(lines[i]);
        if (f.size() != 2) fail(Errc::ParseError, "line " + std::to_string(i + 1) + ": expected 2 fields");
        if (!seen.insert(f[0]).second) fail(Errc::DuplicateId, f[0]);
        int label = 0;
        const auto s = csv::trim(f[1]);
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), label);
        if (ec != std::errc() || ptr != s.data() + s.size())
            fail(Errc::ParseError, "line " + std::to_string(i + 1) + ": bad cluster label");
        ids.push_back(f[0]);
        labels.push_back(label);
    }
    return ClusterAssignment(std::move(ids), std::move(labels));
}

}  // namespace rcc
