// Copyright Contributors to the nvstream project
// SPDX-License-Identifier: Apache-2.0

#include "io/report.hpp"

#include "common/error.hpp"
#include "io/dataset.hpp"
#include "io/image_io.hpp"
#include "io/pose_file.hpp"
#include "metrics/metrics.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <regex>

namespace nvs {

namespace fs = std::filesystem;

namespace {

QualityRow compare_dir(const std::string &name, const fs::path &pred, const fs::path &gt) {
    const auto pf = list_frames(pred);
    const auto gf = list_frames(gt);
    if (pf.empty())
        throw IoError(pred.string() + " holds no frames");
    if (pf.size() != gf.size())
        throw IoError(name + ": " + std::to_string(pf.size()) + " predicted frames but " +
                      std::to_string(gf.size()) + " references in " + gt.string());
    QualityRow row;
    row.name = name;
    row.frames = pf.size();
    std::vector<FrameBuffer> outs, refs;
    for (std::size_t i = 0; i < pf.size(); ++i) {
        const auto a = read_image(pf[i]);
        const auto b = read_image(gf[i]);
        row.lossy = row.lossy || a.lossy || b.lossy;
        if (a.image.width != b.image.width || a.image.height != b.image.height)
            throw IoError(name + ": " + pf[i].filename().string() + " is " +
                          std::to_string(a.image.width) + "x" + std::to_string(a.image.height) +
                          ", reference is " + std::to_string(b.image.width) + "x" +
                          std::to_string(b.image.height));
        outs.push_back(FrameBuffer::from_rgb8(a.image));
        refs.push_back(FrameBuffer::from_rgb8(b.image));
    }
    row.psnr_db = stream_psnr(outs, refs);
    return row;
}

std::optional<double> read_amortized(const fs::path &dir) {
    std::ifstream in(dir / "summary.json");
    if (!in)
        return std::nullopt;
    try {
        const auto doc = nlohmann::json::parse(in);
        if (doc.contains("amortized_ms"))
            return doc["amortized_ms"].get<double>();
    } catch (const nlohmann::json::exception &) {
    }
    return std::nullopt;
}

} // namespace

std::vector<QualityRow> compare_frame_dirs(const fs::path &pred, const fs::path &gt) {
    if (!fs::is_directory(pred))
        throw IoError(pred.string() + " is not a directory");
    if (!fs::is_directory(gt))
        throw IoError(gt.string() + " is not a directory");
    static const std::regex view_pattern(R"(view_(\d+))");
    std::vector<int> views;
    for (const auto &entry : fs::directory_iterator(pred)) {
        std::smatch m;
        const std::string n = entry.path().filename().string();
        if (entry.is_directory() && std::regex_match(n, m, view_pattern))
            views.push_back(std::stoi(m[1].str()));
    }
    std::sort(views.begin(), views.end());
    std::vector<QualityRow> rows;
    if (views.empty()) {
        rows.push_back(compare_dir(pred.filename().string(), pred, gt));
    } else {
        for (int v : views) {
            const fs::path ref = gt / view_dir_name(v);
            if (!fs::is_directory(ref))
                throw IoError("no reference directory " + ref.string() + " for " +
                              (pred / view_dir_name(v)).string());
            rows.push_back(compare_dir(view_dir_name(v), pred / view_dir_name(v), ref));
        }
    }
    if (const auto ms = read_amortized(pred))
        for (auto &r : rows)
            r.amortized_ms = ms;
    return rows;
}

std::string format_quality_table(const std::vector<QualityRow> &rows) {
    NVS_REQUIRE(!rows.empty(), "quality table needs at least one row");
    std::string out = "| Sequence   | Frames | PSNR (dB) | Runtime (ms/frame) |\n"
                      "|------------|--------|-----------|--------------------|\n";
    char line[160];
    double sum = 0.0;
    bool lossy = false;
    for (const auto &r : rows) {
        char runtime[32] = "-";
        if (r.amortized_ms)
            std::snprintf(runtime, sizeof runtime, "%.2f", *r.amortized_ms);
        std::snprintf(line, sizeof line, "| %-10s | %6zu | %9.2f | %18s |\n", r.name.c_str(),
                      r.frames, r.psnr_db, runtime);
        out += line;
        sum += r.psnr_db;
        lossy = lossy || r.lossy;
    }
    std::snprintf(line, sizeof line, "| %-10s | %6s | %9.2f | %18s |\n", "mean", "",
                  sum / static_cast<double>(rows.size()), "");
    out += line;
    if (lossy)
        out += "note: lossy (JPEG) images were involved in this comparison\n";
    return out;
}

PairSet parse_pair_set(const std::string &name) {
    if (name == "all")
        return PairSet::all;
    if (name == "consecutive")
        return PairSet::consecutive;
    throw ConfigError("unknown pair set '" + name + "' (all | consecutive)");
}

PoseErrorReport compare_pose_files(const fs::path &pred, const fs::path &gt, PairSet pairs,
                                   double tau_deg) {
    const auto p = read_pose_file(pred);
    const auto g = read_pose_file(gt);
    std::vector<Extrinsics> pe, ge;
    for (const auto &r : p)
        pe.push_back(r.extrinsics);
    for (const auto &r : g)
        ge.push_back(r.extrinsics);
    return pose_error_metrics(pe, ge, tau_deg, pairs);
}

std::string format_pose_table(const PoseErrorReport &r) {
    char line[200];
    std::snprintf(line, sizeof line,
                  "| Pairs | RRA@%g | RTA@%g | AUC@30 |\n|-------|--------|--------|--------|\n"
                  "| %5zu | %6.1f | %6.1f | %6.1f |\n",
                  r.tau_deg, r.tau_deg, r.pairs.size(), r.rra, r.rta, r.auc_30);
    return line;
}

} // namespace nvs
