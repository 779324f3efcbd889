// Copyright Contributors to the nvstream project
// SPDX-License-Identifier: Apache-2.0

#include "io/pose_file.hpp"

#include "common/error.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace nvs {

using nlohmann::json;

CameraView PoseRecord::view(Resolution res) const {
    return {extrinsics, intrinsics_from_normalized(focal, res.width, res.height)};
}

namespace {

PoseRecord parse_one(const json &node, const std::string &where) {
    if (!node.is_object())
        throw IoError(where + ": pose must be an object");
    try {
        const auto q = node.at("quaternion").get<std::vector<double>>();
        const auto t = node.at("translation").get<std::vector<double>>();
        if (q.size() != 4 || t.size() != 3)
            throw IoError(where + ": quaternion needs 4 values and translation 3");
        const double scale = node.value("scale", 1.0);
        PoseEmbedding p;
        p.quaternion = Quaternion{q[0], q[1], q[2], q[3]}.normalized();
        p.translation = Vec3(t[0], t[1], t[2]);
        PoseRecord r;
        r.extrinsics = unpack_pose(p, scale);
        r.focal = node.value("focal", 0.8);
        if (!(r.focal > 0.0))
            throw IoError(where + ": focal must be positive");
        return r;
    } catch (const json::exception &e) {
        throw IoError(where + ": " + e.what());
    } catch (const InvalidArgument &e) {
        throw IoError(where + ": " + e.what());
    }
}

json to_json(const PoseRecord &r, double scale) {
    const PoseEmbedding p = pack_pose(r.extrinsics, scale);
    return {{"quaternion", {p.quaternion.w, p.quaternion.x, p.quaternion.y, p.quaternion.z}},
            {"translation", {p.translation.x(), p.translation.y(), p.translation.z()}},
            {"focal", r.focal},
            {"scale", scale}};
}

} // namespace

std::vector<PoseRecord> parse_poses(const std::string &text, const std::string &source) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error &e) {
        throw IoError("cannot parse pose file " + source + ": " + e.what());
    }
    std::vector<PoseRecord> out;
    if (doc.is_object() && doc.contains("poses")) {
        const auto &list = doc["poses"];
        if (!list.is_array() || list.empty())
            throw IoError(source + ": \"poses\" must be a nonempty array");
        for (std::size_t i = 0; i < list.size(); ++i)
            out.push_back(parse_one(list[i], source + " pose " + std::to_string(i)));
    } else {
        out.push_back(parse_one(doc, source));
    }
    return out;
}

std::vector<PoseRecord> read_pose_file(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot read pose file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_poses(ss.str(), path.string());
}

std::string format_poses(const std::vector<PoseRecord> &poses, double scale) {
    NVS_REQUIRE(!poses.empty(), "no poses to write");
    NVS_REQUIRE(scale > 0.0, "pose scale must be positive");
    if (poses.size() == 1)
        return to_json(poses.front(), scale).dump(2) + "\n";
    json list = json::array();
    for (const auto &p : poses)
        list.push_back(to_json(p, scale));
    return json{{"poses", list}}.dump(2) + "\n";
}

void write_pose_file(const std::filesystem::path &path, const std::vector<PoseRecord> &poses,
                     double scale) {
    const std::string text = format_poses(poses, scale);
    std::ofstream out(path);
    if (!out || !(out << text))
        throw IoError("cannot write pose file " + path.string());
}

Rig make_rig(const std::vector<PoseRecord> &poses, Resolution res) {
    Rig rig;
    for (const auto &p : poses)
        rig.push_back(p.view(res));
    return rig;
}

} // namespace nvs
