// Copyright Contributors to the nvstream project
// SPDX-License-Identifier: Apache-2.0

#include "scene/scene_file.hpp"

#include "common/bytes.hpp"
#include "scene/sh.hpp"

#include <fstream>
#include <iterator>

namespace nvs {

namespace {
constexpr char kMagic[4] = {'G', 'S', 'C', '1'};
}

std::vector<std::uint8_t> encode_scene(const GaussianScene &scene) {
    validate(scene);
    ByteWriter w;
    for (char c : kMagic)
        w.put(c);
    w.put(static_cast<std::uint32_t>(scene.size()));
    w.put(static_cast<std::uint8_t>(scene.sh_degree));
    for (const auto &g : scene.primitives) {
        for (int i = 0; i < 3; ++i)
            w.put(static_cast<float>(g.mean[i]));
        for (double q : {g.rotation.w, g.rotation.x, g.rotation.y, g.rotation.z})
            w.put(static_cast<float>(q));
        for (int i = 0; i < 3; ++i)
            w.put(static_cast<float>(g.scale[i]));
        w.put(static_cast<float>(g.opacity));
        for (double c : g.sh)
            w.put(static_cast<float>(c));
    }
    return w.take();
}

GaussianScene decode_scene(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes, "scene snapshot");
    for (char c : kMagic)
        if (r.get<char>() != c)
            throw IoError("scene snapshot: bad magic (expected GSC1)");
    const auto count = r.get<std::uint32_t>();
    GaussianScene scene;
    scene.sh_degree = r.get<std::uint8_t>();
    if (scene.sh_degree > kMaxShDegree)
        throw IoError("scene snapshot: SH degree " + std::to_string(scene.sh_degree) +
                      " out of range");
    const std::size_t per = 11 + sh_coeff_count(scene.sh_degree);
    if (r.remaining() != count * per * sizeof(float))
        throw IoError("scene snapshot: payload size does not match primitive count");
    scene.primitives.resize(count);
    for (auto &g : scene.primitives) {
        for (int i = 0; i < 3; ++i)
            g.mean[i] = r.get<float>();
        g.rotation.w = r.get<float>();
        g.rotation.x = r.get<float>();
        g.rotation.y = r.get<float>();
        g.rotation.z = r.get<float>();
        for (int i = 0; i < 3; ++i)
            g.scale[i] = r.get<float>();
        g.opacity = r.get<float>();
        g.sh.resize(sh_coeff_count(scene.sh_degree));
        for (double &c : g.sh)
            c = r.get<float>();
    }
    try {
        validate(scene);
    } catch (const InvalidArgument &e) {
        throw IoError(std::string("scene snapshot: ") + e.what());
    }
    return scene;
}

void write_scene_file(const std::filesystem::path &path, const GaussianScene &scene) {
    const auto bytes = encode_scene(scene);
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw IoError("failed writing " + path.string());
}

GaussianScene read_scene_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open scene snapshot " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return decode_scene(bytes);
}

} // namespace nvs
