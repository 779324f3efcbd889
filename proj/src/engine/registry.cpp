// Copyright Contributors to the nvstream project
// SPDX-License-Identifier: Apache-2.0

#include "engine/registry.hpp"

#include "common/error.hpp"
#include "stages/external.hpp"

namespace nvs {

namespace {

std::string endpoint_of(const Config &cfg, const std::string &kind) {
    const std::string key = "stages." + kind + ".endpoint";
    auto ep = cfg.get<std::string>(key);
    if (ep.empty())
        throw ConfigError("config key '" + key + "' (" + cfg.origin(key) +
                          ") must name host:port for an external stage");
    parse_endpoint(ep);
    return ep;
}

[[noreturn]] void unknown_impl(const Config &cfg, const std::string &kind, const std::string &name,
                               const char *choices) {
    const std::string key = "stages." + kind + ".impl";
    throw ConfigError("config key '" + key + "' (" + cfg.origin(key) + "): unknown stage '" + name +
                      "' (" + choices + ")");
}

} // namespace

RasterOptions raster_options(const Config &cfg) {
    RasterOptions opts;
    const int threads = cfg.get<int>("pipeline.threads");
    if (threads < 0)
        throw ConfigError("config key 'pipeline.threads' (" + cfg.origin("pipeline.threads") +
                          ") must be nonnegative");
    opts.threads = static_cast<unsigned>(threads);
    return opts;
}

std::shared_ptr<const SpatialStage> make_spatial_stage(const Config &cfg, SceneGenerator scenes) {
    const auto impl = cfg.get<std::string>("stages.spatial.impl");
    if (impl == "oracle") {
        if (!scenes)
            throw ConfigError("config key 'stages.spatial.impl' (" +
                              cfg.origin("stages.spatial.impl") +
                              "): the oracle stage needs ground-truth scenes (synthetic input or "
                              "a dataset with scenes/)");
        return std::make_shared<OracleSpatialStage>(std::move(scenes), raster_options(cfg));
    }
    if (impl == "constant_depth") {
        ConstantDepthStage::Options o;
        o.depth = cfg.get<double>("stages.spatial.depth");
        o.footprint = cfg.get<double>("stages.spatial.footprint");
        o.opacity = cfg.get<double>("stages.spatial.opacity");
        const auto bg = cfg.get<std::vector<float>>("scene.background");
        if (bg.size() != 3)
            throw ConfigError("config key 'scene.background' (" + cfg.origin("scene.background") +
                              ") needs 3 values");
        o.background = {bg[0], bg[1], bg[2]};
        o.raster = raster_options(cfg);
        try {
            return std::make_shared<ConstantDepthStage>(o);
        } catch (const InvalidArgument &e) {
            throw ConfigError(std::string("stages.spatial: ") + e.what());
        }
    }
    if (impl == "external")
        return std::make_shared<ExternalSpatialStage>(endpoint_of(cfg, "spatial"));
    unknown_impl(cfg, "spatial", impl, "oracle | constant_depth | external");
}

std::shared_ptr<const InterpolationStage> make_interpolation_stage(const Config &cfg) {
    const auto impl = cfg.get<std::string>("stages.inter.impl");
    if (impl == "blend")
        return std::make_shared<BlendInterpolator>();
    if (impl == "external")
        return std::make_shared<ExternalInterpolationStage>(endpoint_of(cfg, "inter"));
    unknown_impl(cfg, "inter", impl, "blend | external");
}

std::shared_ptr<const SuperResStage> make_superres_stage(const Config &cfg) {
    const auto impl = cfg.get<std::string>("stages.sr.impl");
    if (impl == "bicubic")
        return std::make_shared<BicubicSuperRes>();
    if (impl == "external")
        return std::make_shared<ExternalSuperResStage>(endpoint_of(cfg, "sr"));
    unknown_impl(cfg, "sr", impl, "bicubic | external");
}

StageSet make_stages(const Config &cfg, SceneGenerator scenes) {
    return {make_spatial_stage(cfg, std::move(scenes)), make_interpolation_stage(cfg),
            make_superres_stage(cfg)};
}

} // namespace nvs
