// Copyright Contributors to the nvstream project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "io/config.hpp"
#include "stream/pipeline.hpp"

namespace nvs {

// Stage implementations selectable through stages.<kind>.impl:
//   spatial: oracle | constant_depth | external
//   inter:   blend | external
//   sr:      bicubic | external
// The oracle stage needs `scenes`; external stages read
// stages.<kind>.endpoint ("host:port").
std::shared_ptr<const SpatialStage> make_spatial_stage(const Config &cfg, SceneGenerator scenes);
std::shared_ptr<const InterpolationStage> make_interpolation_stage(const Config &cfg);
std::shared_ptr<const SuperResStage> make_superres_stage(const Config &cfg);

StageSet make_stages(const Config &cfg, SceneGenerator scenes);

RasterOptions raster_options(const Config &cfg);

} // namespace nvs
