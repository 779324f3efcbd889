// Copyright Contributors to the nvstream project
// SPDX-License-Identifier: Apache-2.0

#include <nvstream/nvstream.h>

#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>

namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        std::string tmpl = (fs::temp_directory_path() / "nvs_capi_XXXXXX").string();
        path = ::mkdtemp(tmpl.data());
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string take(char *text) {
    std::string s = text ? text : "";
    nvs_free(text);
    return s;
}

struct EngineHandle {
    nvs_engine *e = nullptr;
    EngineHandle() { REQUIRE(nvs_engine_create(nullptr, &e) == NVS_OK); }
    ~EngineHandle() { nvs_engine_destroy(e); }
};

const char *kRig = R"({"poses": [
  {"quaternion": [1, 0, 0, 0], "translation": [0, 0, 4], "focal": 0.8},
  {"quaternion": [0.9659258, 0, 0.2588190, 0], "translation": [0, 0, 4], "focal": 0.8},
  {"quaternion": [0.8660254, 0, 0.5, 0], "translation": [0.1, 0, 4], "focal": 0.8},
  {"quaternion": [0.7071068, 0, 0.7071068, 0], "translation": [0, 0.2, 4], "focal": 0.8}
]})";

} // namespace

TEST_CASE("status reporting") {
    CHECK(std::string(nvs_version()).size() > 0);
    CHECK(std::string(nvs_status_name(NVS_OK)) == "ok");
    CHECK(std::string(nvs_status_name(NVS_ERR_CONFIG)) == "configuration error");
    CHECK(std::string(nvs_status_name(static_cast<nvs_status>(42))) == "unknown status");

    nvs_engine *e = nullptr;
    CHECK(nvs_engine_create(nullptr, nullptr) == NVS_ERR_INVALID_ARGUMENT);
    CHECK(std::string(nvs_last_error()).find("NULL") != std::string::npos);
    CHECK(nvs_engine_create("/nonexistent/config.json", &e) == NVS_ERR_CONFIG);
    CHECK(e == nullptr);
    CHECK(nvs_engine_run(nullptr, nullptr, nullptr, nullptr) == NVS_ERR_INVALID_ARGUMENT);
    nvs_engine_destroy(nullptr);
    nvs_engine_stop(nullptr);
    nvs_free(nullptr);
}

TEST_CASE("last error is per thread and cleared on success") {
    EngineHandle h;
    CHECK(nvs_engine_set(h.e, "pipeline.resolutoin", "64x48") == NVS_ERR_CONFIG);
    CHECK(std::string(nvs_last_error()).find("pipeline.resolutoin") != std::string::npos);
    std::string other;
    std::thread([&] { other = nvs_last_error(); }).join();
    CHECK(other.empty());
    CHECK(nvs_engine_set(h.e, "pipeline.resolution", "\"64x48\"") == NVS_OK);
    CHECK(std::string(nvs_last_error()).empty());
}

TEST_CASE("configuration through the C interface") {
    TempDir dir;
    const fs::path cfg = dir.path / "run.json";
    std::ofstream(cfg) << "{\"synth\": {\"frames\": 9}}";
    nvs_engine *e = nullptr;
    REQUIRE(nvs_engine_create(cfg.c_str(), &e) == NVS_OK);
    CHECK(nvs_engine_set(e, "pipeline.resolution", "16x12") == NVS_OK);
    CHECK(nvs_engine_set(e, "input.fps", "fast") == NVS_ERR_CONFIG);
    char *json = nullptr;
    REQUIRE(nvs_engine_config(e, &json) == NVS_OK);
    const std::string text = take(json);
    CHECK(text.find("\"16x12\"") != std::string::npos);
    CHECK(text.find("\"frames\": 9") != std::string::npos);
    CHECK(nvs_engine_config(e, nullptr) == NVS_ERR_INVALID_ARGUMENT);
    nvs_engine_destroy(e);
}

TEST_CASE("run, synth and metrics") {
    TempDir dir;
    EngineHandle h;
    REQUIRE(nvs_engine_set(h.e, "synth.frames", "9") == NVS_OK);
    REQUIRE(nvs_engine_set(h.e, "synth.gaussians", "32") == NVS_OK);
    REQUIRE(nvs_engine_set(h.e, "pipeline.resolution", "16x12") == NVS_OK);

    const fs::path data = dir.path / "synth";
    REQUIRE(nvs_synth_write(h.e, data.c_str()) == NVS_OK);
    CHECK(fs::exists(data / "view_7" / "frame_000008.png"));

    REQUIRE(nvs_engine_set(h.e, "input.root", data.c_str()) == NVS_OK);
    const fs::path out = dir.path / "out";
    nvs_run_summary s{};
    char *report = nullptr;
    REQUIRE(nvs_engine_run(h.e, out.c_str(), &s, &report) == NVS_OK);
    CHECK(take(report).size() > 0);
    CHECK(s.input_frames == 9);
    CHECK(s.emitted_frames == 9);
    CHECK(s.spatial_runs == 5);
    CHECK(s.trailing_frame == -1);
    CHECK(s.output_width == 32);
    CHECK(s.output_height == 24);
    CHECK(s.target_views == 1);
    CHECK(s.lossy_input == 0);
    double sum = 0.0;
    for (double ms : s.stage_mean_ms)
        sum += ms;
    CHECK(s.component_sum_ms == doctest::Approx(sum));
    CHECK(s.delay_ms == doctest::Approx(2000.0 / 30.0 + sum));
    CHECK(s.amortized_ms > 0.0);

    double psnr = 0.0;
    char *table = nullptr;
    REQUIRE(nvs_metrics_compare(out.c_str(), (data / "gt").c_str(), &psnr, &table) == NVS_OK);
    CHECK(take(table).find("PSNR") != std::string::npos);
    CHECK(psnr > 20.0);
    CHECK(nvs_metrics_compare(out.c_str(), (dir.path / "none").c_str(), &psnr, nullptr) == NVS_ERR_IO);

    // Run without an output directory or summary.
    CHECK(nvs_engine_run(h.e, nullptr, nullptr, nullptr) == NVS_OK);
    CHECK(nvs_engine_set(h.e, "input.views", "[0, 42]") == NVS_OK);
    CHECK(nvs_engine_run(h.e, nullptr, nullptr, nullptr) != NVS_OK);
    CHECK(std::string(nvs_last_error()).find("input.views") != std::string::npos);
}

TEST_CASE("pose metrics") {
    TempDir dir;
    const fs::path rig = dir.path / "rig.json";
    std::ofstream(rig) << kRig;
    nvs_pose_metrics m{};
    char *table = nullptr;
    REQUIRE(nvs_metrics_pose(rig.c_str(), rig.c_str(), "all", 5.0, &m, &table) == NVS_OK);
    CHECK(take(table).size() > 0);
    CHECK(m.rra == doctest::Approx(100.0));
    CHECK(m.rta == doctest::Approx(100.0));
    CHECK(m.auc_30 == doctest::Approx(100.0));
    CHECK(m.tau_deg == 5.0);
    CHECK(m.pairs == 6);
    REQUIRE(nvs_metrics_pose(rig.c_str(), rig.c_str(), "consecutive", 5.0, &m, nullptr) == NVS_OK);
    CHECK(m.pairs == 3);
    CHECK(nvs_metrics_pose(rig.c_str(), rig.c_str(), "some", 5.0, &m, nullptr) == NVS_ERR_CONFIG);
    CHECK(nvs_metrics_pose(rig.c_str(), "/missing.json", "all", 5.0, &m, nullptr) == NVS_ERR_IO);
}

TEST_CASE("serve starts and stops") {
    EngineHandle h;
    REQUIRE(nvs_engine_set(h.e, "serve.port", "0") == NVS_OK);
    REQUIRE(nvs_engine_set(h.e, "pipeline.resolution", "16x12") == NVS_OK);
    REQUIRE(nvs_engine_set(h.e, "synth.gaussians", "16") == NVS_OK);
    std::atomic<int> port{-1};
    nvs_status status = NVS_ERR_INTERNAL;
    std::thread server([&] {
        status = nvs_engine_serve(
            h.e, [](uint16_t p, void *user) { static_cast<std::atomic<int> *>(user)->store(p); }, &port);
    });
    for (int i = 0; i < 500 && port.load() < 0; ++i)
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
    CHECK(port.load() > 0);
    nvs_engine_stop(h.e);
    server.join();
    CHECK_MESSAGE(status == NVS_OK, nvs_last_error());
}
