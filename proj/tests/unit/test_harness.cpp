// SPDX-License-Identifier: Apache-2.0
//
// uavsec: secrecy-rate simulation and solvers for multi-UAV RSMA downlinks
// Copyright (C) 2026 The uavsec authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------
#include "uavsec/error.hpp"
#include "uavsec/harness.hpp"

#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

using namespace uavsec;
namespace fs = std::filesystem;

namespace {

const std::string kConfigs = std::string(UAVSEC_SOURCE_DIR) + "/configs/";

const char* kMinimal = R"(scenario:
  num_uavs: 1
  num_users: 1
  num_eaves: 1
  tx_antennas: 2
  rx_antennas: 1
  streams: 1
  area_x_m: 200
  area_y_m: 200
  start_m: [[100, 100, 50]]
  terminal_m: [[100, 100, 50]]
)";

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("uavsec_test_harness_" + name);
    fs::remove_all(p);
    return p;
}

int run_cli(Command cmd, const std::string& config, const fs::path& out, std::vector<std::string> overrides = {},
            std::string* err_text = nullptr) {
    RunRequest req;
    req.command = cmd;
    req.config_path = config;
    req.out_dir = out.string();
    req.overrides = std::move(overrides);
    std::ostringstream err;
    const int code = run(req, err);
    if (err_text) *err_text = err.str();
    return code;
}

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no exception");
    return ErrorCode::InvalidConfig;
}

EvalStep step_with(double secrecy, double rho_r = 0.0) {
    EvalStep s;
    s.rates.secrecy = {secrecy};
    s.rates.total_secrecy = secrecy;
    s.violations.rho_r = rho_r;
    return s;
}

} // namespace

TEST_CASE("fnv1a64: reference values") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("config: minimal file takes defaults and converts dBm once") {
    const ExperimentConfig cfg = parse_config(kMinimal);
    const auto& c = cfg.train.env.constants;
    CHECK(c.num_users == 1);
    CHECK(c.power_w == doctest::Approx(dbm_to_watts(3.0)).epsilon(1e-15));
    CHECK(c.noise_user_w == doctest::Approx(dbm_to_watts(-80.0)).epsilon(1e-15));
    CHECK(c.horizon == 10);
    CHECK(cfg.train.method == Method::DunDrl);
    CHECK(cfg.config_hash == fnv1a64(cfg.canonical));
}

TEST_CASE("config: unknown keys are rejected naming the key") {
    try {
        parse_config(std::string(kMinimal) + "  power_dbn: 3\n");
        FAIL("accepted unknown key");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ConfigError);
        CHECK(std::string(e.what()).find("scenario.power_dbn") != std::string::npos);
    }
    try {
        parse_config(std::string(kMinimal) + "trainig:\n  episodes: 3\n");
        FAIL("accepted unknown section");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("trainig") != std::string::npos);
    }
}

TEST_CASE("config: bad values name their key") {
    for (const char* ov : {"method=sarsa", "scenario.episode_s=1.05", "training.raster=7", "scenario.placement=grid"}) {
        CAPTURE(ov);
        try {
            parse_config(kMinimal, {ov});
            FAIL("accepted bad value");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::ConfigError);
            const std::string key = std::string(ov).substr(0, std::string(ov).find('='));
            CHECK(std::string(e.what()).find(key) != std::string::npos);
        }
    }
    CHECK(code_of([] { parse_config(kMinimal, {"no_equals_sign"}); }) == ErrorCode::ConfigError);
    CHECK(code_of([] { parse_config("scenario:\n  num_users: 1\n"); }) == ErrorCode::ConfigError);
}

TEST_CASE("config: overrides replace values, create sections and change the hash") {
    const ExperimentConfig base = parse_config(kMinimal);
    const ExperimentConfig o = parse_config(kMinimal, {"scenario.power_dbm=9", "training.episodes=7", "seed=42"});
    CHECK(o.train.env.constants.power_w == doctest::Approx(dbm_to_watts(9.0)).epsilon(1e-15));
    CHECK(o.train.episodes == 7);
    CHECK(o.train.seed == 42);
    CHECK(o.config_hash != base.config_hash);
    CHECK(parse_config(kMinimal).config_hash == base.config_hash);
    CHECK(code_of([] { parse_config(kMinimal, {"training.epsiodes=7"}); }) == ErrorCode::ConfigError);
}

TEST_CASE("config: bundled profiles parse") {
    const auto d = load_config(kConfigs + "default.yaml");
    CHECK(d.train.env.constants.num_uavs == 2);
    CHECK(d.train.env.constants.num_users == 8);
    CHECK(d.train.env.constants.horizon == 10);
    CHECK(d.train.hnet_blocks == 6);
    CHECK(d.sweep_values.size() == 4);
    const auto t = load_config(kConfigs + "toy.yaml");
    CHECK(t.train.episodes == 200);
    CHECK(t.train.env.constants.num_users == 2);
    const auto y = load_config(kConfigs + "tiny.yaml");
    CHECK(y.oracle_instances == 20);
    CHECK(y.oracle_samples == 1'000'000);
}

TEST_CASE("config: missing file") {
    CHECK(code_of([] { load_config("/nonexistent/uavsec.yaml"); }) == ErrorCode::ConfigError);
    std::string err;
    CHECK(run_cli(Command::Train, "/nonexistent/uavsec.yaml", scratch("missing"), {}, &err) == 2);
    CHECK(err.find("ConfigError") != std::string::npos);
}

TEST_CASE("provenance line") {
    ExperimentConfig cfg = parse_config(kMinimal, {"seed=17"});
    const std::string line = provenance_line(cfg);
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(cfg.config_hash));
    CHECK(line == std::string("# uavsec version=") + kVersion + " config_hash=" + hex + " seed=17");
}

TEST_CASE("emit_cdf: examples") {
    auto one = emit_cdf({2.5});
    REQUIRE(one.size() == 1);
    CHECK(one[0].rate == 2.5);
    CHECK(one[0].fraction == 1.0);

    auto three = emit_cdf({3.0, 1.0, 2.0});
    REQUIRE(three.size() == 3);
    CHECK(three[0].rate == 1.0);
    CHECK(three[0].fraction == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(three[1].fraction == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(three[2].fraction == 1.0);

    auto ties = emit_cdf({1.0, 1.0, 2.0, 2.0});
    REQUIRE(ties.size() == 2);
    CHECK(ties[0].fraction == 0.5);
    CHECK(ties[1].fraction == 1.0);

    CHECK(code_of([] { emit_cdf({}); }) == ErrorCode::EmptySamples);
}

TEST_CASE("emit_cdf: binned output is monotone and ends at exactly one") {
    std::mt19937_64 rng(5);
    std::exponential_distribution<double> e(1.0);
    std::vector<double> s(1000);
    for (auto& v : s) v = e(rng);
    for (std::size_t bins : {0u, 1u, 7u, 50u}) {
        CAPTURE(bins);
        const auto cdf = emit_cdf(s, bins);
        if (bins > 0) CHECK(cdf.size() == bins);
        for (std::size_t i = 1; i < cdf.size(); ++i) {
            CHECK(cdf[i].rate >= cdf[i - 1].rate);
            CHECK(cdf[i].fraction >= cdf[i - 1].fraction);
        }
        CHECK(cdf.back().fraction == 1.0);
        CHECK(cdf.back().rate == *std::max_element(s.begin(), s.end()));
    }
}

TEST_CASE("compare_methods: oracle vs itself, zero actions, violation rate") {
    const std::vector<EvalStep> oracle = {step_with(1.0), step_with(3.0)};
    const std::vector<EvalStep> zero = {step_with(0.0), step_with(0.0, 0.5)};
    const auto rows = compare_methods({{Method::Oracle, oracle}, {Method::SingleDrl, zero}, {Method::DunDrl, oracle}});
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].percent_of_oracle == 100.0);
    CHECK(rows[0].mean_total_secrecy == 2.0);
    CHECK(rows[1].percent_of_oracle == 0.0);
    CHECK(rows[1].violation_rate == 0.5);
    CHECK(rows[2].percent_of_oracle == 100.0);
    CHECK(rows[2].violation_rate == 0.0);

    CHECK(code_of([&] { compare_methods({{Method::DunDrl, oracle}}); }) == ErrorCode::MissingRun);
}

TEST_CASE("oracle fixture: frozen rows round trip and match recomputed HNet values") {
    const auto rows = read_oracle_csv(std::string(UAVSEC_SOURCE_DIR) + "/tests/data/v1/oracle_tiny.csv");
    REQUIRE(rows.size() == 20);
    const auto cfg = load_config(kConfigs + "tiny.yaml");
    const auto fresh = oracle_instances(cfg, 3, 2000);
    for (std::size_t i = 0; i < fresh.size(); ++i) {
        CHECK(fresh[i].instance_seed == rows[i].instance_seed);
        CHECK(fresh[i].hnet_value == rows[i].hnet_value);
        CHECK(fresh[i].best_value <= rows[i].best_value + 1e-12);
    }
    CHECK(code_of([] { read_oracle_csv("/nonexistent/oracle.csv"); }) == ErrorCode::IoError);
}

TEST_CASE("run: train writes one log row per episode with provenance") {
    const fs::path out = scratch("train");
    REQUIRE(run_cli(Command::Train, kConfigs + "tiny.yaml", out, {"training.episodes=3"}) == 0);
    const auto log = lines(slurp(out / "training_log.csv"));
    REQUIRE(log.size() == 5);
    CHECK(log[0].rfind("# uavsec version=", 0) == 0);
    CHECK(log[1].rfind("episode,", 0) == 0);
    CHECK(fs::exists(out / "checkpoints" / "checkpoint_final.txt"));

    REQUIRE(run_cli(Command::Eval, kConfigs + "tiny.yaml", out, {"training.episodes=3"}) == 0);
    const auto rates = lines(slurp(out / "eval_rates.csv"));
    CHECK(rates.size() == 2 + 2 * 10);
    const auto cdf = lines(slurp(out / "cdf.csv"));
    CHECK(cdf.back().substr(cdf.back().find(',') + 1) == "1");
}

TEST_CASE("run: identical config and seed give byte-identical files") {
    const fs::path a = scratch("det_a");
    const fs::path b = scratch("det_b");
    for (const auto& out : {a, b}) {
        REQUIRE(run_cli(Command::Train, kConfigs + "tiny.yaml", out, {"training.episodes=2", "method=single_drl"}) == 0);
        REQUIRE(run_cli(Command::Eval, kConfigs + "tiny.yaml", out, {"training.episodes=2", "method=single_drl"}) == 0);
    }
    for (const char* f : {"training_log.csv", "eval_rates.csv", "cdf.csv", "checkpoints/checkpoint_final.txt"}) {
        CAPTURE(f);
        CHECK(slurp(a / f) == slurp(b / f));
    }
}

TEST_CASE("run: sweep over power gives one row per value") {
    const fs::path out = scratch("sweep");
    REQUIRE(run_cli(Command::Sweep, kConfigs + "tiny.yaml", out, {"method=oracle", "evaluation.episodes=1"}) == 0);
    const auto rows = lines(slurp(out / "sweep.csv"));
    REQUIRE(rows.size() == 6);
    CHECK(rows[1].rfind("power_dbm,method,seed,", 0) == 0);
    const char* powers[] = {"0", "3", "6", "9"};
    for (std::size_t i = 0; i < 4; ++i) CHECK(rows[2 + i].rfind(std::string(powers[i]) + ",oracle,", 0) == 0);
}

TEST_CASE("run: error exit codes") {
    const fs::path out = scratch("errors");
    std::string err;
    CHECK(run_cli(Command::Train, kConfigs + "tiny.yaml", out, {"method=oracle"}, &err) == 2);
    CHECK(err.find("method") != std::string::npos);
    CHECK(run_cli(Command::Train, kConfigs + "tiny.yaml", out, {"scenario.bogus=1"}, &err) == 2);
    CHECK(err.find("scenario.bogus") != std::string::npos);
    CHECK(run_cli(Command::Eval, kConfigs + "tiny.yaml", out, {"evaluation.checkpoint=/nonexistent/ck.txt"}, &err) == 3);
    CHECK(command_from_string("compare") == Command::Compare);
    CHECK(code_of([] { command_from_string("plot"); }) == ErrorCode::ConfigError);
}
