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

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace uavsec {

std::uint64_t fnv1a64(const std::string& text) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace {

[[noreturn]] void config_error(const std::string& key, const std::string& what) {
    throw Error(ErrorCode::ConfigError, "key '" + key + "': " + what);
}

/// One mapping of the config; reads are recorded so unknown keys can be rejected.
class Section {
public:
    Section(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {
        if (node_ && !node_.IsNull() && !node_.IsMap()) config_error(path_, "expected a mapping");
    }

    [[nodiscard]] std::string key(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }
    [[nodiscard]] bool has(const std::string& k) const { return node_ && node_.IsMap() && node_[k]; }

    template <class T>
    T get(const std::string& k, T fallback) {
        used_.insert(k);
        if (!has(k)) return fallback;
        return as<T>(node_[k], key(k));
    }

    template <class T>
    T require(const std::string& k) {
        used_.insert(k);
        if (!has(k)) config_error(key(k), "missing");
        return as<T>(node_[k], key(k));
    }

    YAML::Node raw(const std::string& k) {
        used_.insert(k);
        return has(k) ? node_[k] : YAML::Node();
    }

    Section child(const std::string& k) {
        used_.insert(k);
        return Section(has(k) ? node_[k] : YAML::Node(), key(k));
    }

    void finish() const {
        if (!node_ || !node_.IsMap()) return;
        for (const auto& kv : node_) {
            const auto name = kv.first.as<std::string>();
            if (used_.count(name) == 0) config_error(key(name), "unknown key");
        }
    }

    template <class T>
    static T as(const YAML::Node& n, const std::string& key) {
        try {
            return n.as<T>();
        } catch (const YAML::Exception&) {
            config_error(key, "cannot read value '" + (n.IsScalar() ? n.Scalar() : std::string("<non-scalar>")) + "'");
        }
    }

private:
    YAML::Node node_;
    std::string path_;
    std::set<std::string> used_;
};

double positive(double v, const std::string& key) {
    if (!(v > 0.0) || !std::isfinite(v)) config_error(key, "must be positive");
    return v;
}

std::vector<Vec2> points2(const YAML::Node& n, const std::string& key) {
    std::vector<Vec2> out;
    if (!n || n.IsNull()) return out;
    if (!n.IsSequence()) config_error(key, "expected a list of [x, y]");
    for (const auto& p : n) {
        const auto v = Section::as<std::vector<double>>(p, key);
        if (v.size() != 2) config_error(key, "expected [x, y]");
        out.push_back({v[0], v[1]});
    }
    return out;
}

std::vector<Vec3> points3(const YAML::Node& n, const std::string& key) {
    std::vector<Vec3> out;
    if (!n || !n.IsSequence()) config_error(key, "expected a list of [x, y, z]");
    for (const auto& p : n) {
        const auto v = Section::as<std::vector<double>>(p, key);
        if (v.size() != 3) config_error(key, "expected [x, y, z]");
        out.push_back({v[0], v[1], v[2]});
    }
    return out;
}

void read_scenario(Section s, EnvConfig& env) {
    SystemConstants& c = env.constants;
    c.num_uavs = s.get<std::size_t>("num_uavs", c.num_uavs);
    c.num_users = s.get<std::size_t>("num_users", c.num_users);
    c.num_eaves = s.get<std::size_t>("num_eaves", c.num_eaves);
    c.tx_antennas = s.get<std::size_t>("tx_antennas", c.tx_antennas);
    c.rx_antennas = s.get<std::size_t>("rx_antennas", c.rx_antennas);
    c.streams = s.get<std::size_t>("streams", c.streams);
    c.power_w = dbm_to_watts(s.get<double>("power_dbm", 3.0));
    c.noise_user_w = dbm_to_watts(s.get<double>("noise_user_dbm", -80.0));
    c.noise_eave_w = dbm_to_watts(s.get<double>("noise_eave_dbm", -80.0));
    c.pathloss_exponent = s.get<double>("pathloss_exponent", c.pathloss_exponent);
    c.carrier_freq_hz = positive(s.get<double>("carrier_freq_ghz", 28.0), s.key("carrier_freq_ghz")) * 1e9;
    c.antenna_spacing = s.get<double>("antenna_spacing_wavelengths", c.antenna_spacing);
    c.rician_k = db_to_linear(s.get<double>("rician_k_db", 10.0));
    c.slot_s = positive(s.get<double>("slot_s", c.slot_s), s.key("slot_s"));
    const double episode = positive(s.get<double>("episode_s", 1.0), s.key("episode_s"));
    const double slots = episode / c.slot_s;
    if (std::abs(slots - std::round(slots)) > 1e-9 * slots || std::round(slots) < 1.0) {
        config_error(s.key("episode_s"), "must be a positive multiple of slot_s");
    }
    c.horizon = static_cast<std::size_t>(std::round(slots));
    c.max_speed_mps = s.get<double>("max_speed_mps", c.max_speed_mps);

    const auto mode = s.get<std::string>("placement", "balanced");
    if (mode == "balanced") {
        env.placement.mode = PlacementMode::Balanced;
    } else if (mode == "uniform") {
        env.placement.mode = PlacementMode::Uniform;
    } else if (mode == "explicit") {
        env.placement.mode = PlacementMode::Explicit;
    } else {
        config_error(s.key("placement"), "expected balanced, uniform or explicit");
    }
    env.placement.area_x_m = positive(s.get<double>("area_x_m", 500.0), s.key("area_x_m"));
    env.placement.area_y_m = positive(s.get<double>("area_y_m", 500.0), s.key("area_y_m"));
    env.placement.users = points2(s.raw("users_m"), s.key("users_m"));
    env.placement.eaves = points2(s.raw("eaves_m"), s.key("eaves_m"));
    env.start = points3(s.raw("start_m"), s.key("start_m"));
    env.terminal = points3(s.raw("terminal_m"), s.key("terminal_m"));
    if (s.has("layout_seed")) env.layout_seed = s.get<std::uint64_t>("layout_seed", 0);
    s.finish();
}

void read_reward(Section s, RewardWeights& w) {
    w.c_r = s.get<double>("c_r", w.c_r);
    w.c_w = s.get<double>("c_w", w.c_w);
    w.c_neg = s.get<double>("c_neg_r", w.c_neg);
    w.c_q1 = s.get<double>("c_q1", w.c_q1);
    w.c_q0 = s.get<double>("c_q0", w.c_q0);
    w.c_qf = s.get<double>("c_qf", w.c_qf);
    s.finish();
}

void read_training(Section s, TrainConfig& t) {
    DdpgConfig& d = t.ddpg;
    t.episodes = s.get<std::size_t>("episodes", t.episodes);
    d.batch = s.get<std::size_t>("batch", d.batch);
    d.actor_lr = positive(s.get<double>("actor_lr", d.actor_lr), s.key("actor_lr"));
    d.critic_lr = positive(s.get<double>("critic_lr", d.critic_lr), s.key("critic_lr"));
    d.gamma = s.get<double>("gamma", d.gamma);
    if (!(d.gamma >= 0.0 && d.gamma <= 1.0)) config_error(s.key("gamma"), "must lie in [0, 1]");
    d.tau = s.get<double>("tau", d.tau);
    if (!(d.tau >= 0.0 && d.tau <= 1.0)) config_error(s.key("tau"), "must lie in [0, 1]");
    d.capacity = s.get<std::size_t>("buffer_capacity", d.capacity);
    d.noise_start = s.get<double>("noise_start", d.noise_start);
    d.noise_end = s.get<double>("noise_end", d.noise_end);
    d.hnet_actor_samples = s.get<std::size_t>("hnet_actor_samples", d.hnet_actor_samples);
    d.hidden = s.get<std::size_t>("hidden", d.hidden);
    t.env.raster = s.get<std::size_t>("raster", t.env.raster);
    if (t.env.raster < 2 || t.env.raster % 2 != 0) config_error(s.key("raster"), "must be even and >= 2");
    t.checkpoint_every = s.get<std::size_t>("checkpoint_every", t.checkpoint_every);
    if (d.batch < 2) config_error(s.key("batch"), "must be >= 2");
    if (d.capacity < d.batch) config_error(s.key("buffer_capacity"), "must be >= batch");
    s.finish();
}

void apply_override(YAML::Node root, const std::string& item) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw Error(ErrorCode::ConfigError, "override '" + item + "' is not key=value");
    }
    const std::string path = item.substr(0, eq);
    YAML::Node value;
    try {
        value = YAML::Load(item.substr(eq + 1));
    } catch (const YAML::Exception&) {
        config_error(path, "override value does not parse");
    }
    std::vector<std::string> parts;
    std::stringstream ss(path);
    for (std::string p; std::getline(ss, p, '.');) {
        if (p.empty()) config_error(path, "empty key component");
        parts.push_back(p);
    }
    // Node assignment in yaml-cpp rebinds contents, so every level gets a fresh handle.
    std::vector<YAML::Node> chain{root};
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        YAML::Node parent = chain.back();
        if (!parent[parts[i]] || !parent[parts[i]].IsMap()) parent[parts[i]] = YAML::Node(YAML::NodeType::Map);
        YAML::Node next = parent[parts[i]];
        chain.push_back(next);
    }
    YAML::Node leaf = chain.back();
    leaf[parts.back()] = value;
}

} // namespace

ExperimentConfig parse_config(const std::string& text, const std::vector<std::string>& overrides) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw Error(ErrorCode::ConfigError, std::string("config does not parse: ") + e.what());
    }
    if (!root || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
    if (!root.IsMap()) throw Error(ErrorCode::ConfigError, "config root must be a mapping");
    for (const auto& o : overrides) apply_override(root, o);

    ExperimentConfig cfg;
    Section top(root, "");
    if (!top.has("scenario")) config_error("scenario", "missing");
    read_scenario(top.child("scenario"), cfg.train.env);
    read_reward(top.child("reward"), cfg.train.env.weights);
    read_training(top.child("training"), cfg.train);

    Section solver = top.child("solver");
    cfg.train.hnet_blocks = solver.get<std::size_t>("blocks", cfg.train.hnet_blocks);
    if (cfg.train.hnet_blocks < 1) config_error("solver.blocks", "must be >= 1");
    const auto eig = solver.get<std::string>("eig_mode", "exact");
    if (eig == "exact") {
        cfg.train.eig_mode = EigMode::Exact;
    } else if (eig == "learned") {
        cfg.train.eig_mode = EigMode::Learned;
    } else {
        config_error("solver.eig_mode", "expected exact or learned");
    }
    cfg.train.enn_steps = solver.get<std::size_t>("enn_steps", cfg.train.enn_steps);
    solver.finish();

    Section ev = top.child("evaluation");
    cfg.eval_episodes = ev.get<std::size_t>("episodes", cfg.eval_episodes);
    cfg.eval_seed = ev.get<std::uint64_t>("seed", cfg.eval_seed);
    cfg.checkpoint = ev.get<std::string>("checkpoint", "");
    cfg.cdf_bins = ev.get<std::size_t>("cdf_bins", cfg.cdf_bins);
    ev.finish();

    Section orc = top.child("oracle");
    cfg.oracle_policy.lookahead = orc.get<std::size_t>("lookahead", cfg.oracle_policy.lookahead);
    cfg.oracle_policy.beam_samples = orc.get<std::size_t>("beam_samples", cfg.oracle_policy.beam_samples);
    cfg.oracle_instances = orc.get<std::size_t>("instances", cfg.oracle_instances);
    cfg.oracle_samples = orc.get<std::size_t>("samples", cfg.oracle_samples);
    if (cfg.oracle_policy.lookahead < 1) config_error("oracle.lookahead", "must be >= 1");
    if (cfg.oracle_samples < 1) config_error("oracle.samples", "must be >= 1");
    orc.finish();

    Section sw = top.child("sweep");
    cfg.sweep_key = sw.get<std::string>("key", "");
    if (const YAML::Node vals = sw.raw("values"); vals && !vals.IsNull()) {
        if (!vals.IsSequence()) config_error("sweep.values", "expected a list");
        for (const auto& v : vals) {
            YAML::Emitter em;
            em << v;
            cfg.sweep_values.emplace_back(em.c_str());
        }
    }
    sw.finish();

    Section cmp = top.child("compare");
    if (const YAML::Node ms = cmp.raw("methods"); ms && !ms.IsNull()) {
        for (const auto& name : Section::as<std::vector<std::string>>(ms, "compare.methods")) {
            try {
                cfg.compare.push_back(method_from_string(name));
            } catch (const Error&) {
                config_error("compare.methods", "unknown method '" + name + "'");
            }
        }
    } else {
        cfg.compare = {Method::DunDrl, Method::SingleDrl, Method::Oracle};
    }
    cmp.finish();

    const auto method = top.get<std::string>("method", "dun_drl");
    try {
        cfg.train.method = method_from_string(method);
    } catch (const Error&) {
        config_error("method", "unknown method '" + method + "'");
    }
    cfg.train.seed = top.get<std::uint64_t>("seed", cfg.train.seed);
    cfg.output_dir = top.get<std::string>("output_dir", cfg.output_dir);
    top.finish();

    const std::size_t uavs = cfg.train.env.constants.num_uavs;
    if (cfg.train.env.start.size() != uavs) config_error("scenario.start_m", "need one entry per UAV");
    if (cfg.train.env.terminal.size() != uavs) config_error("scenario.terminal_m", "need one entry per UAV");
    try {
        cfg.train.env.validate();
    } catch (const Error& e) {
        throw Error(ErrorCode::ConfigError, std::string("scenario: ") + e.what());
    }

    YAML::Emitter em;
    em << root;
    cfg.canonical = em.c_str();
    cfg.config_hash = fnv1a64(cfg.canonical);
    return cfg;
}

ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigError, "config file '" + path + "' cannot be opened");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), overrides);
}

std::string provenance_line(const ExperimentConfig& cfg) {
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(cfg.config_hash));
    return std::string("# uavsec version=") + kVersion + " config_hash=" + hash + " seed=" + std::to_string(cfg.train.seed);
}

} // namespace uavsec
