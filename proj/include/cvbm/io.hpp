// Copyright 2026 The CVBM Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file io.hpp
 * JSON schemas for circuits, kernels, training and run configurations.
 *
 * Parsing is strict: unknown keys and wrongly typed values raise FormatError,
 * semantic problems (negative learning rate, bad mode index, ...) raise the
 * owning module's validation error. Everything is checked before any
 * computation starts.
 */
#pragma once

#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>
#include <string>

#include "json.hpp"

#include "circuit.hpp"
#include "datasets.hpp"
#include "errors.hpp"
#include "kernels.hpp"
#include "trainer.hpp"

namespace cvbm {

using json = nlohmann::json;

struct RunConfig {
    Circuit circuit;
    TargetSpec target;
    TrainConfig train;
    std::string output_dir{"."};
    /// The document as read, echoed into checkpoint sidecars.
    json raw;
};

namespace io {

namespace detail {

inline void require_object(const json &j, const std::string &where) {
    if (!j.is_object()) throw FormatError("config", where + " must be a JSON object");
}

inline void reject_unknown(const json &j, std::initializer_list<const char *> allowed, const std::string &where) {
    require_object(j, where);
    const std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto &item : j.items()) {
        if (!keys.contains(item.key())) {
            throw FormatError("config", where + ": unknown key '" + item.key() + "'");
        }
    }
}

inline const json &required(const json &j, const char *key, const std::string &where) {
    if (!j.contains(key)) throw FormatError("config", where + ": missing key '" + key + "'");
    return j.at(key);
}

template <class T> T get(const json &j, const std::string &what) {
    try {
        return j.get<T>();
    } catch (const json::exception &) {
        throw FormatError("config", what + " has the wrong type");
    }
}

inline double number(const json &j, const std::string &what) {
    if (!j.is_number()) throw FormatError("config", what + " must be a number");
    return j.get<double>();
}

inline std::size_t count(const json &j, const std::string &what) {
    if (!j.is_number_integer() || j.get<long long>() < 0) {
        throw FormatError("config", what + " must be a non-negative integer");
    }
    return j.get<std::size_t>();
}

template <class T> void maybe(const json &j, const char *key, T &out, const std::string &where) {
    if (!j.contains(key)) return;
    const std::string what = where + "." + key;
    if constexpr (std::is_same_v<T, double>) {
        out = number(j.at(key), what);
    } else if constexpr (std::is_same_v<T, std::size_t>) {
        out = count(j.at(key), what);
    } else if constexpr (std::is_same_v<T, bool>) {
        if (!j.at(key).is_boolean()) throw FormatError("config", what + " must be a boolean");
        out = j.at(key).get<bool>();
    } else if constexpr (std::is_same_v<T, std::uint64_t>) {
        if (!j.at(key).is_number_unsigned()) throw FormatError("config", what + " must be a non-negative integer");
        out = j.at(key).get<std::uint64_t>();
    } else {
        out = get<T>(j.at(key), what);
    }
}

} // namespace detail

// --- circuits -------------------------------------------------------------

inline json to_json(const Gate &gate) {
    json params = json::object();
    const auto names = param_names(gate.kind);
    for (std::size_t i = 0; i < gate.params.size(); ++i) params[std::string(names[i])] = gate.params[i];
    return {{"kind", std::string(to_string(gate.kind))},
            {"params", params},
            {"modes", gate.modes},
            {"trainable", gate.trainable}};
}

inline json to_json(const Circuit &circuit) {
    json gates = json::array();
    for (const auto &g : circuit.gates) gates.push_back(to_json(g));
    json j{{"n_modes", circuit.n_modes}, {"gates", gates}};
    if (!circuit.name.empty()) j["name"] = circuit.name;
    return j;
}

inline Gate gate_from_json(const json &j, const std::string &where) {
    detail::reject_unknown(j, {"kind", "params", "modes", "trainable"}, where);
    const GateKind kind = parse_gate_kind(detail::get<std::string>(detail::required(j, "kind", where), where + ".kind"));
    const auto names = param_names(kind);
    std::vector<double> params(names.size(), 0.0);
    if (j.contains("params")) {
        const json &p = j.at("params");
        detail::require_object(p, where + ".params");
        for (const auto &item : p.items()) {
            std::size_t slot = names.size();
            for (std::size_t i = 0; i < names.size(); ++i) {
                if (names[i] == item.key()) slot = i;
            }
            if (slot == names.size()) {
                throw FormatError("config", where + ".params: '" + item.key() + "' is not a parameter of " +
                                                std::string(to_string(kind)));
            }
            params[slot] = detail::number(item.value(), where + ".params." + item.key());
        }
    }
    const auto modes = detail::get<std::vector<std::size_t>>(detail::required(j, "modes", where), where + ".modes");
    std::vector<bool> trainable;
    if (j.contains("trainable")) {
        trainable = detail::get<std::vector<bool>>(j.at("trainable"), where + ".trainable");
    }
    return Gate(kind, std::move(params), modes, std::move(trainable));
}

inline Circuit circuit_from_json(const json &j, const std::string &where = "circuit") {
    detail::reject_unknown(j, {"n_modes", "gates", "name"}, where);
    Circuit c;
    c.n_modes = detail::count(detail::required(j, "n_modes", where), where + ".n_modes");
    const json &gates = detail::required(j, "gates", where);
    if (!gates.is_array()) throw FormatError("config", where + ".gates must be an array");
    for (std::size_t i = 0; i < gates.size(); ++i) {
        c.gates.push_back(gate_from_json(gates[i], where + ".gates[" + std::to_string(i) + "]"));
    }
    detail::maybe(j, "name", c.name, where);
    c.validate();
    return c;
}

// --- kernels --------------------------------------------------------------

inline json to_json(const KernelSpec &k) {
    return {{"kind", std::string(to_string(k.kind))}, {"sigma", k.sigma},     {"cutoff", k.cutoff},
            {"combiner", std::string(to_string(k.combiner))}, {"norm_floor", k.norm_floor}};
}

inline KernelSpec kernel_from_json(const json &j, const std::string &where = "kernel") {
    detail::reject_unknown(j, {"kind", "sigma", "cutoff", "combiner", "norm_floor"}, where);
    KernelSpec k;
    if (j.contains("kind")) k.kind = parse_kernel_kind(detail::get<std::string>(j.at("kind"), where + ".kind"));
    if (j.contains("combiner")) {
        k.combiner = parse_combiner(detail::get<std::string>(j.at("combiner"), where + ".combiner"));
    }
    detail::maybe(j, "sigma", k.sigma, where);
    detail::maybe(j, "cutoff", k.cutoff, where);
    detail::maybe(j, "norm_floor", k.norm_floor, where);
    k.validate();
    return k;
}

// --- training -------------------------------------------------------------

inline json to_json(const TrainConfig &c) {
    json j{{"learning_rate", c.learning_rate},
           {"max_iterations", c.max_iterations},
           {"m_model", c.m_model},
           {"n_data", c.n_data},
           {"r_shift", c.r_shift},
           {"s_shift", c.s_shift},
           {"seed", c.seed},
           {"kernel", to_json(c.kernel)},
           {"convergence_window", c.convergence_window},
           {"convergence_tol", c.convergence_tol},
           {"simultaneous", c.simultaneous},
           {"reuse_model_samples", c.reuse_model_samples},
           {"randomize_init", c.randomize_init},
           {"shifts",
            {{"displacement", c.shifts.displacement},
             {"squeezing", c.shifts.squeezing},
             {"nongaussian", c.shifts.nongaussian}}},
           {"cutoff", c.backend.fock.cutoff},
           {"force_fock", c.backend.force_fock}};
    j["transmissivity"] = c.transmissivity ? json(*c.transmissivity) : json(nullptr);
    return j;
}

inline TrainConfig train_from_json(const json &j, const std::string &where = "train") {
    detail::reject_unknown(j,
                           {"learning_rate", "max_iterations", "m_model", "n_data", "r_shift", "s_shift", "seed",
                            "transmissivity", "kernel", "convergence_window", "convergence_tol", "simultaneous",
                            "reuse_model_samples", "randomize_init", "shifts", "cutoff", "force_fock"},
                           where);
    TrainConfig c;
    detail::maybe(j, "learning_rate", c.learning_rate, where);
    detail::maybe(j, "max_iterations", c.max_iterations, where);
    detail::maybe(j, "m_model", c.m_model, where);
    detail::maybe(j, "n_data", c.n_data, where);
    detail::maybe(j, "r_shift", c.r_shift, where);
    detail::maybe(j, "s_shift", c.s_shift, where);
    detail::maybe(j, "seed", c.seed, where);
    detail::maybe(j, "convergence_window", c.convergence_window, where);
    detail::maybe(j, "convergence_tol", c.convergence_tol, where);
    detail::maybe(j, "simultaneous", c.simultaneous, where);
    detail::maybe(j, "reuse_model_samples", c.reuse_model_samples, where);
    detail::maybe(j, "randomize_init", c.randomize_init, where);
    detail::maybe(j, "cutoff", c.backend.fock.cutoff, where);
    detail::maybe(j, "force_fock", c.backend.force_fock, where);
    if (j.contains("transmissivity") && !j.at("transmissivity").is_null()) {
        c.transmissivity = detail::number(j.at("transmissivity"), where + ".transmissivity");
    }
    if (j.contains("kernel")) c.kernel = kernel_from_json(j.at("kernel"), where + ".kernel");
    if (j.contains("shifts")) {
        const json &s = j.at("shifts");
        const std::string w = where + ".shifts";
        detail::reject_unknown(s, {"displacement", "squeezing", "nongaussian"}, w);
        detail::maybe(s, "displacement", c.shifts.displacement, w);
        detail::maybe(s, "squeezing", c.shifts.squeezing, w);
        detail::maybe(s, "nongaussian", c.shifts.nongaussian, w);
    }
    if (!(c.learning_rate > 0.0)) throw InvalidArgument("trainer", "learning_rate must be positive");
    c.validate();
    return c;
}

// --- targets --------------------------------------------------------------

inline json to_json(const TargetSpec &t) {
    json j{{"count", t.count}, {"seed", t.seed}};
    if (t.kind == TargetKind::ClassicalGaussian) {
        j["kind"] = "ClassicalGaussian";
        j["mu"] = t.mu;
        j["sigma"] = t.sigma;
    } else {
        j["kind"] = "QuantumCircuit";
        j["circuit"] = to_json(*t.circuit);
    }
    return j;
}

inline TargetSpec target_from_json(const json &j, const std::string &where = "target") {
    detail::reject_unknown(j, {"kind", "mu", "sigma", "circuit", "count", "seed"}, where);
    TargetSpec t;
    const auto kind = detail::get<std::string>(detail::required(j, "kind", where), where + ".kind");
    if (kind == "ClassicalGaussian") {
        t.kind = TargetKind::ClassicalGaussian;
        if (j.contains("circuit")) throw FormatError("config", where + ": 'circuit' is only valid for QuantumCircuit");
        auto vec = [&](const char *key, std::vector<double> &out) {
            if (!j.contains(key)) return;
            const json &v = j.at(key);
            out = v.is_number() ? std::vector<double>{detail::number(v, where + "." + key)}
                                : detail::get<std::vector<double>>(v, where + "." + key);
        };
        vec("mu", t.mu);
        vec("sigma", t.sigma);
    } else if (kind == "QuantumCircuit") {
        t.kind = TargetKind::QuantumCircuit;
        if (j.contains("mu") || j.contains("sigma")) {
            throw FormatError("config", where + ": 'mu'/'sigma' are only valid for ClassicalGaussian");
        }
        t.circuit = circuit_from_json(detail::required(j, "circuit", where), where + ".circuit");
    } else {
        throw FormatError("config", where + ".kind must be ClassicalGaussian or QuantumCircuit, got '" + kind + "'");
    }
    detail::maybe(j, "count", t.count, where);
    detail::maybe(j, "seed", t.seed, where);
    t.validate();
    return t;
}

// --- run configs ----------------------------------------------------------

inline json parse_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw IoError("config", "cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error &e) {
        throw FormatError("config", path + ": " + e.what());
    }
}

inline void write_file(const std::string &path, const json &j) {
    std::ofstream out(path);
    if (!out) throw IoError("config", "cannot open '" + path + "' for writing");
    out << j.dump(2) << '\n';
    if (!out) throw IoError("config", "write to '" + path + "' failed");
}

inline RunConfig run_config_from_json(const json &j) {
    detail::reject_unknown(j, {"circuit", "target", "train", "output_dir"}, "config");
    RunConfig rc;
    rc.raw = j;
    rc.circuit = circuit_from_json(detail::required(j, "circuit", "config"));
    rc.target = target_from_json(detail::required(j, "target", "config"));
    rc.train = j.contains("train") ? train_from_json(j.at("train")) : TrainConfig{};
    detail::maybe(j, "output_dir", rc.output_dir, "config");
    if (rc.target.dimension() != rc.circuit.n_modes) {
        throw DimensionMismatch("config", "target dimension " + std::to_string(rc.target.dimension()) +
                                              " does not match the circuit's " + std::to_string(rc.circuit.n_modes) +
                                              " modes");
    }
    return rc;
}

inline RunConfig load_run_config(const std::string &path) { return run_config_from_json(parse_file(path)); }

inline Circuit load_circuit(const std::string &path) { return circuit_from_json(parse_file(path)); }

} // namespace io
} // namespace cvbm
