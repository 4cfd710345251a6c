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
 * @file circuit.hpp
 * Parameterized circuits U(theta)|0>^n, the flat trainable-parameter view,
 * backend dispatch, parameter-shift circuit pairs and Born-rule sampling.
 */
#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "fock.hpp"
#include "gate.hpp"
#include "gaussian.hpp"
#include "sampler.hpp"
#include "types.hpp"

namespace cvbm {

struct Circuit {
    std::size_t n_modes{1};
    std::vector<Gate> gates;
    std::string name;

    Circuit() = default;
    Circuit(std::size_t modes, std::vector<Gate> g, std::string n = {})
        : n_modes(modes), gates(std::move(g)), name(std::move(n)) {
        validate();
    }

    void validate() const {
        if (n_modes < 1) {
            throw InvalidArgument("circuit", "n_modes must be at least 1");
        }
        for (const auto &gate : gates) {
            gate.validate();
            for (auto mode : gate.modes) {
                if (mode >= n_modes) {
                    throw IndexError("circuit", "gate " + std::string(to_string(gate.kind)) + " acts on mode " +
                                                    std::to_string(mode) + " of a " + std::to_string(n_modes) +
                                                    "-mode circuit");
                }
            }
        }
    }

    [[nodiscard]] bool is_gaussian() const {
        for (const auto &gate : gates) {
            if (!cvbm::is_gaussian(gate.kind)) return false;
        }
        return true;
    }

    [[nodiscard]] std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const auto &gate : gates) {
            n += gate.trainable_count();
        }
        return n;
    }

    /// (gate index, parameter slot) of trainable parameter k.
    [[nodiscard]] std::pair<std::size_t, std::size_t> locate(std::size_t k) const {
        std::size_t seen = 0;
        for (std::size_t g = 0; g < gates.size(); ++g) {
            for (std::size_t s = 0; s < gates[g].params.size(); ++s) {
                if (!gates[g].trainable[s]) continue;
                if (seen == k) return {g, s};
                ++seen;
            }
        }
        throw IndexError("circuit", "trainable parameter index " + std::to_string(k) + " out of range");
    }

    [[nodiscard]] std::vector<double> parameters() const {
        std::vector<double> out;
        out.reserve(parameter_count());
        for (const auto &gate : gates) {
            for (std::size_t s = 0; s < gate.params.size(); ++s) {
                if (gate.trainable[s]) out.push_back(gate.params[s]);
            }
        }
        return out;
    }

    void set_parameters(std::span<const double> values) {
        if (values.size() != parameter_count()) {
            throw DimensionMismatch("circuit", "parameter vector has length " + std::to_string(values.size()) +
                                                   ", expected " + std::to_string(parameter_count()));
        }
        std::size_t k = 0;
        for (auto &gate : gates) {
            for (std::size_t s = 0; s < gate.params.size(); ++s) {
                if (gate.trainable[s]) gate.params[s] = values[k++];
            }
        }
    }

    [[nodiscard]] double parameter(std::size_t k) const {
        const auto [g, s] = locate(k);
        return gates[g].params[s];
    }

    void set_parameter(std::size_t k, double value) {
        const auto [g, s] = locate(k);
        gates[g].params[s] = value;
    }

    bool operator==(const Circuit &) const = default;
};

enum class Backend { Gaussian, Fock };

inline std::string_view to_string(Backend b) { return b == Backend::Gaussian ? "gaussian" : "fock"; }

struct BackendConfig {
    FockConfig fock{};
    /// Run Gaussian circuits on the Fock backend as well.
    bool force_fock{false};
    SamplerOptions sampler{};
};

struct RunResult {
    Backend backend{Backend::Gaussian};
    std::variant<GaussianState, FockState> state;
};

/// Loss channels applied after state preparation.
using NoiseModel = std::vector<LossChannel>;

/// Same transmissivity on every mode; T = 1 yields an empty model.
inline NoiseModel uniform_loss(std::size_t n_modes, double transmissivity) {
    NoiseModel noise;
    for (std::size_t k = 0; k < n_modes; ++k) {
        noise.push_back({transmissivity, k});
    }
    return noise;
}

inline Backend select_backend(const Circuit &circuit, const BackendConfig &config) {
    return (circuit.is_gaussian() && !config.force_fock) ? Backend::Gaussian : Backend::Fock;
}

/// Evolves the n-mode vacuum through the circuit on the selected backend.
inline RunResult run(const Circuit &circuit, const BackendConfig &config = {}) {
    circuit.validate();
    if (select_backend(circuit, config) == Backend::Gaussian) {
        GaussianState state = gaussian::vacuum(circuit.n_modes, config.fock.hbar);
        for (const auto &gate : circuit.gates) {
            state = gaussian::apply_symplectic(state, gate);
        }
        return {Backend::Gaussian, std::move(state)};
    }
    FockState state = FockState::vacuum(circuit.n_modes, config.fock);
    for (const auto &gate : circuit.gates) {
        state = fock::apply_gate(state, gate);
    }
    return {Backend::Fock, std::move(state)};
}

struct ShiftSettings {
    /// s for Displacement (scale 1/s).
    double displacement{0.1};
    /// s for Squeezing r (scale 1/sinh s).
    double squeezing{0.1};
    /// t for CubicPhase and Kerr (scale 1/t).
    double nongaussian{0.01};

    void validate() const {
        if (!(displacement > 0.0 && squeezing > 0.0 && nongaussian > 0.0)) {
            throw InvalidArgument("circuit", "shift magnitudes must be positive");
        }
    }
};

struct ShiftRule {
    double shift{0.0};
    double scale{1.0};
};

inline ShiftRule shift_rule(GateKind kind, std::size_t slot, const ShiftSettings &settings) {
    if (!has_shift_rule(kind, slot)) {
        throw InvalidArgument("circuit", std::string(to_string(kind)) + " parameter has no shift rule");
    }
    switch (kind) {
    case GateKind::Rotation:
    case GateKind::Beamsplitter:
        return {kPi / 2.0, 1.0};
    case GateKind::Displacement:
        return {settings.displacement, 1.0 / settings.displacement};
    case GateKind::Squeezing:
        return {settings.squeezing, 1.0 / std::sinh(settings.squeezing)};
    case GateKind::CubicPhase:
    case GateKind::Kerr:
        return {settings.nongaussian, 1.0 / settings.nongaussian};
    }
    return {};
}

struct ShiftedCircuits {
    Circuit plus;
    Circuit minus;
    double shift{0.0};
    double scale{1.0};
};

/// Copies of `circuit` with trainable parameter k moved by +/- the gate's shift.
inline ShiftedCircuits shifted_circuits(const Circuit &circuit, std::size_t k, const ShiftSettings &settings = {}) {
    settings.validate();
    const auto [g, s] = circuit.locate(k);
    const ShiftRule rule = shift_rule(circuit.gates[g].kind, s, settings);
    ShiftedCircuits out{circuit, circuit, rule.shift, rule.scale};
    out.plus.gates[g].params[s] += rule.shift;
    out.minus.gates[g].params[s] -= rule.shift;
    return out;
}

/// Runs the circuit, applies `noise`, and homodyne-samples every mode at phi = 0.
inline Samples sample(const Circuit &circuit, std::size_t count, Rng &rng, const NoiseModel &noise = {},
                      const BackendConfig &config = {}) {
    if (count < 1) {
        throw InvalidArgument("circuit", "sample count must be at least 1");
    }
    RunResult result = run(circuit, config);
    if (result.backend == Backend::Gaussian) {
        GaussianState state = std::get<GaussianState>(std::move(result.state));
        for (const auto &channel : noise) {
            state = gaussian::apply_loss(state, channel);
        }
        return gaussian::homodyne_sample(state, rng, count);
    }
    FockEnsemble ensemble = FockEnsemble::pure(std::get<FockState>(std::move(result.state)));
    for (const auto &channel : noise) {
        channel.validate();
        ensemble = fock::apply_loss(ensemble, channel.transmissivity, channel.mode);
    }
    return sampler::sample_fock(ensemble, rng, count, config.sampler);
}

/// Random initial parameters: angles uniform in [0, 2pi), everything else N(0, 0.01).
inline void randomize_parameters(Circuit &circuit, Rng &rng) {
    std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
    std::normal_distribution<double> small(0.0, 0.1);
    for (auto &gate : circuit.gates) {
        for (std::size_t s = 0; s < gate.params.size(); ++s) {
            if (!gate.trainable[s]) continue;
            gate.params[s] = is_angle(gate.kind, s) ? angle(rng) : small(rng);
        }
    }
}

} // namespace cvbm
