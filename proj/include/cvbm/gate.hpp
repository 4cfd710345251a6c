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
 * @file gate.hpp
 * The CV gate set. Parameters are stored positionally; param_names() gives
 * the serialized name of each slot.
 *
 *   Rotation      R(phi)          = exp(i phi n)
 *   Displacement  D(re, im)       = exp(alpha a^+ - alpha^* a),  alpha = re + i im
 *   Squeezing     S(r, phi)       = exp((zeta^* a^2 - zeta a^+2) / 2),  zeta = r e^{i phi}
 *   Beamsplitter  BS(theta, phi)  = exp(theta (e^{i phi} a^+ b - e^{-i phi} a b^+))
 *   CubicPhase    V(gamma)        = exp(i gamma x^3 / (3 hbar))
 *   Kerr          K(kappa)        = exp(i kappa n^2)
 */
#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"

namespace cvbm {

enum class GateKind { Rotation, Displacement, Squeezing, Beamsplitter, CubicPhase, Kerr };

inline constexpr std::array<GateKind, 6> kAllGateKinds{GateKind::Rotation,     GateKind::Displacement,
                                                       GateKind::Squeezing,    GateKind::Beamsplitter,
                                                       GateKind::CubicPhase,   GateKind::Kerr};

inline std::string_view to_string(GateKind kind) {
    switch (kind) {
    case GateKind::Rotation:
        return "Rotation";
    case GateKind::Displacement:
        return "Displacement";
    case GateKind::Squeezing:
        return "Squeezing";
    case GateKind::Beamsplitter:
        return "Beamsplitter";
    case GateKind::CubicPhase:
        return "CubicPhase";
    case GateKind::Kerr:
        return "Kerr";
    }
    return "?";
}

/// Accepts the long names above and the short symbols R, D, S, BS, V, K.
inline GateKind parse_gate_kind(std::string_view name) {
    for (auto kind : kAllGateKinds) {
        if (name == to_string(kind)) {
            return kind;
        }
    }
    if (name == "R") return GateKind::Rotation;
    if (name == "D") return GateKind::Displacement;
    if (name == "S") return GateKind::Squeezing;
    if (name == "BS") return GateKind::Beamsplitter;
    if (name == "V") return GateKind::CubicPhase;
    if (name == "K") return GateKind::Kerr;
    throw InvalidArgument("circuit", "unknown gate kind '" + std::string(name) + "'");
}

inline std::span<const std::string_view> param_names(GateKind kind) {
    static constexpr std::array<std::string_view, 1> rotation{"phi"};
    static constexpr std::array<std::string_view, 2> displacement{"re", "im"};
    static constexpr std::array<std::string_view, 2> squeezing{"r", "phi"};
    static constexpr std::array<std::string_view, 2> beamsplitter{"theta", "phi"};
    static constexpr std::array<std::string_view, 1> cubic{"gamma"};
    static constexpr std::array<std::string_view, 1> kerr{"kappa"};
    switch (kind) {
    case GateKind::Rotation:
        return rotation;
    case GateKind::Displacement:
        return displacement;
    case GateKind::Squeezing:
        return squeezing;
    case GateKind::Beamsplitter:
        return beamsplitter;
    case GateKind::CubicPhase:
        return cubic;
    case GateKind::Kerr:
        return kerr;
    }
    return {};
}

inline std::size_t arity(GateKind kind) { return kind == GateKind::Beamsplitter ? 2 : 1; }

inline bool is_gaussian(GateKind kind) { return kind != GateKind::CubicPhase && kind != GateKind::Kerr; }

/// True for parameters that are angles (reported mod 2pi, initialized uniformly).
inline bool is_angle(GateKind kind, std::size_t slot) {
    switch (kind) {
    case GateKind::Rotation:
    case GateKind::Beamsplitter:
        return true;
    case GateKind::Squeezing:
        return slot == 1;
    default:
        return false;
    }
}

/// Whether a shift rule exists for the slot. The squeezing angle has none.
inline bool has_shift_rule(GateKind kind, std::size_t slot) {
    return !(kind == GateKind::Squeezing && slot == 1);
}

struct Gate {
    GateKind kind{GateKind::Rotation};
    std::vector<double> params;
    std::vector<std::size_t> modes;
    std::vector<bool> trainable;

    Gate() = default;

    Gate(GateKind k, std::vector<double> p, std::vector<std::size_t> m, std::vector<bool> t = {})
        : kind(k), params(std::move(p)), modes(std::move(m)), trainable(std::move(t)) {
        if (trainable.empty()) {
            trainable.resize(params.size());
            for (std::size_t i = 0; i < params.size(); ++i) {
                trainable[i] = has_shift_rule(kind, i);
            }
        }
        validate();
    }

    void validate() const {
        const auto names = param_names(kind);
        if (params.size() != names.size()) {
            throw InvalidArgument("circuit", std::string(to_string(kind)) + " expects " +
                                                 std::to_string(names.size()) + " parameters");
        }
        if (trainable.size() != params.size()) {
            throw InvalidArgument("circuit", "trainable mask length does not match parameter count");
        }
        if (modes.size() != arity(kind)) {
            throw InvalidArgument("circuit", std::string(to_string(kind)) + " acts on " +
                                                 std::to_string(arity(kind)) + " mode(s)");
        }
        if (modes.size() == 2 && modes[0] == modes[1]) {
            throw IndexError("circuit", "two-mode gate needs distinct modes");
        }
        for (std::size_t i = 0; i < params.size(); ++i) {
            if (trainable[i] && !has_shift_rule(kind, i)) {
                throw InvalidArgument("circuit", std::string(to_string(kind)) + " parameter '" +
                                                     std::string(names[i]) + "' has no shift rule");
            }
        }
    }

    [[nodiscard]] std::size_t trainable_count() const {
        std::size_t n = 0;
        for (bool t : trainable) {
            n += t ? 1 : 0;
        }
        return n;
    }

    static Gate rotation(std::size_t mode, double phi) { return {GateKind::Rotation, {phi}, {mode}}; }
    static Gate displacement(std::size_t mode, double re, double im = 0.0) {
        return {GateKind::Displacement, {re, im}, {mode}};
    }
    static Gate squeezing(std::size_t mode, double r, double phi = 0.0) {
        return {GateKind::Squeezing, {r, phi}, {mode}};
    }
    static Gate beamsplitter(std::size_t a, std::size_t b, double theta, double phi = 0.0) {
        return {GateKind::Beamsplitter, {theta, phi}, {a, b}};
    }
    static Gate cubic_phase(std::size_t mode, double gamma) { return {GateKind::CubicPhase, {gamma}, {mode}}; }
    static Gate kerr(std::size_t mode, double kappa) { return {GateKind::Kerr, {kappa}, {mode}}; }

    bool operator==(const Gate &) const = default;
};

} // namespace cvbm
