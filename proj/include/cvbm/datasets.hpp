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
 * @file datasets.hpp
 * Target distributions (product Gaussians and noiseless circuit samples) and
 * the dataset CSV format: header `x0,...,x{n-1}`, one sample per row, values
 * printed with 17 significant digits so doubles round-trip exactly.
 */
#pragma once

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "circuit.hpp"
#include "errors.hpp"
#include "types.hpp"

namespace cvbm {

enum class TargetKind { ClassicalGaussian, QuantumCircuit };

struct TargetSpec {
    TargetKind kind{TargetKind::ClassicalGaussian};
    std::vector<double> mu{0.0};
    std::vector<double> sigma{1.0};
    std::optional<Circuit> circuit{};
    std::size_t count{10000};
    std::uint64_t seed{0};

    void validate() const {
        if (count < 1) {
            throw InvalidArgument("datasets", "count must be at least 1");
        }
        if (kind == TargetKind::ClassicalGaussian) {
            if (mu.empty() || mu.size() != sigma.size()) {
                throw InvalidArgument("datasets", "mu and sigma must have the same nonzero length");
            }
            for (double s : sigma) {
                if (!(s > 0.0)) throw InvalidArgument("datasets", "sigma must be positive");
            }
        } else {
            if (!circuit) {
                throw InvalidArgument("datasets", "quantum target needs a circuit");
            }
            circuit->validate();
        }
    }

    [[nodiscard]] std::size_t dimension() const { return kind == TargetKind::ClassicalGaussian ? mu.size() : circuit->n_modes; }
};

namespace datasets {

/// Draws spec.count samples. Quantum targets are sampled without any noise channel.
inline Samples generate(const TargetSpec &spec, const BackendConfig &backend = {}) {
    spec.validate();
    Rng rng = derive_rng(spec.seed, {0x7a46});
    if (spec.kind == TargetKind::QuantumCircuit) {
        return sample(*spec.circuit, spec.count, rng, NoiseModel{}, backend);
    }
    const auto rows = static_cast<Eigen::Index>(spec.count);
    const auto cols = static_cast<Eigen::Index>(spec.mu.size());
    Samples out(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) {
            const auto d = static_cast<std::size_t>(j);
            out(i, j) = spec.mu[d] + spec.sigma[d] * standard_normal(rng);
        }
    }
    return out;
}

inline void save_csv(const std::string &path, const Samples &x) {
    std::FILE *f = std::fopen(path.c_str(), "w");
    if (f == nullptr) {
        throw IoError("datasets", "cannot open '" + path + "' for writing: " + std::strerror(errno));
    }
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        std::fprintf(f, j == 0 ? "x%ld" : ",x%ld", static_cast<long>(j));
    }
    std::fputc('\n', f);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            std::fprintf(f, j == 0 ? "%.17g" : ",%.17g", x(i, j));
        }
        std::fputc('\n', f);
    }
    const bool failed = std::ferror(f) != 0;
    if (std::fclose(f) != 0 || failed) {
        throw IoError("datasets", "write to '" + path + "' failed");
    }
}

namespace detail {

inline std::vector<std::string> split(const std::string &line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

inline void chomp(std::string &line) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
}

} // namespace detail

/// Loads a dataset CSV. A header-only file yields a 0 x n matrix.
inline Samples load_csv(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("datasets", "cannot open '" + path + "' for reading");
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw FormatError("datasets", path + ": missing header line");
    }
    detail::chomp(line);
    const auto header = detail::split(line);
    if (header.empty()) {
        throw FormatError("datasets", path + ":1: empty header");
    }
    const std::size_t cols = header.size();
    std::vector<double> values;
    std::size_t rows = 0;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        detail::chomp(line);
        if (line.empty()) continue;
        const auto cells = detail::split(line);
        if (cells.size() != cols) {
            throw FormatError("datasets", path + ":" + std::to_string(line_no) + ": expected " +
                                              std::to_string(cols) + " fields, found " + std::to_string(cells.size()));
        }
        for (const auto &cell : cells) {
            char *end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (cell.empty() || end == cell.c_str() || *end != '\0') {
                throw FormatError("datasets", path + ":" + std::to_string(line_no) + ": '" + cell + "' is not a number");
            }
            values.push_back(v);
        }
        ++rows;
    }
    Samples out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i * cols + j];
        }
    }
    return out;
}

} // namespace datasets
} // namespace cvbm
