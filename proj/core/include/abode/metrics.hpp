#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "abode/ad/array.hpp"
#include "abode/complex.hpp"
#include "abode/geometry.hpp"
#include "abode/graph.hpp"
#include "abode/model.hpp"
#include "abode/ode.hpp"

namespace abode::metrics {

using ad::Array;

struct DesignResult {
  std::string sequence;
  Array probabilities;  // m x 20, rows sum to 1
  geometry::BackboneCoords coords;
  std::vector<double> confidence;
};

struct EvalReport {
  double ppl = 0.0;
  double aar = 0.0;
  double rmsd = 0.0;
  double gravy = 0.0;
  double instability = 0.0;
  double aromaticity = 0.0;
};

/// Row-wise softmax, argmax with ties going to the lowest alphabet index.
DesignResult decode(const Array& z_end);

/// Integrates from z(0) to T and decodes labels and coordinates.
DesignResult generate(const graph::ComplexGraph& graph, const model::ModelParams& params,
                      const ode::SolverConfig& solver);

/// Sequence design on a frozen backbone (k-nearest-neighbour graph, labels only).
DesignResult fixed_backbone_design(const Segment& protein, const model::ModelParams& params,
                                   const ode::SolverConfig& solver);

/// exp of the mean negative log probability of the true labels (clamped at 1e-12).
double perplexity(const Array& probabilities, std::span<const std::size_t> labels);
/// Percentage of positions where the sequences agree.
double aar(std::string_view predicted, std::string_view truth);
/// Kabsch RMSD over CA positions.
double rmsd_eval(const geometry::BackboneCoords& predicted, const geometry::BackboneCoords& truth);

/// Hydropathy and dipeptide instability tables.
struct BiochemTables {
  std::array<double, 20> hydropathy{};
  std::array<std::array<double, 20>, 20> instability{};
};

/// Loads both tables from `dir`, verifying their SHA-256 digests.
BiochemTables load_tables(const std::filesystem::path& dir);
/// Tables from ABODE_DATA_DIR, the install prefix or the source tree, loaded once.
const BiochemTables& default_tables();
std::filesystem::path data_directory();

struct BiochemIndices {
  double gravy = 0.0;
  double instability = 0.0;
  double aromaticity = 0.0;
};
BiochemIndices biochemical_indices(std::string_view sequence, const BiochemTables& tables = default_tables());

/// Metrics of one design against its ground-truth sample.
EvalReport evaluate(const DesignResult& design, const FeaturizedComplex& truth,
                    const BiochemTables& tables = default_tables());
/// Arithmetic mean of each field.
EvalReport mean_report(std::span<const EvalReport> reports);

/// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace abode::metrics
