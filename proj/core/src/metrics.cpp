#include "abode/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>

#include <openssl/evp.h>

#include "abode/alphabet.hpp"
#include "abode/error.hpp"

namespace abode::metrics {

namespace {

constexpr const char* kHydropathyFile = "kyte_doolittle.tsv";
constexpr const char* kInstabilityFile = "diwv.tsv";
constexpr const char* kHydropathySha = "2788552a65e14aafe32415030a51f4cf0587e8c2d4d1692bd0d648ab0af047a4";
constexpr const char* kInstabilitySha = "68012f6442b040ed54efada192637c3b8d661dd330b247c01f06db8269b3d4e2";

std::vector<std::vector<std::string>> read_table(const std::filesystem::path& path, const char* digest) {
  const std::string actual = sha256_file(path);
  if (actual != digest) throw IoError("checksum mismatch for " + path.string() + ": " + actual);
  std::ifstream in(path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::vector<std::string> row;
    for (std::string f; std::getline(fields, f, '\t');) row.push_back(f);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[8192];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return hex.str();
}

BiochemTables load_tables(const std::filesystem::path& dir) {
  BiochemTables t;
  std::array<bool, 20> seen{};
  for (const auto& row : read_table(dir / kHydropathyFile, kHydropathySha)) {
    if (row.size() != 2 || row[0].size() != 1) throw IoError("malformed hydropathy row");
    const std::size_t i = checked_residue_index(row[0][0]);
    t.hydropathy[i] = std::stod(row[1]);
    seen[i] = true;
  }
  if (std::count(seen.begin(), seen.end(), true) != 20) throw IoError("hydropathy table is incomplete");
  std::size_t pairs = 0;
  for (const auto& row : read_table(dir / kInstabilityFile, kInstabilitySha)) {
    if (row.size() != 3 || row[0].size() != 1 || row[1].size() != 1) throw IoError("malformed instability row");
    t.instability[checked_residue_index(row[0][0])][checked_residue_index(row[1][0])] = std::stod(row[2]);
    ++pairs;
  }
  if (pairs != 400) throw IoError("instability table must have 400 rows");
  return t;
}

std::filesystem::path data_directory() {
  if (const char* env = std::getenv("ABODE_DATA_DIR")) return env;
  for (const char* dir : {ABODE_INSTALLED_DATA_DIR, ABODE_SOURCE_DATA_DIR}) {
    if (std::filesystem::exists(std::filesystem::path(dir) / kHydropathyFile)) return dir;
  }
  return ABODE_SOURCE_DATA_DIR;
}

const BiochemTables& default_tables() {
  static const BiochemTables tables = load_tables(data_directory());
  return tables;
}

BiochemIndices biochemical_indices(std::string_view sequence, const BiochemTables& tables) {
  if (sequence.empty()) throw ConfigError("biochemical_indices: empty sequence");
  std::vector<std::size_t> idx;
  for (char c : sequence) idx.push_back(checked_residue_index(c));
  const double len = static_cast<double>(idx.size());
  BiochemIndices out;
  double aromatic = 0.0;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out.gravy += tables.hydropathy[idx[i]];
    if (sequence[i] == 'F' || sequence[i] == 'W' || sequence[i] == 'Y') aromatic += 1.0;
    if (i + 1 < idx.size()) out.instability += tables.instability[idx[i]][idx[i + 1]];
  }
  out.gravy /= len;
  out.instability *= 10.0 / len;
  out.aromaticity = aromatic / len;
  return out;
}

DesignResult decode(const Array& z_end) {
  if (z_end.cols() != graph::kStateDim) throw ShapeError("decode: state must have 29 columns");
  const std::size_t m = z_end.rows();
  DesignResult out;
  out.probabilities = Array(m, graph::kLabelDim);
  for (std::size_t i = 0; i < m; ++i) {
    double top = z_end(i, 0);
    std::size_t best = 0;
    for (std::size_t c = 1; c < graph::kLabelDim; ++c) {
      if (z_end(i, c) > top) {
        top = z_end(i, c);
        best = c;
      }
    }
    double total = 0.0;
    for (std::size_t c = 0; c < graph::kLabelDim; ++c) total += std::exp(z_end(i, c) - top);
    for (std::size_t c = 0; c < graph::kLabelDim; ++c) out.probabilities(i, c) = std::exp(z_end(i, c) - top) / total;
    out.sequence.push_back(kAlphabet[best]);
    out.confidence.push_back(out.probabilities(i, best));
  }
  return out;
}

DesignResult generate(const graph::ComplexGraph& graph, const model::ModelParams& params,
                      const ode::SolverConfig& solver) {
  params.validate();
  const Array h = model::conditioning(params, graph);
  const double t_end = solver.t_end;
  const ode::Rhs f = [&](double t, const Array& z) { return model::f_psi(params, graph, t, t_end, z, h); };
  const ode::Trajectory traj = ode::integrate(f, graph::init_state(graph), solver);
  const Array& z_end = traj.final_state();
  DesignResult out = decode(z_end);
  if (graph.frozen) {
    out.coords = graph.frozen_coords;
  } else {
    Array s(graph.num_antibody, geometry::kFeatureDim);
    for (std::size_t i = 0; i < s.rows(); ++i)
      for (std::size_t c = 0; c < s.cols(); ++c) s(i, c) = z_end(i, graph::kLabelDim + c);
    out.coords = geometry::reconstruct_cartesian(s, graph.anchors.seeds);
  }
  return out;
}

DesignResult fixed_backbone_design(const Segment& protein, const model::ModelParams& params,
                                   const ode::SolverConfig& solver) {
  return generate(graph::build_fixed_backbone_graph(protein), params, solver);
}

double perplexity(const Array& probabilities, std::span<const std::size_t> labels) {
  if (probabilities.rows() != labels.size() || probabilities.cols() != graph::kLabelDim) {
    throw ShapeError("perplexity: " + ad::shape_string(probabilities) + " rows for " + std::to_string(labels.size()) +
                     " labels");
  }
  if (labels.empty()) throw ShapeError("perplexity: no residues");
  // extended precision so a uniform row gives exactly 20 after rounding
  long double nll = 0.0L;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= graph::kLabelDim) throw ConfigError("perplexity: label outside the alphabet");
    nll -= std::log(static_cast<long double>(std::max(probabilities(i, labels[i]), 1e-12)));
  }
  return static_cast<double>(std::exp(nll / static_cast<long double>(labels.size())));
}

double aar(std::string_view predicted, std::string_view truth) {
  if (predicted.size() != truth.size()) {
    throw ShapeError("aar: lengths differ (" + std::to_string(predicted.size()) + " vs " +
                     std::to_string(truth.size()) + ")");
  }
  if (truth.empty()) throw ShapeError("aar: empty sequences");
  std::size_t same = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) same += predicted[i] == truth[i] ? 1 : 0;
  return 100.0 * static_cast<double>(same) / static_cast<double>(truth.size());
}

double rmsd_eval(const geometry::BackboneCoords& predicted, const geometry::BackboneCoords& truth) {
  const auto p = predicted.track(geometry::Track::CA);
  const auto q = truth.track(geometry::Track::CA);
  return geometry::kabsch_rmsd(p, q);
}

EvalReport evaluate(const DesignResult& design, const FeaturizedComplex& truth, const BiochemTables& tables) {
  const std::string& expected = truth.cdr.sequence;
  if (design.sequence.size() != expected.size()) {
    throw ShapeError("sample '" + truth.id + "': predicted length " + std::to_string(design.sequence.size()) +
                     " differs from true length " + std::to_string(expected.size()));
  }
  std::vector<std::size_t> labels;
  for (char c : expected) labels.push_back(checked_residue_index(c));
  EvalReport r;
  r.ppl = perplexity(design.probabilities, labels);
  r.aar = aar(design.sequence, expected);
  r.rmsd = rmsd_eval(design.coords, truth.cdr.coords);
  const BiochemIndices b = biochemical_indices(design.sequence, tables);
  r.gravy = b.gravy;
  r.instability = b.instability;
  r.aromaticity = b.aromaticity;
  return r;
}

EvalReport mean_report(std::span<const EvalReport> reports) {
  EvalReport m;
  if (reports.empty()) return m;
  for (const EvalReport& r : reports) {
    m.ppl += r.ppl;
    m.aar += r.aar;
    m.rmsd += r.rmsd;
    m.gravy += r.gravy;
    m.instability += r.instability;
    m.aromaticity += r.aromaticity;
  }
  const double n = static_cast<double>(reports.size());
  m.ppl /= n;
  m.aar /= n;
  m.rmsd /= n;
  m.gravy /= n;
  m.instability /= n;
  m.aromaticity /= n;
  return m;
}

}  // namespace abode::metrics
