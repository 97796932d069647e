#include "abode/io/results.hpp"

#include <fstream>

#include "abode/alphabet.hpp"
#include "abode/error.hpp"

namespace abode::io {

using nlohmann::json;

json to_json(const NamedDesign& nd) {
  const metrics::DesignResult& d = nd.design;
  json probs = json::array();
  for (std::size_t i = 0; i < d.probabilities.rows(); ++i) {
    json row = json::array();
    for (std::size_t c = 0; c < d.probabilities.cols(); ++c) row.push_back(d.probabilities(i, c));
    probs.push_back(std::move(row));
  }
  json coords = json::array();
  for (const auto& atoms : d.coords.atoms) {
    json residue = json::array();
    for (const auto& p : atoms) residue.push_back({p.x(), p.y(), p.z()});
    coords.push_back(std::move(residue));
  }
  return {{"id", nd.id},
          {"sequence", d.sequence},
          {"probabilities", std::move(probs)},
          {"coords", std::move(coords)},
          {"confidence", d.confidence}};
}

NamedDesign design_from_json(const json& j) {
  NamedDesign nd;
  try {
    nd.id = j.at("id").get<std::string>();
    metrics::DesignResult& d = nd.design;
    d.sequence = j.at("sequence").get<std::string>();
    validate_sequence(d.sequence);
    const std::size_t m = d.sequence.size();
    const json& probs = j.at("probabilities");
    const json& coords = j.at("coords");
    d.confidence = j.at("confidence").get<std::vector<double>>();
    if (probs.size() != m || coords.size() != m || d.confidence.size() != m) {
      throw IoError("design '" + nd.id + "': arrays disagree with the sequence length");
    }
    d.probabilities = ad::Array(m, kNumAminoAcids);
    for (std::size_t i = 0; i < m; ++i) {
      if (probs[i].size() != kNumAminoAcids) throw IoError("design '" + nd.id + "': probability rows need 20 entries");
      for (std::size_t c = 0; c < kNumAminoAcids; ++c) d.probabilities(i, c) = probs[i][c].get<double>();
      const json& r = coords[i];
      if (r.size() != 3) throw IoError("design '" + nd.id + "': each residue needs N, CA and C");
      geometry::Vec3 at[3];
      for (std::size_t t = 0; t < 3; ++t) at[t] = {r[t][0].get<double>(), r[t][1].get<double>(), r[t][2].get<double>()};
      d.coords.push_back(at[0], at[1], at[2], static_cast<int>(i));
    }
  } catch (const json::exception& e) {
    throw IoError(std::string("design schema violation: ") + e.what());
  }
  return nd;
}

void write_designs(const std::filesystem::path& path, const std::vector<NamedDesign>& designs) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& d : designs) out << to_json(d).dump() << '\n';
}

std::vector<NamedDesign> read_designs(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read predictions " + path.string());
  std::vector<NamedDesign> out;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(design_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

json to_json(const metrics::EvalReport& r) {
  return {{"ppl", r.ppl},     {"aar", r.aar},
          {"rmsd", r.rmsd},   {"gravy", r.gravy},
          {"instability", r.instability}, {"aromaticity", r.aromaticity}};
}

json to_json(const train::TrainHistory& history) {
  json epochs = json::array();
  std::size_t steps = 0;
  for (std::size_t e = 0; e < history.epochs.size(); ++e) {
    const auto& r = history.epochs[e];
    steps += r.steps;
    epochs.push_back({{"epoch", e + 1},
                      {"loss", r.mean.total},
                      {"seq", r.mean.seq},
                      {"angle", r.mean.angle},
                      {"radius", r.mean.radius},
                      {"grad_norm_mean", r.grad_norm_mean},
                      {"grad_norm_max", r.grad_norm_max},
                      {"steps", r.steps}});
  }
  return {{"epochs", std::move(epochs)}, {"steps", steps}};
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace abode::io
