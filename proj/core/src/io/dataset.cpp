#include "abode/io/dataset.hpp"

#include <fstream>
#include <string>

#include "abode/alphabet.hpp"
#include "abode/error.hpp"

namespace abode::io {

using nlohmann::json;

namespace {

constexpr const char* kTrackKeys[geometry::kTracks] = {"n", "ca", "c"};

geometry::Vec3 vec_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw IoError("coordinate must be [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

json to_json(const Segment& s) {
  s.check();
  json j;
  j["sequence"] = s.sequence;
  for (std::size_t t = 0; t < geometry::kTracks; ++t) {
    json track = json::array();
    for (const auto& atoms : s.coords.atoms) track.push_back({atoms[t].x(), atoms[t].y(), atoms[t].z()});
    j[kTrackKeys[t]] = std::move(track);
  }
  j["res_seq"] = s.coords.index;
  j["chain"] = s.chain;
  j["icode"] = std::string(s.icode.begin(), s.icode.end());
  return j;
}

Segment segment_from_json(const json& j) {
  Segment s;
  const auto sequence = j.at("sequence").get<std::string>();
  validate_sequence(sequence);
  const std::size_t n = sequence.size();
  const auto res_seq = j.at("res_seq").get<std::vector<int>>();
  const auto chain = j.at("chain").get<std::vector<int>>();
  const auto icode = j.at("icode").get<std::string>();
  const json& tn = j.at("n");
  const json& tca = j.at("ca");
  const json& tc = j.at("c");
  if (res_seq.size() != n || chain.size() != n || icode.size() != n || tn.size() != n || tca.size() != n ||
      tc.size() != n) {
    throw IoError("segment arrays disagree with the sequence length " + std::to_string(n));
  }
  for (std::size_t i = 0; i < n; ++i)
    s.push_back(sequence[i], vec_from(tn[i]), vec_from(tca[i]), vec_from(tc[i]), res_seq[i], chain[i], icode[i]);
  return s;
}

json to_json(const FeaturizedComplex& c) {
  json j;
  j["v"] = kDatasetVersion;
  j["id"] = c.id;
  j["mode"] = mode_name(c.mode);
  j["cdr"] = to_json(c.cdr);
  j["prefix"] = to_json(c.prefix);
  j["suffix"] = to_json(c.suffix);
  j["antigen"] = to_json(c.antigen);
  j["provenance"] = {{"source", c.provenance.source},
                     {"antibody_chain", c.provenance.antibody_chain},
                     {"antigen_chains", c.provenance.antigen_chains},
                     {"cdr_first", c.provenance.cdr_first},
                     {"cdr_last", c.provenance.cdr_last}};
  return j;
}

FeaturizedComplex complex_from_json(const json& j) {
  try {
    if (!j.is_object()) throw IoError("expected a JSON object");
    if (!j.contains("v")) throw IoError("missing schema version 'v'");
    const int v = j.at("v").get<int>();
    if (v != kDatasetVersion) {
      throw IoError("schema version " + std::to_string(v) + " is not supported (expected " +
                    std::to_string(kDatasetVersion) + ")");
    }
    FeaturizedComplex c;
    c.id = j.at("id").get<std::string>();
    c.mode = parse_mode(j.at("mode").get<std::string>());
    c.cdr = segment_from_json(j.at("cdr"));
    c.prefix = segment_from_json(j.at("prefix"));
    c.suffix = segment_from_json(j.at("suffix"));
    c.antigen = segment_from_json(j.at("antigen"));
    const json& p = j.at("provenance");
    c.provenance.source = p.at("source").get<std::string>();
    c.provenance.antibody_chain = p.at("antibody_chain").get<std::string>();
    c.provenance.antigen_chains = p.at("antigen_chains").get<std::vector<std::string>>();
    c.provenance.cdr_first = p.at("cdr_first").get<int>();
    c.provenance.cdr_last = p.at("cdr_last").get<int>();
    if (c.cdr.empty()) throw IoError("sample '" + c.id + "' has an empty designed segment");
    return c;
  } catch (const json::exception& e) {
    throw IoError(std::string("schema violation: ") + e.what());
  } catch (const ConfigError& e) {
    throw IoError(std::string("schema violation: ") + e.what());
  }
}

void write_dataset(std::ostream& out, const std::vector<FeaturizedComplex>& samples) {
  for (const auto& s : samples) out << to_json(s).dump() << '\n';
}

void write_dataset(const std::filesystem::path& path, const std::vector<FeaturizedComplex>& samples) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  write_dataset(out, samples);
}

void append_dataset(const std::filesystem::path& path, const std::vector<FeaturizedComplex>& samples) {
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw IoError("cannot write " + path.string());
  write_dataset(out, samples);
}

std::vector<FeaturizedComplex> read_dataset(std::istream& in, const std::string& name) {
  std::vector<FeaturizedComplex> out;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(complex_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw IoError(name + ":" + std::to_string(line_no) + ": invalid JSON: " + e.what());
    } catch (const IoError& e) {
      throw IoError(name + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<FeaturizedComplex> read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read dataset " + path.string());
  return read_dataset(in, path.string());
}

}  // namespace abode::io
