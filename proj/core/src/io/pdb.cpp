#include "abode/io/pdb.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <tuple>

#include "abode/alphabet.hpp"
#include "abode/error.hpp"

namespace abode::io {

namespace {

std::string_view field(std::string_view line, std::size_t first, std::size_t last) {
  // 1-based inclusive columns; short lines yield truncated or empty fields
  if (line.size() < first) return {};
  return line.substr(first - 1, std::min(last, line.size()) - first + 1);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  return s;
}

double parse_coord(std::string_view text, const std::string& where) {
  const std::string_view t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw IoError(where + ": malformed coordinate field '" + std::string(text) + "'");
  }
  return v;
}

int parse_int(std::string_view text, const std::string& where) {
  const std::string_view t = trim(text);
  int v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw IoError(where + ": malformed residue number '" + std::string(text) + "'");
  }
  return v;
}

struct Pending {
  std::string name;
  std::array<std::optional<geometry::Vec3>, geometry::kTracks> atoms;
};

using Key = std::tuple<int, char>;

}  // namespace

const Chain* Structure::find(std::string_view id) const {
  for (const Chain& c : chains)
    if (c.id == id) return &c;
  return nullptr;
}

Structure parse_structure_text(std::string_view text, std::string source) {
  Structure out;
  out.source = std::move(source);
  std::vector<std::string> order;
  std::map<std::string, std::map<Key, Pending>> pending;
  std::size_t atom_records = 0;
  bool in_model = false;
  bool model_done = false;
  std::size_t line_no = 0;
  std::istringstream lines{std::string(text)};
  for (std::string raw; std::getline(lines, raw);) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    const std::string_view line = raw;
    const std::string_view record = field(line, 1, 6);
    if (record.starts_with("MODEL")) {
      if (in_model || atom_records > 0) model_done = true;
      in_model = true;
      continue;
    }
    if (record.starts_with("ENDMDL")) {
      if (in_model) model_done = true;
      continue;
    }
    if (model_done) continue;
    if (record != "ATOM  " && record != "HETATM") continue;
    ++atom_records;
    const std::string where = out.source + ":" + std::to_string(line_no);
    const std::string_view alt = field(line, 17, 17);
    if (!alt.empty() && alt != " " && alt != "A") continue;
    const std::string_view atom = trim(field(line, 13, 16));
    std::size_t track = geometry::kTracks;
    if (atom == "N") track = 0;
    if (atom == "CA") track = 1;
    if (atom == "C") track = 2;
    const std::string res_name(trim(field(line, 18, 20)));
    const std::string chain_id(field(line, 22, 22).empty() ? " " : field(line, 22, 22));
    const int res_seq = parse_int(field(line, 23, 26), where);
    const std::string_view ic = field(line, 27, 27);
    const char icode = ic.empty() ? ' ' : ic[0];
    if (!pending.contains(chain_id)) order.push_back(chain_id);
    Pending& res = pending[chain_id][{res_seq, icode}];
    if (res.name.empty()) res.name = res_name;
    if (track == geometry::kTracks) continue;
    if (line.size() < 54) throw IoError(where + ": coordinate columns 31-54 are missing");
    geometry::Vec3 xyz(parse_coord(field(line, 31, 38), where), parse_coord(field(line, 39, 46), where),
                       parse_coord(field(line, 47, 54), where));
    if (!res.atoms[track]) res.atoms[track] = xyz;
  }
  if (atom_records == 0) throw IoError(out.source + ": no ATOM records");

  for (const std::string& id : order) {
    Chain chain;
    chain.id = id;
    for (const auto& [key, res] : pending[id]) {
      const auto [res_seq, icode] = key;
      const std::string label = "chain " + id + " residue " + std::to_string(res_seq) +
                                (icode == ' ' ? std::string() : std::string(1, icode)) + " (" + res.name + ")";
      const auto letter = one_letter(res.name);
      if (!letter) {
        out.warnings.push_back(out.source + ": dropped nonstandard " + label);
        continue;
      }
      if (!res.atoms[0] || !res.atoms[1] || !res.atoms[2]) {
        out.warnings.push_back(out.source + ": dropped incomplete " + label);
        continue;
      }
      chain.residues.push_back({*letter, res_seq, icode, {*res.atoms[0], *res.atoms[1], *res.atoms[2]}});
    }
    if (!chain.residues.empty()) out.chains.push_back(std::move(chain));
  }
  return out;
}

Structure parse_structure(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read structure file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_structure_text(buf.str(), path.string());
}

Segment to_segment(const Chain& chain, int chain_ordinal) {
  Segment s;
  for (const Residue& r : chain.residues)
    s.push_back(r.letter, r.atoms[0], r.atoms[1], r.atoms[2], r.res_seq, chain_ordinal, r.icode);
  return s;
}

void write_pdb(std::ostream& out, const std::vector<PdbChain>& chains) {
  static constexpr const char* kNames[geometry::kTracks] = {" N  ", " CA ", " C  "};
  static constexpr char kElements[geometry::kTracks] = {'N', 'C', 'C'};
  int serial = 1;
  char line[96];
  for (const PdbChain& chain : chains) {
    if (chain.id.size() != 1) throw IoError("chain id must be one character, got '" + chain.id + "'");
    const Segment& s = chain.segment;
    s.check();
    for (std::size_t i = 0; i < s.size(); ++i) {
      const std::string res(three_letter(s.sequence[i]));
      for (std::size_t t = 0; t < geometry::kTracks; ++t) {
        const geometry::Vec3& p = s.coords.atoms[i][t];
        std::snprintf(line, sizeof line, "ATOM  %5d %4s %3s %c%4d%c   %8.3f%8.3f%8.3f%6.2f%6.2f          %2c\n",
                      serial++, kNames[t], res.c_str(), chain.id[0], s.coords.index[i], s.icode[i], p.x(), p.y(),
                      p.z(), 1.0, 0.0, kElements[t]);
        out << line;
      }
    }
    out << "TER\n";
  }
  out << "END\n";
}

void write_pdb(const std::filesystem::path& path, const std::vector<PdbChain>& chains) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_pdb(out, chains);
}

}  // namespace abode::io
