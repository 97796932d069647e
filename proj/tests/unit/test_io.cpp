#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "abode/error.hpp"
#include "abode/io/dataset.hpp"
#include "abode/io/model_file.hpp"
#include "abode/io/pdb.hpp"
#include "abode/io/results.hpp"
#include "abode/io/run_config.hpp"
#include "abode/io/task.hpp"
#include "abode/rng.hpp"
#include "abode/synthetic.hpp"
#include "abode/train.hpp"
#include "abode/metrics.hpp"

namespace {

using namespace abode;
using namespace abode::io;
using geometry::Vec3;
namespace fs = std::filesystem;

std::string atom(int serial, const char* name, const char* res, char chain, int seq, double x, double y, double z,
                 char alt = ' ', char icode = ' ', const char* record = "ATOM  ") {
  char buf[100];
  std::snprintf(buf, sizeof buf, "%-6s%5d %-4s%c%3s %c%4d%c   %8.3f%8.3f%8.3f  1.00  0.00\n", record, serial, name,
                alt, res, chain, seq, icode, x, y, z);
  return buf;
}

std::string residue(int& serial, const char* res, char chain, int seq, double x, char icode = ' ') {
  return atom(serial++, " N", res, chain, seq, x, 0.5, 0.0, ' ', icode) +
         atom(serial++, " CA", res, chain, seq, x + 0.5, 1.0, 0.3, ' ', icode) +
         atom(serial++, " C", res, chain, seq, x + 1.0, 0.6, 0.1, ' ', icode);
}

fs::path scratch_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("abode_io_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

TEST(Pdb, MinimalResidue) {
  int serial = 1;
  const Structure s = parse_structure_text(residue(serial, "GLY", 'H', 7, 1.0) + "END\n");
  ASSERT_EQ(s.chains.size(), 1u);
  const Chain& c = s.chains[0];
  EXPECT_EQ(c.id, "H");
  ASSERT_EQ(c.residues.size(), 1u);
  EXPECT_EQ(c.residues[0].letter, 'G');
  EXPECT_EQ(c.residues[0].res_seq, 7);
  EXPECT_EQ(c.residues[0].atoms[1], Vec3(1.5, 1.0, 0.3));
  EXPECT_TRUE(s.warnings.empty());
}

TEST(Pdb, IncompleteAndNonstandardResiduesDropped) {
  int serial = 1;
  std::string text = residue(serial, "ALA", 'A', 1, 0.0);
  text += atom(serial++, " CA", "SER", 'A', 2, 4.0, 1.0, 0.0);  // CA only
  text += residue(serial, "MSE", 'A', 3, 8.0);
  text += residue(serial, "TRP", 'A', 4, 12.0);
  const Structure s = parse_structure_text(text);
  ASSERT_EQ(s.chains[0].residues.size(), 2u);
  EXPECT_EQ(s.chains[0].residues[1].letter, 'W');
  EXPECT_EQ(s.warnings.size(), 2u);
}

TEST(Pdb, AltLocModelsAndInsertionCodes) {
  int serial = 1;
  std::string text = "MODEL        1\n";
  text += residue(serial, "ALA", 'A', 1, 0.0);
  text += atom(serial++, " N", "VAL", 'A', 2, 4.0, 0.5, 0.0, 'A');
  text += atom(serial++, " N", "VAL", 'A', 2, 40.0, 0.5, 0.0, 'B');
  text += atom(serial++, " CA", "VAL", 'A', 2, 4.5, 1.0, 0.3, 'A');
  text += atom(serial++, " C", "VAL", 'A', 2, 5.0, 0.6, 0.1, 'A');
  text += residue(serial, "GLY", 'A', 2, 8.0, 'A');  // 2A follows 2
  text += "ENDMDL\nMODEL        2\n";
  text += residue(serial, "LYS", 'A', 9, 20.0);
  text += "ENDMDL\n";
  const Structure s = parse_structure_text(text);
  const auto& r = s.chains[0].residues;
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[1].letter, 'V');
  EXPECT_EQ(r[1].atoms[0].x(), 4.0);
  EXPECT_EQ(r[2].letter, 'G');
  EXPECT_EQ(r[2].icode, 'A');
}

TEST(Pdb, Errors) {
  EXPECT_THROW(parse_structure_text("HEADER nothing\n"), IoError);
  EXPECT_THROW(parse_structure_text(atom(1, " CA", "ALA", 'A', 1, 0, 0, 0).replace(32, 4, "abcd")), IoError);
  EXPECT_THROW(parse_structure("/nonexistent/file.pdb"), IoError);
}

TEST(Pdb, WriteThenRead) {
  Rng rng(3);
  const Segment seg = synthetic::random_chain(rng, 6, Vec3(1, 2, 3));
  std::ostringstream out;
  write_pdb(out, {{"H", seg}});
  const Structure s = parse_structure_text(out.str());
  const Segment back = to_segment(*s.find("H"));
  EXPECT_EQ(back.sequence, seg.sequence);
  for (std::size_t i = 0; i < seg.size(); ++i)
    for (std::size_t p = 0; p < 3; ++p) EXPECT_LT((back.coords.atoms[i][p] - seg.coords.atoms[i][p]).norm(), 1e-3);
}

// Twelve residues numbered 1..12 on H and four on A.
std::string toy_complex() {
  int serial = 1;
  std::string text;
  const char* names[] = {"ALA", "CYS", "ASP", "GLU", "PHE", "GLY", "HIS", "ILE", "LYS", "LEU", "MET", "ASN"};
  for (int i = 0; i < 12; ++i) text += residue(serial, names[i], 'H', i + 1, 3.8 * i);
  for (int i = 0; i < 4; ++i) text += residue(serial, "SER", 'A', i + 1, 3.8 * i + 1.0);
  return text;
}

TaskSpec toy_task() {
  TaskSpec t;
  t.id = "toy";
  t.antibody_chain = "H";
  t.cdr_first = 3;
  t.cdr_last = 10;
  t.antigen_chains = {"A"};
  return t;
}

TEST(Extract, FlanksAroundCdr) {
  const Structure s = parse_structure_text(toy_complex());
  const FeaturizedComplex c = extract_complex(s, toy_task());
  EXPECT_EQ(c.cdr.sequence, "DEFGHIKL");
  EXPECT_EQ(c.prefix.coords.index.back(), 2);
  EXPECT_EQ(c.suffix.coords.index.front(), 11);
  EXPECT_EQ(c.antigen.size(), 4u);
  EXPECT_EQ(c.provenance.cdr_first, 3);
}

TEST(Extract, EpitopeCutoffs) {
  const Structure s = parse_structure_text(toy_complex());
  TaskSpec t = toy_task();
  t.epitope_cutoff = 0.0;
  const FeaturizedComplex c = extract_complex(s, t);
  EXPECT_TRUE(c.antigen.empty());
  train::TrainConfig cfg;
  EXPECT_EQ(train::prepare(c, cfg).graph.num_antigen, 0u);
}

TEST(Extract, RangeErrors) {
  const Structure s = parse_structure_text(toy_complex());
  TaskSpec t = toy_task();
  t.cdr_first = 1;
  EXPECT_THROW(extract_complex(s, t), ConfigError);
  t = toy_task();
  t.cdr_last = 30;
  EXPECT_THROW(extract_complex(s, t), ConfigError);
  t = toy_task();
  t.antigen_chains = {"Z"};
  EXPECT_THROW(extract_complex(s, t), ConfigError);
}

TEST(Extract, FixedBackboneTakesWholeChain) {
  const Structure s = parse_structure_text(toy_complex());
  TaskSpec t = toy_task();
  t.mode = TaskMode::FixedBackbone;
  const FeaturizedComplex c = extract_complex(s, t);
  EXPECT_EQ(c.cdr.size(), 12u);
  EXPECT_TRUE(c.prefix.empty());
}

TEST(Tasks, ParseForms) {
  const nlohmann::json one = {{"structure", "x.pdb"}, {"antibody_chain", "H"}, {"cdr", {3, 10}}};
  const auto a = parse_tasks(one, "/data");
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a[0].structure, fs::path("/data/x.pdb"));
  EXPECT_EQ(a[0].id, "x:H");
  EXPECT_EQ(parse_tasks(nlohmann::json::array({one, one}), "/").size(), 2u);
  EXPECT_EQ(parse_tasks({{"tasks", {one}}}, "/").size(), 1u);
  nlohmann::json bad = one;
  bad["cdrs"] = 1;
  EXPECT_THROW(parse_tasks(bad, "/"), ConfigError);
  nlohmann::json reversed = one;
  reversed["cdr"] = {10, 3};
  EXPECT_THROW(parse_tasks(reversed, "/"), ConfigError);
  EXPECT_EQ(parse_tasks(to_json(a[0]), "/")[0].cdr_last, 10);
}

TEST(Dataset, RoundTrip) {
  const auto data = synthetic::random_complexes(2, 3);
  std::stringstream buf;
  write_dataset(buf, data);
  const auto back = read_dataset(buf);
  ASSERT_EQ(back.size(), 3u);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_EQ(to_json(back[k]), to_json(data[k]));
    EXPECT_EQ(back[k].cdr.coords.atoms, data[k].cdr.coords.atoms);
  }
}

TEST(Dataset, EmptyAndAppend) {
  const fs::path d = scratch_dir("dataset");
  write_dataset(d / "empty.jsonl", {});
  EXPECT_EQ(fs::file_size(d / "empty.jsonl"), 0u);
  EXPECT_TRUE(read_dataset(d / "empty.jsonl").empty());
  const auto data = synthetic::random_complexes(2, 2);
  append_dataset(d / "grow.jsonl", {data[0]});
  append_dataset(d / "grow.jsonl", {data[1]});
  EXPECT_EQ(read_dataset(d / "grow.jsonl").size(), 2u);
  fs::remove_all(d);
}

TEST(Dataset, CorruptedLineNamed) {
  const auto data = synthetic::random_complexes(2, 2);
  std::stringstream buf;
  write_dataset(buf, data);
  std::string text = buf.str() + "{not json\n";
  std::istringstream in(text);
  try {
    read_dataset(in, "data.jsonl");
    FAIL() << "expected an error";
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("data.jsonl:3"), std::string::npos) << e.what();
  }
}

TEST(Dataset, UnknownKeysIgnoredVersionChecked) {
  nlohmann::json j = to_json(synthetic::random_complex(1));
  j["cluster"] = 12;
  EXPECT_NO_THROW(complex_from_json(j));
  j["v"] = 2;
  EXPECT_THROW(complex_from_json(j), IoError);
}

TEST(ModelFile, RoundTripIsBitExact) {
  ModelFile f;
  f.params = model::init_params(model::ModelConfig{}, 4);
  f.seed = 4;
  f.extra["note"] = "x";
  const ModelFile back = decode_model(encode_model(f));
  EXPECT_EQ(back.params.tensors, f.params.tensors);
  EXPECT_EQ(back.seed, 4u);
  EXPECT_EQ(back.extra["note"], "x");
  EXPECT_EQ(encode_model(back), encode_model(f));
}

TEST(ModelFile, TruncationAndShapeErrors) {
  ModelFile f;
  f.params = model::init_params(model::ModelConfig{}, 1);
  const std::string bytes = encode_model(f);
  EXPECT_THROW(decode_model(bytes.substr(0, bytes.size() - 8)), IoError);
  EXPECT_THROW(decode_model(bytes.substr(0, 10)), IoError);
  EXPECT_THROW(decode_model("NOTAMODEL" + bytes), IoError);
  EXPECT_THROW(decode_model(bytes + std::string(8, '\0')), ShapeError);
  // a header whose tensor shapes disagree with the payload
  std::string edited = bytes;
  const std::string needle = "[46,128]";
  const auto pos = edited.find(needle);
  ASSERT_NE(pos, std::string::npos);
  edited.replace(pos, needle.size(), "[46,127]");
  EXPECT_THROW(decode_model(edited), ShapeError);
}

TEST(ModelFile, MissingFile) { EXPECT_THROW(load_model("/nonexistent/model.abode"), IoError); }

TEST(RunConfig, DefaultsOverridesAndUnknownKeys) {
  const RunConfig a = run_config_from_json(nlohmann::json::object());
  EXPECT_EQ(a.train.adam.lr, 1e-3);
  EXPECT_EQ(a.train.solver.t_end, 200.0);
  const RunConfig b = run_config_from_json({{"adam", {{"lr", 2e-4}}}, {"solver", {{"steps", 10}}}, {"epochs", 3}});
  EXPECT_EQ(b.train.adam.lr, 2e-4);
  EXPECT_EQ(b.train.solver.steps, 10u);
  EXPECT_EQ(b.train.epochs, 3u);
  EXPECT_THROW(run_config_from_json({{"learning_rate", 1}}), ConfigError);
  EXPECT_THROW(run_config_from_json({{"adam", {{"lrr", 1}}}}), ConfigError);
  EXPECT_THROW(run_config_from_json({{"epochs", "many"}}), ConfigError);
  EXPECT_EQ(run_config_from_json(to_json(b)).train.adam.lr, 2e-4);
}

TEST(Results, DesignRoundTrip) {
  const fs::path d = scratch_dir("results");
  NamedDesign nd;
  nd.id = "s1";
  nd.design = metrics::decode(ad::Array(3, graph::kStateDim));
  Rng rng(1);
  nd.design.coords = synthetic::random_chain(rng, 3, Vec3::Zero()).coords;
  write_designs(d / "p.jsonl", {nd, nd});
  const auto back = read_designs(d / "p.jsonl");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].design.sequence, "AAA");
  EXPECT_EQ(back[0].design.probabilities, nd.design.probabilities);
  EXPECT_EQ(back[1].design.coords.atoms, nd.design.coords.atoms);
  fs::remove_all(d);
}

TEST(Results, HistoryHasNoWallClock) {
  train::TrainHistory h;
  h.epochs.emplace_back();
  h.epochs[0].wall_seconds = 12.0;
  EXPECT_EQ(to_json(h).dump().find("wall"), std::string::npos);
}

}  // namespace
