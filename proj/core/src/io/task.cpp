#include "abode/io/task.hpp"

#include <fstream>
#include <set>

#include "abode/error.hpp"
#include "abode/graph.hpp"

namespace abode::io {

using nlohmann::json;

namespace {

const std::set<std::string> kTaskKeys = {"id", "structure", "antibody_chain", "cdr", "antigen_chains",
                                         "epitope_cutoff", "mode"};

TaskSpec parse_task(const json& j, const std::filesystem::path& base_dir, std::size_t ordinal) {
  const std::string where = "task " + std::to_string(ordinal);
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    if (!kTaskKeys.contains(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
  TaskSpec t;
  try {
    t.structure = j.at("structure").get<std::string>();
    if (t.structure.is_relative()) t.structure = base_dir / t.structure;
    t.antibody_chain = j.at("antibody_chain").get<std::string>();
    t.mode = parse_mode(j.value("mode", std::string("conditional")));
    if (j.contains("cdr")) {
      const json& cdr = j.at("cdr");
      if (!cdr.is_array() || cdr.size() != 2) throw ConfigError(where + ": cdr must be [first, last]");
      t.cdr_first = cdr[0].get<int>();
      t.cdr_last = cdr[1].get<int>();
    } else if (t.mode != TaskMode::FixedBackbone) {
      throw ConfigError(where + ": cdr range is required outside fixed_backbone mode");
    }
    if (j.contains("antigen_chains")) t.antigen_chains = j.at("antigen_chains").get<std::vector<std::string>>();
    if (j.contains("epitope_cutoff") && !j.at("epitope_cutoff").is_null()) {
      t.epitope_cutoff = j.at("epitope_cutoff").get<double>();
    }
    t.id = j.value("id", t.structure.stem().string() + ":" + t.antibody_chain);
  } catch (const json::exception& e) {
    throw ConfigError(where + ": " + e.what());
  }
  t.validate();
  return t;
}

}  // namespace

void TaskSpec::validate() const {
  if (antibody_chain.empty()) throw ConfigError("task '" + id + "': antibody chain id is empty");
  if (mode != TaskMode::FixedBackbone && cdr_first > cdr_last) {
    throw ConfigError("task '" + id + "': CDR range [" + std::to_string(cdr_first) + ", " + std::to_string(cdr_last) +
                      "] is empty");
  }
  if (epitope_cutoff && !(*epitope_cutoff >= 0.0)) throw ConfigError("task '" + id + "': epitope cutoff must be >= 0");
}

std::vector<TaskSpec> parse_tasks(const json& doc, const std::filesystem::path& base_dir) {
  const json* list = &doc;
  if (doc.is_object() && doc.contains("tasks")) {
    if (doc.size() != 1) throw ConfigError("task file: only the 'tasks' key is allowed next to a task list");
    list = &doc.at("tasks");
  }
  std::vector<TaskSpec> out;
  if (list->is_array()) {
    for (std::size_t i = 0; i < list->size(); ++i) out.push_back(parse_task((*list)[i], base_dir, i));
  } else {
    out.push_back(parse_task(*list, base_dir, 0));
  }
  return out;
}

std::vector<TaskSpec> load_tasks(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read task file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_tasks(doc, path.parent_path());
}

json to_json(const TaskSpec& task) {
  json j;
  j["id"] = task.id;
  j["structure"] = task.structure.string();
  j["antibody_chain"] = task.antibody_chain;
  j["mode"] = mode_name(task.mode);
  if (task.mode != TaskMode::FixedBackbone) j["cdr"] = {task.cdr_first, task.cdr_last};
  j["antigen_chains"] = task.antigen_chains;
  if (task.epitope_cutoff) j["epitope_cutoff"] = *task.epitope_cutoff;
  return j;
}

FeaturizedComplex extract_complex(const Structure& structure, const TaskSpec& task) {
  task.validate();
  const Chain* ab = structure.find(task.antibody_chain);
  if (ab == nullptr) throw ConfigError("task '" + task.id + "': chain " + task.antibody_chain + " not found");

  FeaturizedComplex out;
  out.id = task.id;
  out.mode = task.mode;
  out.provenance.source = structure.source;
  out.provenance.antibody_chain = task.antibody_chain;

  if (task.mode == TaskMode::FixedBackbone) {
    out.cdr = to_segment(*ab);
    if (out.cdr.size() < 2) throw ConfigError("task '" + task.id + "': chain is too short for features");
    out.provenance.cdr_first = ab->residues.front().res_seq;
    out.provenance.cdr_last = ab->residues.back().res_seq;
    return out;
  }

  const std::string range = "[" + std::to_string(task.cdr_first) + ", " + std::to_string(task.cdr_last) + "]";
  const auto& res = ab->residues;
  std::size_t first = res.size();
  std::size_t last = 0;
  for (std::size_t i = 0; i < res.size(); ++i) {
    if (res[i].res_seq < task.cdr_first || res[i].res_seq > task.cdr_last) continue;
    first = std::min(first, i);
    last = i;
  }
  if (first == res.size()) {
    throw ConfigError("task '" + task.id + "': CDR range " + range + " lies outside chain " + task.antibody_chain);
  }
  // every residue number inside the range must have survived parsing
  for (int n = task.cdr_first; n <= task.cdr_last; ++n) {
    bool present = false;
    for (std::size_t i = first; i <= last && !present; ++i) present = res[i].res_seq == n;
    if (!present) {
      throw ConfigError("task '" + task.id + "': CDR residue " + std::to_string(n) + " of range " + range +
                        " is missing or incomplete");
    }
  }
  if (first == 0 || last + 1 == res.size()) {
    throw ConfigError("task '" + task.id + "': CDR range " + range + " needs a flanking residue on both sides");
  }
  const Segment whole = to_segment(*ab);
  auto slice = [&](std::size_t begin, std::size_t end) {
    Segment s;
    for (std::size_t i = begin; i < end; ++i) {
      const auto& at = whole.coords.atoms[i];
      s.push_back(whole.sequence[i], at[0], at[1], at[2], whole.coords.index[i], 0, whole.icode[i]);
    }
    return s;
  };
  out.prefix = slice(0, first);
  out.cdr = slice(first, last + 1);
  out.suffix = slice(last + 1, res.size());
  out.provenance.cdr_first = task.cdr_first;
  out.provenance.cdr_last = task.cdr_last;

  if (task.mode == TaskMode::Conditional) {
    Segment antigen;
    int ordinal = 0;
    for (const std::string& id : task.antigen_chains) {
      if (id == task.antibody_chain) throw ConfigError("task '" + task.id + "': antigen chain equals antibody chain");
      const Chain* c = structure.find(id);
      if (c == nullptr) throw ConfigError("task '" + task.id + "': antigen chain " + id + " not found");
      for (const Residue& r : c->residues)
        antigen.push_back(r.letter, r.atoms[0], r.atoms[1], r.atoms[2], r.res_seq, ordinal, r.icode);
      out.provenance.antigen_chains.push_back(id);
      ++ordinal;
    }
    out.antigen = task.epitope_cutoff ? graph::epitope(antigen, out.prefix, out.suffix, *task.epitope_cutoff) : antigen;
  }
  return out;
}

}  // namespace abode::io
