#include "abode/complex.hpp"

#include "abode/error.hpp"

namespace abode {

void Segment::push_back(char letter, const geometry::Vec3& n, const geometry::Vec3& ca, const geometry::Vec3& c,
                        int res_seq, int chain_ordinal, char insertion) {
  sequence.push_back(letter);
  coords.push_back(n, ca, c, res_seq);
  chain.push_back(chain_ordinal);
  icode.push_back(insertion);
}

void Segment::check() const {
  const std::size_t n = sequence.size();
  if (coords.atoms.size() != n || coords.index.size() != n || chain.size() != n || icode.size() != n) {
    throw GraphError("segment fields have inconsistent lengths");
  }
}

const char* mode_name(TaskMode mode) {
  switch (mode) {
    case TaskMode::Unconditional: return "unconditional";
    case TaskMode::Conditional: return "conditional";
    case TaskMode::FixedBackbone: return "fixed_backbone";
  }
  return "unknown";
}

TaskMode parse_mode(const std::string& name) {
  if (name == "unconditional") return TaskMode::Unconditional;
  if (name == "conditional") return TaskMode::Conditional;
  if (name == "fixed_backbone") return TaskMode::FixedBackbone;
  throw ConfigError("unknown mode '" + name + "' (expected unconditional, conditional or fixed_backbone)");
}

}  // namespace abode
