#include "milattn/problem.hpp"

#include <string>

#include "milattn/error.hpp"

namespace milattn {

std::string_view to_string(ProblemKind p) noexcept {
  switch (p) {
    case ProblemKind::MIL:
      return "MIL";
    case ProblemKind::AND:
      return "AND";
    case ProblemKind::XOR:
      return "XOR";
  }
  return "?";
}

ProblemKind parse_problem(std::string_view s) {
  if (s == "MIL" || s == "mil") return ProblemKind::MIL;
  if (s == "AND" || s == "and") return ProblemKind::AND;
  if (s == "XOR" || s == "xor") return ProblemKind::XOR;
  throw ConfigError("unknown problem kind '" + std::string(s) + "'");
}

std::string to_string(PresenceSet s) {
  std::string out = "{";
  for (int p = 0; p < 3; ++p) {
    if (!s.contains(p)) continue;
    if (out.size() > 1) out += ",";
    out += std::to_string(p);
  }
  return out + "}";
}

PresenceSet presence_of(std::span<const int> instance_labels) {
  PresenceSet s;
  for (int y : instance_labels) {
    if (y < 0 || y > 2) throw DataError("instance label " + std::to_string(y) + " not in {0,1,2}");
    s.insert(y);
  }
  return s;
}

int bag_label_of(PresenceSet present, ProblemKind problem) {
  const bool has1 = present.contains(1);
  const bool has2 = present.contains(2);
  switch (problem) {
    case ProblemKind::MIL:
      if (has2) throw DataError("label 2 is not defined for MIL bags");
      return has1 ? 1 : 0;
    case ProblemKind::AND:
      return (has1 && has2) ? 1 : 0;
    case ProblemKind::XOR:
      return (has1 != has2) ? 1 : 0;
  }
  return 0;
}

int bag_label_of(std::span<const int> instance_labels, ProblemKind problem) {
  return bag_label_of(presence_of(instance_labels), problem);
}

bool is_key_population(int population, ProblemKind problem) noexcept {
  if (problem == ProblemKind::MIL) return population == 1;
  return population == 1 || population == 2;
}

}  // namespace milattn
