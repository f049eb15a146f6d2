#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace milattn {

enum class ProblemKind { MIL, AND, XOR };

std::string_view to_string(ProblemKind p) noexcept;
ProblemKind parse_problem(std::string_view s);

/// Set of populations {0, 1, 2} present in a bag, as a 3-bit mask.
class PresenceSet {
 public:
  constexpr PresenceSet() = default;
  constexpr PresenceSet(std::initializer_list<int> pops) {
    for (int p : pops) insert(p);
  }

  constexpr void insert(int pop) { bits_ |= static_cast<std::uint8_t>(1u << pop); }
  constexpr bool contains(int pop) const { return (bits_ >> pop) & 1u; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::uint8_t bits() const { return bits_; }

  friend constexpr bool operator==(PresenceSet, PresenceSet) = default;

 private:
  std::uint8_t bits_ = 0;
};

std::string to_string(PresenceSet s);

PresenceSet presence_of(std::span<const int> instance_labels);

// MIL: min(1, #{y = 1}). AND: both 1 and 2 present. XOR: exactly one of them.
// Throws DataError for labels outside {0,1,2}, or a label 2 under MIL.
int bag_label_of(std::span<const int> instance_labels, ProblemKind problem);
int bag_label_of(PresenceSet present, ProblemKind problem);

// Populations whose instances count as key instances for the problem.
bool is_key_population(int population, ProblemKind problem) noexcept;

}  // namespace milattn
