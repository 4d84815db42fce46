#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace symrfm {

/// An element of a finite Abelian group, stored as a residue tuple aligned
/// with the owning GroupSpec's factors.
struct GroupElement {
  std::vector<int> residues;

  friend bool operator==(const GroupElement&, const GroupElement&) = default;
  friend auto operator<=>(const GroupElement&, const GroupElement&) = default;
};

/// A finite Abelian group. Two flavours:
///   - additive: a direct product of cyclic factors Z_{n1} x ... x Z_{nk},
///     operation componentwise addition;
///   - multiplicative: the unit group Z_p^* of a prime p, order p-1.
///
/// The canonical index map element <-> {0..order-1} is mixed-radix with the
/// first factor most significant. For the multiplicative flavour, residues
/// hold the 0-based position of the value (value v <-> position v-1), so the
/// canonical index of value v is v-1; parse/format speak value space.
class GroupSpec {
 public:
  enum class Kind { additive, multiplicative };

  /// The trivial one-element group; a placeholder until assigned.
  GroupSpec() = default;

  static GroupSpec cyclic(int n);
  static GroupSpec product(std::vector<int> moduli);
  static GroupSpec multiplicative(int prime);

  Kind kind() const { return kind_; }
  int order() const { return order_; }
  int factor_count() const { return static_cast<int>(moduli_.size()); }
  const std::vector<int>& moduli() const { return moduli_; }
  /// Prime p such that this group is Z_p^*; throws for additive groups.
  int multiplicative_prime() const;

  bool contains(const GroupElement& a) const;
  /// Throws std::invalid_argument on arity mismatch or out-of-range residues.
  void require(const GroupElement& a) const;

  int index_of(const GroupElement& a) const;
  GroupElement element_at(int index) const;
  GroupElement identity() const;

  GroupElement op(const GroupElement& a, const GroupElement& b) const;
  GroupElement inverse(const GroupElement& a) const;

  /// "(3,2)" for product groups, "3" for a single factor. Multiplicative
  /// groups print the value (1..p-1), matching the task's element labels.
  std::string format(const GroupElement& a) const;
  GroupElement parse_element(std::string_view text) const;

  friend bool operator==(const GroupSpec&, const GroupSpec&) = default;

 private:
  Kind kind_ = Kind::additive;
  std::vector<int> moduli_;
  int prime_ = 0;
  int order_ = 1;
};

/// Which binary function the symmetry group preserves: the group operation
/// f(a,b) = a*b (direct) or the right-inverse operation f(a,b) = a*b^-1.
enum class ActionVariant : std::uint8_t { direct, inverse };

/// An element of the generalized dihedral symmetry group: a rotation r^x or
/// a reflection s r^x, indexed by a group element x, in one of the two
/// action variants.
struct DihedralElement {
  bool reflected = false;
  GroupElement shift;
  ActionVariant variant = ActionVariant::direct;

  friend bool operator==(const DihedralElement&, const DihedralElement&) = default;
};

DihedralElement rotation(GroupElement x, ActionVariant variant = ActionVariant::direct);
DihedralElement reflection(GroupElement x, ActionVariant variant = ActionVariant::direct);
DihedralElement dihedral_identity(const GroupSpec& spec,
                                  ActionVariant variant = ActionVariant::direct);

using Pair = std::pair<GroupElement, GroupElement>;

/// Canonical row index of a pair: index_of(a) * order + index_of(b).
using PairIndex = std::int32_t;

PairIndex pair_index(const GroupSpec& spec, const Pair& p);
Pair pair_at(const GroupSpec& spec, PairIndex index);

/// Action on ordered pairs.
///   direct:  r^x (a,b) = (a*x, b*x^-1),   s r^x (a,b) = (b*x^-1, a*x)
///   inverse: r^x (a,b) = (a*x, b*x),      s r^x (a,b) = ((b*x)^-1, (a*x)^-1)
Pair apply(const GroupSpec& spec, const DihedralElement& g, const Pair& p);
PairIndex apply_to_index(const GroupSpec& spec, const DihedralElement& g, PairIndex index);

/// Group multiplication in Dih(A); compose(g,h) acts as g after h.
/// Throws on variant mismatch.
DihedralElement compose(const GroupSpec& spec, const DihedralElement& g,
                        const DihedralElement& h);
DihedralElement dihedral_inverse(const GroupSpec& spec, const DihedralElement& g);

/// "r^x", "s", "sr^x"; identity rotation prints "id"; inverse-variant
/// elements carry a trailing "~".
std::string format(const GroupSpec& spec, const DihedralElement& g);
DihedralElement parse_dihedral(const GroupSpec& spec, std::string_view text);

std::vector<DihedralElement> all_rotations(const GroupSpec& spec,
                                           ActionVariant variant = ActionVariant::direct);
std::vector<DihedralElement> all_reflections(const GroupSpec& spec,
                                             ActionVariant variant = ActionVariant::direct);

/// Fixed points of g over all |A|^2 pairs, by definition (apply(g,p) == p).
/// Sorted pair indices. Defined for rotations too (empty unless identity,
/// for the direct action on odd-order groups).
std::vector<PairIndex> fixed_points(const GroupSpec& spec, const DihedralElement& g);

/// Closed form for reflections: direct {(a, a*x)}, inverse {(a, (a*x)^-1)}.
/// Throws if g is a rotation.
std::vector<PairIndex> fixed_points_closed(const GroupSpec& spec, const DihedralElement& g);

/// The unique x with s r^x fixing p under the direct action: x = a^-1 * b.
GroupElement fixing_reflection(const GroupSpec& spec, const Pair& p);

/// Presentation of a subgroup of Dih(A). cyclic(d) = <r^d> and
/// dihedral(d,m) = <r^d, s r^m> require a single-factor additive group;
/// reflection(x), trivial and full work for every spec.
struct SubgroupSpec {
  enum class Kind { trivial, full, cyclic, dihedral, reflection };

  Kind kind = Kind::trivial;
  int d = 1;
  int m = 0;
  GroupElement axis;
  ActionVariant variant = ActionVariant::direct;
};

struct Subgroup {
  SubgroupSpec presentation;
  std::vector<DihedralElement> elements;

  std::vector<DihedralElement> reflections() const;
  bool contains(const DihedralElement& g) const;
};

/// Explicit element list for a presentation; validates closure conditions
/// (d must divide the cyclic order). Throws std::invalid_argument otherwise.
Subgroup enumerate_subgroup(const GroupSpec& spec, const SubgroupSpec& presentation);

std::string format(const GroupSpec& spec, const SubgroupSpec& presentation);
SubgroupSpec parse_subgroup(const GroupSpec& spec, std::string_view text);

/// Orbit of a pair set under H: {apply(h,x) : h in H, x in X}, sorted.
std::vector<PairIndex> orbit(const GroupSpec& spec, const Subgroup& H,
                             std::span<const PairIndex> seed);

/// All pairs (a,b) with a*b = label; one symmetry class O_l of the direct
/// action. Sorted pair indices; size |A|.
std::vector<PairIndex> symmetry_class(const GroupSpec& spec, const GroupElement& label);

}  // namespace symrfm
