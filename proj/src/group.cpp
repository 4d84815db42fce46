#include "symrfm/group.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <set>
#include <stdexcept>

namespace symrfm {

namespace {

int checked_product(const std::vector<int>& moduli) {
  long long order = 1;
  for (int n : moduli) {
    if (n < 2) throw std::invalid_argument("group factor must be >= 2");
    order *= n;
    if (order > (1 << 20)) throw std::invalid_argument("group order too large");
  }
  return static_cast<int>(order);
}

bool is_prime(int p) {
  if (p < 2) return false;
  for (int q = 2; q * q <= p; ++q)
    if (p % q == 0) return false;
  return true;
}

// Extended Euclid; value inverse mod p for the multiplicative flavour.
int mod_inverse(int value, int p) {
  int t = 0, new_t = 1, r = p, new_r = value % p;
  while (new_r != 0) {
    int q = r / new_r;
    t = std::exchange(new_t, t - q * new_t);
    r = std::exchange(new_r, r - q * new_r);
  }
  if (r != 1) throw std::invalid_argument("element not invertible");
  return t < 0 ? t + p : t;
}

int parse_int(std::string_view text) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw std::invalid_argument("bad integer: '" + std::string(text) + "'");
  return value;
}

std::string_view strip(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  return s;
}

}  // namespace

GroupSpec GroupSpec::cyclic(int n) { return product({n}); }

GroupSpec GroupSpec::product(std::vector<int> moduli) {
  if (moduli.empty()) throw std::invalid_argument("group needs at least one factor");
  GroupSpec spec;
  spec.kind_ = Kind::additive;
  spec.order_ = checked_product(moduli);
  spec.moduli_ = std::move(moduli);
  return spec;
}

GroupSpec GroupSpec::multiplicative(int prime) {
  if (!is_prime(prime) || prime < 3)
    throw std::invalid_argument("multiplicative group needs an odd prime modulus");
  GroupSpec spec;
  spec.kind_ = Kind::multiplicative;
  spec.prime_ = prime;
  spec.order_ = prime - 1;
  spec.moduli_ = {prime - 1};
  return spec;
}

int GroupSpec::multiplicative_prime() const {
  if (kind_ != Kind::multiplicative)
    throw std::invalid_argument("not a multiplicative group");
  return prime_;
}

bool GroupSpec::contains(const GroupElement& a) const {
  if (a.residues.size() != moduli_.size()) return false;
  for (size_t i = 0; i < moduli_.size(); ++i)
    if (a.residues[i] < 0 || a.residues[i] >= moduli_[i]) return false;
  return true;
}

void GroupSpec::require(const GroupElement& a) const {
  if (a.residues.size() != moduli_.size())
    throw std::invalid_argument("element arity does not match group factors");
  if (!contains(a))
    throw std::invalid_argument("element residue out of range");
}

int GroupSpec::index_of(const GroupElement& a) const {
  require(a);
  int index = 0;
  for (size_t i = 0; i < moduli_.size(); ++i) index = index * moduli_[i] + a.residues[i];
  return index;
}

GroupElement GroupSpec::element_at(int index) const {
  if (index < 0 || index >= order_) throw std::invalid_argument("element index out of range");
  GroupElement a;
  a.residues.resize(moduli_.size());
  for (size_t i = moduli_.size(); i-- > 0;) {
    a.residues[i] = index % moduli_[i];
    index /= moduli_[i];
  }
  return a;
}

GroupElement GroupSpec::identity() const {
  GroupElement e;
  e.residues.assign(moduli_.size(), 0);
  return e;
}

GroupElement GroupSpec::op(const GroupElement& a, const GroupElement& b) const {
  require(a);
  require(b);
  GroupElement c;
  if (kind_ == Kind::multiplicative) {
    long long value = (static_cast<long long>(a.residues[0] + 1) * (b.residues[0] + 1)) % prime_;
    c.residues = {static_cast<int>(value) - 1};
    return c;
  }
  c.residues.resize(moduli_.size());
  for (size_t i = 0; i < moduli_.size(); ++i)
    c.residues[i] = (a.residues[i] + b.residues[i]) % moduli_[i];
  return c;
}

GroupElement GroupSpec::inverse(const GroupElement& a) const {
  require(a);
  GroupElement c;
  if (kind_ == Kind::multiplicative) {
    c.residues = {mod_inverse(a.residues[0] + 1, prime_) - 1};
    return c;
  }
  c.residues.resize(moduli_.size());
  for (size_t i = 0; i < moduli_.size(); ++i)
    c.residues[i] = (moduli_[i] - a.residues[i]) % moduli_[i];
  return c;
}

std::string GroupSpec::format(const GroupElement& a) const {
  require(a);
  auto shown = [&](int i) {
    return kind_ == Kind::multiplicative ? a.residues[i] + 1 : a.residues[i];
  };
  if (moduli_.size() == 1) return std::to_string(shown(0));
  std::string out = "(";
  for (size_t i = 0; i < moduli_.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(shown(static_cast<int>(i)));
  }
  out += ')';
  return out;
}

GroupElement GroupSpec::parse_element(std::string_view text) const {
  text = strip(text);
  std::vector<int> values;
  if (!text.empty() && text.front() == '(') {
    if (text.back() != ')') throw std::invalid_argument("unbalanced element tuple");
    text.remove_prefix(1);
    text.remove_suffix(1);
    while (true) {
      size_t comma = text.find(',');
      values.push_back(parse_int(strip(text.substr(0, comma))));
      if (comma == std::string_view::npos) break;
      text.remove_prefix(comma + 1);
    }
  } else {
    values.push_back(parse_int(text));
  }
  if (values.size() != moduli_.size())
    throw std::invalid_argument("element arity does not match group factors");
  GroupElement a;
  a.residues.resize(values.size());
  for (size_t i = 0; i < values.size(); ++i)
    a.residues[i] = kind_ == Kind::multiplicative ? values[i] - 1 : values[i];
  require(a);
  return a;
}

DihedralElement rotation(GroupElement x, ActionVariant variant) {
  return {false, std::move(x), variant};
}

DihedralElement reflection(GroupElement x, ActionVariant variant) {
  return {true, std::move(x), variant};
}

DihedralElement dihedral_identity(const GroupSpec& spec, ActionVariant variant) {
  return rotation(spec.identity(), variant);
}

PairIndex pair_index(const GroupSpec& spec, const Pair& p) {
  return static_cast<PairIndex>(spec.index_of(p.first) * spec.order() + spec.index_of(p.second));
}

Pair pair_at(const GroupSpec& spec, PairIndex index) {
  const int n = spec.order();
  if (index < 0 || index >= static_cast<PairIndex>(n) * n)
    throw std::invalid_argument("pair index out of range");
  return {spec.element_at(index / n), spec.element_at(index % n)};
}

Pair apply(const GroupSpec& spec, const DihedralElement& g, const Pair& p) {
  spec.require(g.shift);
  const auto& [a, b] = p;
  if (g.variant == ActionVariant::direct) {
    GroupElement ax = spec.op(a, g.shift);
    GroupElement bxinv = spec.op(b, spec.inverse(g.shift));
    if (!g.reflected) return {std::move(ax), std::move(bxinv)};
    return {std::move(bxinv), std::move(ax)};
  }
  GroupElement ax = spec.op(a, g.shift);
  GroupElement bx = spec.op(b, g.shift);
  if (!g.reflected) return {std::move(ax), std::move(bx)};
  return {spec.inverse(bx), spec.inverse(ax)};
}

PairIndex apply_to_index(const GroupSpec& spec, const DihedralElement& g, PairIndex index) {
  return pair_index(spec, apply(spec, g, pair_at(spec, index)));
}

DihedralElement compose(const GroupSpec& spec, const DihedralElement& g,
                        const DihedralElement& h) {
  if (g.variant != h.variant)
    throw std::invalid_argument("cannot compose elements of different action variants");
  // In both variants the (kind, shift) algebra is the same:
  //   r^x r^y = r^{x*y},  r^x (sr^y) = sr^{x^-1 * y},
  //   (sr^x) r^y = sr^{x*y},  (sr^x)(sr^y) = r^{x^-1 * y}.
  GroupElement shift = h.reflected ? spec.op(spec.inverse(g.shift), h.shift)
                                   : spec.op(g.shift, h.shift);
  return {g.reflected != h.reflected, std::move(shift), g.variant};
}

DihedralElement dihedral_inverse(const GroupSpec& spec, const DihedralElement& g) {
  if (g.reflected) return g;
  return rotation(spec.inverse(g.shift), g.variant);
}

std::string format(const GroupSpec& spec, const DihedralElement& g) {
  std::string out;
  bool is_identity_shift = g.shift == spec.identity();
  if (!g.reflected && is_identity_shift) {
    out = "id";
  } else if (g.reflected && is_identity_shift) {
    out = "s";
  } else {
    out = g.reflected ? "sr^" : "r^";
    out += spec.format(g.shift);
  }
  if (g.variant == ActionVariant::inverse) out += '~';
  return out;
}

DihedralElement parse_dihedral(const GroupSpec& spec, std::string_view text) {
  text = strip(text);
  ActionVariant variant = ActionVariant::direct;
  if (!text.empty() && text.back() == '~') {
    variant = ActionVariant::inverse;
    text.remove_suffix(1);
    text = strip(text);
  }
  if (text == "id" || text == "e") return dihedral_identity(spec, variant);
  if (text == "s") return reflection(spec.identity(), variant);
  bool reflected = false;
  if (text.starts_with("sr")) {
    reflected = true;
    text.remove_prefix(2);
  } else if (text.starts_with("r")) {
    text.remove_prefix(1);
  } else {
    throw std::invalid_argument("bad dihedral element: expected id, s, r^x or sr^x");
  }
  if (text.starts_with("^")) text.remove_prefix(1);
  return {reflected, spec.parse_element(text), variant};
}

std::vector<DihedralElement> all_rotations(const GroupSpec& spec, ActionVariant variant) {
  std::vector<DihedralElement> out;
  out.reserve(spec.order());
  for (int i = 0; i < spec.order(); ++i) out.push_back(rotation(spec.element_at(i), variant));
  return out;
}

std::vector<DihedralElement> all_reflections(const GroupSpec& spec, ActionVariant variant) {
  std::vector<DihedralElement> out;
  out.reserve(spec.order());
  for (int i = 0; i < spec.order(); ++i) out.push_back(reflection(spec.element_at(i), variant));
  return out;
}

std::vector<PairIndex> fixed_points(const GroupSpec& spec, const DihedralElement& g) {
  const int n = spec.order();
  std::vector<PairIndex> fixed;
  for (PairIndex idx = 0; idx < static_cast<PairIndex>(n) * n; ++idx)
    if (apply_to_index(spec, g, idx) == idx) fixed.push_back(idx);
  return fixed;
}

std::vector<PairIndex> fixed_points_closed(const GroupSpec& spec, const DihedralElement& g) {
  if (!g.reflected)
    throw std::invalid_argument("closed-form fixed points are defined for reflections");
  std::vector<PairIndex> fixed;
  fixed.reserve(spec.order());
  for (int i = 0; i < spec.order(); ++i) {
    GroupElement a = spec.element_at(i);
    GroupElement b = spec.op(a, g.shift);
    if (g.variant == ActionVariant::inverse) b = spec.inverse(b);
    fixed.push_back(pair_index(spec, {std::move(a), std::move(b)}));
  }
  std::sort(fixed.begin(), fixed.end());
  return fixed;
}

GroupElement fixing_reflection(const GroupSpec& spec, const Pair& p) {
  return spec.op(spec.inverse(p.first), p.second);
}

std::vector<DihedralElement> Subgroup::reflections() const {
  std::vector<DihedralElement> out;
  for (const auto& g : elements)
    if (g.reflected) out.push_back(g);
  return out;
}

bool Subgroup::contains(const DihedralElement& g) const {
  return std::find(elements.begin(), elements.end(), g) != elements.end();
}

Subgroup enumerate_subgroup(const GroupSpec& spec, const SubgroupSpec& presentation) {
  using Kind = SubgroupSpec::Kind;
  Subgroup sub;
  sub.presentation = presentation;
  const ActionVariant variant = presentation.variant;

  auto require_single_cyclic = [&] {
    if (spec.factor_count() != 1 || spec.kind() != GroupSpec::Kind::additive)
      throw std::invalid_argument("cyclic/dihedral presentations need a single cyclic factor");
    const int n = spec.order();
    if (presentation.d <= 0 || n % presentation.d != 0)
      throw std::invalid_argument("subgroup step must divide the group order");
  };

  switch (presentation.kind) {
    case Kind::trivial:
      sub.elements = {dihedral_identity(spec, variant)};
      break;
    case Kind::full:
      sub.elements = all_rotations(spec, variant);
      for (auto& g : all_reflections(spec, variant)) sub.elements.push_back(std::move(g));
      break;
    case Kind::reflection:
      spec.require(presentation.axis);
      sub.elements = {dihedral_identity(spec, variant),
                      reflection(presentation.axis, variant)};
      break;
    case Kind::cyclic: {
      require_single_cyclic();
      for (int k = 0; k * presentation.d < spec.order(); ++k)
        sub.elements.push_back(rotation(GroupElement{{k * presentation.d}}, variant));
      break;
    }
    case Kind::dihedral: {
      require_single_cyclic();
      const int n = spec.order();
      if (presentation.m < 0 || presentation.m >= presentation.d)
        throw std::invalid_argument("reflection offset must lie in [0, d)");
      for (int k = 0; k * presentation.d < n; ++k)
        sub.elements.push_back(rotation(GroupElement{{k * presentation.d}}, variant));
      for (int k = 0; k * presentation.d < n; ++k)
        sub.elements.push_back(
            reflection(GroupElement{{(presentation.m + k * presentation.d) % n}}, variant));
      break;
    }
  }
  return sub;
}

std::string format(const GroupSpec& spec, const SubgroupSpec& presentation) {
  using Kind = SubgroupSpec::Kind;
  std::string out;
  switch (presentation.kind) {
    case Kind::trivial: out = "trivial"; break;
    case Kind::full: out = "full"; break;
    case Kind::cyclic: out = "cyclic:" + std::to_string(presentation.d); break;
    case Kind::dihedral:
      out = "dihedral:" + std::to_string(presentation.d) + "," + std::to_string(presentation.m);
      break;
    case Kind::reflection: out = "refl:" + spec.format(presentation.axis); break;
  }
  if (presentation.variant == ActionVariant::inverse) out += '~';
  return out;
}

SubgroupSpec parse_subgroup(const GroupSpec& spec, std::string_view text) {
  using Kind = SubgroupSpec::Kind;
  text = strip(text);
  SubgroupSpec out;
  if (!text.empty() && text.back() == '~') {
    out.variant = ActionVariant::inverse;
    text.remove_suffix(1);
    text = strip(text);
  }
  if (text == "trivial") {
    out.kind = Kind::trivial;
  } else if (text == "full") {
    out.kind = Kind::full;
  } else if (text.starts_with("cyclic:")) {
    out.kind = Kind::cyclic;
    out.d = parse_int(strip(text.substr(7)));
  } else if (text.starts_with("dihedral:")) {
    out.kind = Kind::dihedral;
    auto rest = text.substr(9);
    size_t comma = rest.find(',');
    if (comma == std::string_view::npos)
      throw std::invalid_argument("dihedral presentation needs 'dihedral:d,m'");
    out.d = parse_int(strip(rest.substr(0, comma)));
    out.m = parse_int(strip(rest.substr(comma + 1)));
  } else if (text.starts_with("refl:")) {
    out.kind = Kind::reflection;
    out.axis = spec.parse_element(strip(text.substr(5)));
  } else {
    throw std::invalid_argument("bad subgroup: expected trivial, full, cyclic:d, dihedral:d,m or refl:x");
  }
  return out;
}

std::vector<PairIndex> orbit(const GroupSpec& spec, const Subgroup& H,
                             std::span<const PairIndex> seed) {
  std::set<PairIndex> out;
  for (PairIndex idx : seed) {
    Pair p = pair_at(spec, idx);
    for (const auto& h : H.elements) out.insert(pair_index(spec, apply(spec, h, p)));
  }
  return {out.begin(), out.end()};
}

std::vector<PairIndex> symmetry_class(const GroupSpec& spec, const GroupElement& label) {
  spec.require(label);
  std::vector<PairIndex> out;
  out.reserve(spec.order());
  // (a, a^-1 * l) enumerates the class O_l once per group element.
  for (int i = 0; i < spec.order(); ++i) {
    GroupElement a = spec.element_at(i);
    GroupElement b = spec.op(spec.inverse(a), label);
    out.push_back(pair_index(spec, {std::move(a), std::move(b)}));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace symrfm
