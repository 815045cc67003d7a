// Copyright 2026 The chembridge Authors
// SPDX-License-Identifier: Apache-2.0

#include "chembridge/smiles.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>

namespace chembridge::smiles {

namespace {

const std::array<const char*, 118> kElements = {
    "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne", "Na", "Mg",
    "Al", "Si", "P",  "S",  "Cl", "Ar", "K",  "Ca", "Sc", "Ti", "V",  "Cr",
    "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As", "Se", "Br", "Kr",
    "Rb", "Sr", "Y",  "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd",
    "In", "Sn", "Sb", "Te", "I",  "Xe", "Cs", "Ba", "La", "Ce", "Pr", "Nd",
    "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf",
    "Ta", "W",  "Re", "Os", "Ir", "Pt", "Au", "Hg", "Tl", "Pb", "Bi", "Po",
    "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa", "U",  "Np", "Pu", "Am", "Cm",
    "Bk", "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db", "Sg", "Bh", "Hs",
    "Mt", "Ds", "Rg", "Cn", "Nh", "Fl", "Mc", "Lv", "Ts", "Og"};

const std::unordered_map<std::string_view, int>& symbol_table() {
  static const auto* table = [] {
    auto* m = new std::unordered_map<std::string_view, int>();
    for (size_t i = 0; i < kElements.size(); ++i) {
      m->emplace(kElements[i], static_cast<int>(i) + 1);
    }
    return m;
  }();
  return *table;
}

constexpr int kBoron = 5, kCarbon = 6, kNitrogen = 7, kOxygen = 8;
constexpr int kFluorine = 9, kPhosphorus = 15, kSulfur = 16, kChlorine = 17;
constexpr int kBromine = 35, kIodine = 53;

// Lowercase symbols accepted as aromatic atoms.
int aromatic_element(std::string_view sym) {
  if (sym == "b") return kBoron;
  if (sym == "c") return kCarbon;
  if (sym == "n") return kNitrogen;
  if (sym == "o") return kOxygen;
  if (sym == "p") return kPhosphorus;
  if (sym == "s") return kSulfur;
  if (sym == "se") return 34;
  if (sym == "as") return 33;
  if (sym == "te") return 52;
  return 0;
}

struct Parser {
  std::string_view text;
  size_t i = 0;
  MoleculeGraph g;
  int prev = -1;                       // last atom of the current chain
  int pending = 0;                     // pending bond symbol (bond_code), 0 = none
  std::vector<std::pair<int, size_t>> branch_stack;
  struct OpenRing {
    int atom;
    int order;  // 0 = unspecified
    size_t offset;
  };
  std::map<int, OpenRing> open_rings;
  std::set<std::pair<int, int>> bond_pairs;

  [[noreturn]] void fail(const std::string& msg, size_t at) const {
    throw SmilesError(msg, at);
  }

  char peek() const { return i < text.size() ? text[i] : '\0'; }

  void add_bond(int a, int b, BondOrder order, size_t at) {
    if (a == b) fail("ring closure bonds an atom to itself", at);
    auto key = std::minmax(a, b);
    if (!bond_pairs.insert({key.first, key.second}).second) {
      fail("duplicate bond between the same atom pair", at);
    }
    g.bonds.push_back({a, b, order, false});
  }

  BondOrder resolve_order(int code, int a, int b) const {
    if (code != 0) return static_cast<BondOrder>(code);
    if (g.atoms[a].aromatic && g.atoms[b].aromatic) return BondOrder::Aromatic;
    return BondOrder::Single;
  }

  void on_atom(Atom atom, size_t at) {
    g.atoms.push_back(atom);
    int idx = g.atom_count() - 1;
    if (prev >= 0) {
      add_bond(prev, idx, resolve_order(pending, prev, idx), at);
    } else if (pending != 0) {
      fail("bond symbol with no preceding atom", at);
    }
    pending = 0;
    prev = idx;
  }

  void on_ring_digit(int digit, size_t at) {
    if (prev < 0) fail("ring closure with no preceding atom", at);
    auto it = open_rings.find(digit);
    if (it == open_rings.end()) {
      open_rings[digit] = {prev, pending, at};
      pending = 0;
      return;
    }
    OpenRing open = it->second;
    open_rings.erase(it);
    int code = 0;
    if (open.order != 0 && pending != 0 && open.order != pending) {
      fail("conflicting bond orders on ring closure " + std::to_string(digit), at);
    }
    code = open.order != 0 ? open.order : pending;
    pending = 0;
    add_bond(open.atom, prev, resolve_order(code, open.atom, prev), at);
  }

  int read_digits(int max_digits) {
    int v = 0;
    int count = 0;
    while (count < max_digits && std::isdigit(static_cast<unsigned char>(peek()))) {
      v = v * 10 + (text[i] - '0');
      ++i;
      ++count;
    }
    return count == 0 ? -1 : v;
  }

  Atom parse_bracket(size_t start) {
    ++i;  // consume '['
    Atom atom;
    atom.bracket = true;

    int isotope = read_digits(3);
    if (isotope >= 0) atom.isotope = isotope;

    // Element symbol: uppercase (greedy two-letter) or lowercase aromatic.
    char c = peek();
    if (std::isupper(static_cast<unsigned char>(c))) {
      std::string_view two = text.substr(i, 2);
      if (two.size() == 2 && std::islower(static_cast<unsigned char>(two[1]))) {
        auto it = symbol_table().find(two);
        if (it != symbol_table().end()) {
          atom.element = it->second;
          i += 2;
        }
      }
      if (atom.element == 0) {
        auto it = symbol_table().find(text.substr(i, 1));
        if (it == symbol_table().end()) fail("unknown element symbol", i);
        atom.element = it->second;
        ++i;
      }
    } else if (std::islower(static_cast<unsigned char>(c))) {
      int z = aromatic_element(text.substr(i, 2));
      if (z != 0) {
        i += 2;
      } else {
        z = aromatic_element(text.substr(i, 1));
        if (z == 0) fail("unknown aromatic element symbol", i);
        ++i;
      }
      atom.element = z;
      atom.aromatic = true;
    } else {
      fail("expected element symbol in bracket atom", i);
    }

    // Chirality: accepted and ignored.
    if (peek() == '@') {
      ++i;
      if (peek() == '@') ++i;
      static const std::array<std::string_view, 5> kClasses = {"TH", "AL", "SP",
                                                               "TB", "OH"};
      for (auto cls : kClasses) {
        if (text.substr(i, 2) == cls &&
            std::isdigit(static_cast<unsigned char>(i + 2 < text.size() ? text[i + 2] : '\0'))) {
          i += 2;
          read_digits(2);
          break;
        }
      }
    }

    if (peek() == 'H') {
      ++i;
      int h = read_digits(2);
      atom.explicit_h = h >= 0 ? h : 1;
    }

    if (peek() == '+' || peek() == '-') {
      int sign = peek() == '+' ? 1 : -1;
      char sym = peek();
      ++i;
      int magnitude = read_digits(2);
      if (magnitude < 0) {
        magnitude = 1;
        while (peek() == sym) {
          ++magnitude;
          ++i;
        }
      }
      if (peek() == '+' || peek() == '-') fail("bad charge syntax", i);
      if (magnitude > 15) fail("bad charge syntax: magnitude too large", start);
      atom.charge = sign * magnitude;
    }

    if (peek() == ':') {
      ++i;
      if (read_digits(4) < 0) fail("bad atom class", i);
    }

    if (peek() != ']') fail("expected ']' in bracket atom", i);
    ++i;
    return atom;
  }

  void run() {
    while (i < text.size()) {
      size_t at = i;
      char c = text[i];
      if (std::isupper(static_cast<unsigned char>(c))) {
        Atom atom;
        std::string_view two = text.substr(i, 2);
        if (two == "Cl") {
          atom.element = kChlorine;
          i += 2;
        } else if (two == "Br") {
          atom.element = kBromine;
          i += 2;
        } else {
          switch (c) {
            case 'B': atom.element = kBoron; break;
            case 'C': atom.element = kCarbon; break;
            case 'N': atom.element = kNitrogen; break;
            case 'O': atom.element = kOxygen; break;
            case 'P': atom.element = kPhosphorus; break;
            case 'S': atom.element = kSulfur; break;
            case 'F': atom.element = kFluorine; break;
            case 'I': atom.element = kIodine; break;
            default: fail("unknown element symbol outside brackets", at);
          }
          ++i;
        }
        on_atom(atom, at);
      } else if (std::islower(static_cast<unsigned char>(c))) {
        int z = aromatic_element(text.substr(i, 1));
        if (z == 0) fail("unknown aromatic atom outside brackets", at);
        Atom atom;
        atom.element = z;
        atom.aromatic = true;
        ++i;
        on_atom(atom, at);
      } else if (c == '[') {
        Atom atom = parse_bracket(at);
        on_atom(atom, at);
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        ++i;
        on_ring_digit(c - '0', at);
      } else if (c == '%') {
        ++i;
        if (!(std::isdigit(static_cast<unsigned char>(peek())))) {
          fail("expected two digits after '%'", at);
        }
        int hi = text[i] - '0';
        ++i;
        if (!(std::isdigit(static_cast<unsigned char>(peek())))) {
          fail("expected two digits after '%'", at);
        }
        int lo = text[i] - '0';
        ++i;
        on_ring_digit(hi * 10 + lo, at);
      } else if (c == '(') {
        if (prev < 0) fail("branch with no preceding atom", at);
        branch_stack.emplace_back(prev, at);
        ++i;
      } else if (c == ')') {
        if (branch_stack.empty()) fail("unbalanced ')'", at);
        if (pending != 0) fail("dangling bond symbol before ')'", at);
        prev = branch_stack.back().first;
        branch_stack.pop_back();
        ++i;
      } else if (c == '-' || c == '=' || c == '#' || c == ':' || c == '/' || c == '\\') {
        if (pending != 0) fail("duplicate bond symbol", at);
        switch (c) {
          case '=': pending = bond_code(BondOrder::Double); break;
          case '#': pending = bond_code(BondOrder::Triple); break;
          case ':': pending = bond_code(BondOrder::Aromatic); break;
          default: pending = bond_code(BondOrder::Single); break;  // '-' and the stereo slashes
        }
        ++i;
      } else if (c == '.') {
        if (pending != 0) fail("bond symbol before '.'", at);
        prev = -1;
        ++i;
      } else {
        fail(std::string("unexpected character '") + c + "'", at);
      }
    }

    if (!branch_stack.empty()) {
      fail("unbalanced '('", branch_stack.back().second);
    }
    if (!open_rings.empty()) {
      const auto& open = open_rings.begin()->second;
      fail("unmatched ring closure " + std::to_string(open_rings.begin()->first),
           open.offset);
    }
    if (pending != 0) fail("dangling bond symbol at end of input", text.size());
    if (g.atoms.empty()) fail("no atoms", 0);
  }
};

double atom_bond_order_sum(const MoleculeGraph& g, int atom) {
  double sum = 0.0;
  for (const auto& nb : g.adjacency[static_cast<size_t>(atom)]) {
    sum += bond_valence(g.bonds[static_cast<size_t>(nb.bond)].order);
  }
  return sum;
}

// Fills adjacency, degrees, implicit hydrogens and ring flags.
void finalize(MoleculeGraph& g) {
  g.rebuild_adjacency();
  for (int a = 0; a < g.atom_count(); ++a) {
    auto& atom = g.atoms[static_cast<size_t>(a)];
    atom.implicit_h = implicit_hydrogens(atom, atom_bond_order_sum(g, a));
  }
  perceive_rings(g);
}

}  // namespace

void MoleculeGraph::rebuild_adjacency() {
  adjacency.assign(atoms.size(), {});
  for (size_t b = 0; b < bonds.size(); ++b) {
    const Bond& bond = bonds[b];
    adjacency[static_cast<size_t>(bond.a)].push_back({bond.b, static_cast<int>(b)});
    adjacency[static_cast<size_t>(bond.b)].push_back({bond.a, static_cast<int>(b)});
  }
  for (size_t a = 0; a < atoms.size(); ++a) {
    atoms[a].degree = static_cast<int>(adjacency[a].size());
  }
}

int element_number(std::string_view symbol) {
  auto it = symbol_table().find(symbol);
  return it == symbol_table().end() ? 0 : it->second;
}

const std::string& element_symbol(int atomic_number) {
  static const std::string unknown = "?";
  if (atomic_number < 1 || atomic_number > static_cast<int>(kElements.size())) {
    return unknown;
  }
  static const auto* symbols = [] {
    auto* v = new std::vector<std::string>();
    for (const char* s : kElements) v->emplace_back(s);
    return v;
  }();
  return (*symbols)[static_cast<size_t>(atomic_number - 1)];
}

int default_valence(int atomic_number) {
  switch (atomic_number) {
    case kBoron: return 3;
    case kCarbon: return 4;
    case kNitrogen: return 3;
    case kOxygen: return 2;
    case kFluorine: return 1;
    case kPhosphorus: return 3;
    case kSulfur: return 2;
    case kChlorine: return 1;
    case kBromine: return 1;
    case kIodine: return 1;
    default: return -1;
  }
}

int implicit_hydrogens(const Atom& atom, double bond_order_sum) {
  if (atom.bracket) return 0;
  int valence = default_valence(atom.element);
  if (valence < 0) return 0;
  int h = valence - static_cast<int>(std::floor(bond_order_sum));
  return h > 0 ? h : 0;
}

void perceive_rings(MoleculeGraph& g) {
  const int n = g.atom_count();
  for (auto& atom : g.atoms) atom.in_ring = false;
  for (auto& bond : g.bonds) bond.in_ring = true;

  // Iterative bridge detection; an edge is in a ring iff it is not a bridge.
  std::vector<int> disc(static_cast<size_t>(n), -1);
  std::vector<int> low(static_cast<size_t>(n), 0);
  struct Frame {
    int atom;
    int via_bond;  // bond used to enter `atom`, -1 for roots
    size_t next;   // next adjacency slot to explore
  };
  int timer = 0;
  std::vector<Frame> stack;
  for (int root = 0; root < n; ++root) {
    if (disc[static_cast<size_t>(root)] >= 0) continue;
    stack.push_back({root, -1, 0});
    disc[static_cast<size_t>(root)] = low[static_cast<size_t>(root)] = timer++;
    while (!stack.empty()) {
      Frame& f = stack.back();
      const auto& nbs = g.adjacency[static_cast<size_t>(f.atom)];
      if (f.next < nbs.size()) {
        Neighbor nb = nbs[f.next++];
        if (nb.bond == f.via_bond) continue;
        if (disc[static_cast<size_t>(nb.atom)] < 0) {
          disc[static_cast<size_t>(nb.atom)] = low[static_cast<size_t>(nb.atom)] = timer++;
          stack.push_back({nb.atom, nb.bond, 0});
        } else {
          low[static_cast<size_t>(f.atom)] =
              std::min(low[static_cast<size_t>(f.atom)], disc[static_cast<size_t>(nb.atom)]);
        }
      } else {
        int child = f.atom;
        int via = f.via_bond;
        stack.pop_back();
        if (!stack.empty()) {
          int parent = stack.back().atom;
          low[static_cast<size_t>(parent)] =
              std::min(low[static_cast<size_t>(parent)], low[static_cast<size_t>(child)]);
          if (low[static_cast<size_t>(child)] > disc[static_cast<size_t>(parent)]) {
            g.bonds[static_cast<size_t>(via)].in_ring = false;  // bridge
          }
        }
      }
    }
  }

  for (const auto& bond : g.bonds) {
    if (bond.in_ring) {
      g.atoms[static_cast<size_t>(bond.a)].in_ring = true;
      g.atoms[static_cast<size_t>(bond.b)].in_ring = true;
    }
  }
}

std::vector<std::vector<int>> connected_components(const MoleculeGraph& g) {
  std::vector<std::vector<int>> components;
  std::vector<bool> seen(g.atoms.size(), false);
  for (int start = 0; start < g.atom_count(); ++start) {
    if (seen[static_cast<size_t>(start)]) continue;
    std::vector<int> comp;
    std::vector<int> queue{start};
    seen[static_cast<size_t>(start)] = true;
    while (!queue.empty()) {
      int a = queue.back();
      queue.pop_back();
      comp.push_back(a);
      for (const auto& nb : g.adjacency[static_cast<size_t>(a)]) {
        if (!seen[static_cast<size_t>(nb.atom)]) {
          seen[static_cast<size_t>(nb.atom)] = true;
          queue.push_back(nb.atom);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    components.push_back(std::move(comp));
  }
  return components;
}

MoleculeGraph induced_subgraph(const MoleculeGraph& g, const std::vector<int>& atom_indices) {
  MoleculeGraph out;
  std::vector<int> remap(g.atoms.size(), -1);
  for (size_t k = 0; k < atom_indices.size(); ++k) {
    remap[static_cast<size_t>(atom_indices[k])] = static_cast<int>(k);
    out.atoms.push_back(g.atoms[static_cast<size_t>(atom_indices[k])]);
  }
  for (const auto& bond : g.bonds) {
    int a = remap[static_cast<size_t>(bond.a)];
    int b = remap[static_cast<size_t>(bond.b)];
    if (a >= 0 && b >= 0) out.bonds.push_back({a, b, bond.order, false});
  }
  finalize(out);
  return out;
}

MoleculeGraph parse_smiles(std::string_view text, SaltPolicy policy) {
  // Surrounding whitespace is tolerated; interior whitespace is not.
  size_t begin = text.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) throw SmilesError("empty SMILES", 0);
  size_t end = text.find_last_not_of(" \t\r\n");
  text = text.substr(begin, end - begin + 1);

  Parser parser;
  parser.text = text;
  parser.run();

  MoleculeGraph g = std::move(parser.g);
  g.rebuild_adjacency();

  auto components = connected_components(g);
  if (policy == SaltPolicy::KeepLargest && components.size() > 1) {
    auto element_multiset = [&](const std::vector<int>& comp) {
      std::vector<int> elems;
      elems.reserve(comp.size());
      for (int a : comp) elems.push_back(g.atoms[static_cast<size_t>(a)].element);
      std::sort(elems.begin(), elems.end());
      return elems;
    };
    size_t best = 0;
    std::vector<int> best_elems = element_multiset(components[0]);
    for (size_t c = 1; c < components.size(); ++c) {
      std::vector<int> elems = element_multiset(components[c]);
      if (components[c].size() > components[best].size() ||
          (components[c].size() == components[best].size() && elems < best_elems)) {
        best = c;
        best_elems = std::move(elems);
      }
    }
    return induced_subgraph(g, components[best]);
  }

  finalize(g);
  return g;
}

}  // namespace chembridge::smiles
