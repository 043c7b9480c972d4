// Generates one instance, builds its canonical system, and reads a basis of
// the Selmer group off the system.
//
//   basis_demo [p] [m] [seed]

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <string>

#include "selmer_lab/selmer_lab.hpp"

using namespace selmer_lab;

namespace {

std::string format_vector(const FpVector& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + std::to_string(v[i]);
  return s + ")";
}

std::string format_product(const SelmerInstance& inst, SquarefreeProduct l) {
  if (l.empty()) return "1";
  std::string s;
  for (const auto& label : inst.product_labels(l)) s += (s.empty() ? "" : "*") + label;
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  const auto p = argc > 1 ? static_cast<std::uint32_t>(std::strtoul(argv[1], nullptr, 10)) : 5u;
  const auto m = argc > 2 ? static_cast<std::size_t>(std::strtoul(argv[2], nullptr, 10)) : std::size_t{6};
  const auto seed = argc > 3 ? std::strtoull(argv[3], nullptr, 10) : 8ull;

  try {
    const auto inst = generate_instance(p, m, EpsilonMode::Match, seed);
    const auto sel = selmer_group(inst, {});
    std::cout << "p = " << p << ", m = " << m << ", seed = " << seed << ", epsilon = " << inst.epsilon() << "\n";
    std::cout << "dim Sel = " << sel.dim() << "\n";

    const auto z = canonical_system(inst, m, seed);
    std::cout << "canonical system: " << z.plus().size() << " plus and " << z.minus().size()
              << " minus nonzero values; reciprocity " << (satisfies_reciprocity(inst, z) ? "holds" : "FAILS")
              << "\n";

    if (z.trivial()) {
      std::cout << "system is zero on this instance, nothing to extract\n";
      return 0;
    }
    const auto b = basis_extract(inst, z);
    std::cout << "auxiliary product l = " << format_product(inst, b.product) << "\n";
    for (std::size_t i = 0; i < b.classes.size(); ++i) {
      std::cout << "  z_{l/" << inst.labels()[b.primes[i]] << "} = " << format_vector(b.classes[i]) << "\n";
    }
    std::cout << "localization matrix:\n";
    for (const auto& row : b.loc_matrix) {
      std::cout << "  ";
      for (auto x : row) std::cout << x << " ";
      std::cout << "\n";
    }
    const auto span = FpSubspace::span(inst.field(), inst.space().ambient_dim(), b.classes);
    std::cout << "classes span Sel: " << (span == sel ? "yes" : "no") << "\n";
    return span == sel ? 0 : 1;
  } catch (const Error& e) {
    std::cerr << "basis_demo: " << e.what() << "\n";
    return 1;
  }
}
