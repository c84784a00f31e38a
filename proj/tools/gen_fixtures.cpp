// Regenerates the bundled synthetic fixture family.
//   gen_fixtures [OUT_DIR] [DEADLINE_MS]
#include <cstdlib>
#include <iostream>

#include "netcut/synthetic.hpp"

int main(int argc, char** argv) {
  const std::string dir = argc > 1 ? argv[1] : "data/netcut7";
  const double deadline = argc > 2 ? std::atof(argv[2]) : 0.9;
  const auto fam = netcut::synthetic::reference_family();
  netcut::synthetic::write(fam, dir, deadline);
  std::size_t candidates = 0;
  for (const auto& n : fam.nets) candidates += netcut::enumerate_blockwise(n).size();
  std::cout << "wrote " << fam.nets.size() << " networks, " << candidates << " blockwise candidates, "
            << fam.truth.latency_ms.size() << " ground-truth rows to " << dir << '\n';
}
