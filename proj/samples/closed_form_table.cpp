// Prints the initial multipartite concurrence of GHZ and W states and
// their ratio, which peaks at five qubits.
#include <cstdio>

#include "qent/concurrence.hpp"
#include "qent/state.hpp"

int main() {
  std::printf("%3s %14s %14s %10s\n", "n", "C_n(GHZ)", "C_n(W)", "ratio");
  for (int n = 2; n <= 8; ++n) {
    const double ghz = qent::concurrence_pure(qent::ghz_state(n));
    const double w = qent::concurrence_pure(qent::w_state(n));
    std::printf("%3d %14.10f %14.10f %10.6f\n", n, ghz, w, ghz / w);
  }

  int argmax = 2;
  for (int n = 2; n <= 64; ++n) {
    if (qent::ghz_w_ratio(n) > qent::ghz_w_ratio(argmax)) argmax = n;
  }
  std::printf("\nratio is maximal at n = %d (%.10f)\n", argmax,
              qent::ghz_w_ratio(argmax));
  return 0;
}
