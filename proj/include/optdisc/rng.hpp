// Deterministic random stream. All variates are derived from raw
// mt19937_64 output so results do not depend on libstdc++'s distribution
// implementations.
#ifndef OPTDISC_RNG_HPP
#define OPTDISC_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "optdisc/tensor.hpp"

namespace optdisc {

class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : gen_(seed) {}

  // uniform on (0,1): 53-bit mantissa, zero excluded
  double uniform() {
    while (true) {
      double u = (gen_() >> 11) * (1.0 / 9007199254740992.0);
      if (u > 0.0) return u;
    }
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Gumbel(0,1)
  double gumbel() { return -std::log(-std::log(uniform())); }

  bool bernoulli(double p) { return uniform() < p; }

  int uniform_int(int n) {  // in [0, n)
    return static_cast<int>(gen_() % static_cast<std::uint64_t>(n));
  }

  int categorical(const std::vector<double>& probs) {
    double u = uniform();
    double acc = 0.0;
    for (std::size_t k = 0; k < probs.size(); ++k) {
      acc += probs[k];
      if (u < acc) return static_cast<int>(k);
    }
    return static_cast<int>(probs.size()) - 1;
  }

  // Knuth multiplication method; fine for the small rates used here.
  int poisson(double lambda) {
    double limit = std::exp(-lambda);
    double prod = uniform();
    int n = 0;
    while (prod > limit) {
      prod *= uniform();
      ++n;
    }
    return n;
  }

  Tensor uniform_tensor(std::vector<int> shape, double lo, double hi) {
    Tensor t(std::move(shape));
    for (double& v : t.data) v = uniform(lo, hi);
    return t;
  }

  Tensor gumbel_tensor(std::vector<int> shape) {
    Tensor t(std::move(shape));
    for (double& v : t.data) v = gumbel();
    return t;
  }

  std::uint64_t raw() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace optdisc

#endif
