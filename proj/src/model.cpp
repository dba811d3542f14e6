#include "udsmc/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <unordered_set>

#include "udsmc/errors.hpp"

namespace udsmc {

double ParticleEnsemble::normalize() {
  double lse = log_sum_exp(log_weights_);
  if (lse == neg_inf) fail(errc::no_mass, "ensemble has no surviving weight");
  for (auto& lw : log_weights_) {
    if (lw != neg_inf) lw -= lse;
  }
  normalized_ = true;
  return lse;
}

long ParticleEnsemble::distinct_paths() const {
  // Bitwise path identity: duplicates only ever arise from resampling copies,
  // which are exact, so hashing raw bytes is the right equality.
  std::unordered_set<uint64_t> seen;
  seen.reserve(log_weights_.size() * 2);
  size_t len = path_len();
  long distinct = 0;
  for (long i = 0; i < size(); ++i) {
    const double* p = paths_.data() + (size_t)i * len;
    uint64_t h = 0xcbf29ce484222325ull;
    const unsigned char* bytes = reinterpret_cast<const unsigned char*>(p);
    for (size_t b = 0; b < len * sizeof(double); ++b) {
      h ^= bytes[b];
      h *= 0x100000001b3ull;
    }
    if (seen.insert(h).second) ++distinct;
  }
  return distinct;
}

EstimateReport estimate(const ParticleEnsemble& ens, const Statistic& f) {
  if (ens.size() == 0) fail(errc::no_mass, "empty ensemble");
  std::vector<double> w;
  double shift = shifted_exp(ens.log_weights(), w);
  if (shift == neg_inf) fail(errc::no_mass, "ensemble has no surviving weight");

  int d = f.dim();
  std::vector<double> num((size_t)d, 0.0);
  std::vector<double> fx((size_t)d, 0.0);
  double den = 0.0;
  for (long i = 0; i < ens.size(); ++i) {
    if (w[(size_t)i] == 0.0) continue;
    f.eval(ens.path(i), fx);
    for (int j = 0; j < d; ++j) num[(size_t)j] += fx[(size_t)j] * w[(size_t)i];
    den += w[(size_t)i];
  }

  EstimateReport rep;
  rep.value.resize((size_t)d);
  for (int j = 0; j < d; ++j) rep.value[(size_t)j] = num[(size_t)j] / den;
  rep.n_particles = ens.size();
  rep.n_distinct = ens.distinct_paths();
  rep.weight_entropy = ens.entropy();
  return rep;
}

}  // namespace udsmc
