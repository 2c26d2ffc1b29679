#pragma once

#include <cstdint>
#include <random>

#include "plearn/model.hpp"

namespace plearn {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to decorrelate derived seeds.
std::uint64_t mix_seed(std::uint64_t x);

/// Independent generator for work item `index` of a run seeded with `seed`.
/// Results of parallel work depend only on (seed, index), never on scheduling.
Rng substream(std::uint64_t seed, std::uint64_t index);

double uniform01(Rng& rng);
double standard_normal(Rng& rng);
double gamma_draw(Rng& rng, double shape);
Vector standard_normal_vector(Rng& rng, int n);

/// Dirichlet(alpha) draw. Zero-mass coordinates stay exactly zero.
Vector dirichlet(Rng& rng, const Vector& alpha);
Vector dirichlet_symmetric(Rng& rng, int n, double alpha);

/// Index drawn from unnormalized nonnegative weights.
int categorical(Rng& rng, const Vector& weights);

/// Wishart(dof, scale) via the Bartlett decomposition.
Matrix wishart(Rng& rng, double dof, const Matrix& scale);

/// Inverse-Wishart(dof, scale): if W ~ Wishart(dof, scale^{-1}) then W^{-1}.
Matrix inverse_wishart(Rng& rng, double dof, const Matrix& scale);

}  // namespace plearn
