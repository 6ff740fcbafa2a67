#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "maldom/dataset.hpp"
#include "maldom/evaluation.hpp"
#include "maldom/random.hpp"
#include "maldom/types.hpp"

namespace maldom {

struct BpsoConfig {
    int swarm_size = 30;
    int iterations = 500;
    double c1 = 2.0;
    double c2 = 2.0;
    double inertia = 1.0;
    double v_max = 4.0;
    int fitness_folds = 5;
    /// Stop early when the global best has not improved for this many
    /// consecutive iterations; disabled by default.
    std::optional<int> stall_window;
    std::uint64_t seed = 0;
    int n_threads = 1;
};

/// One inertia-weighted velocity step against the personal and global bests,
/// clamped to [-v_max, v_max] per dimension. r1 and r2 are the uniform draws
/// for the cognitive and social terms, passed in so the update is a pure
/// function.
Vector update_velocity(const Vector& velocity, const FeatureMask& position,
                       const FeatureMask& pbest, const FeatureMask& gbest, double inertia,
                       double c1, double c2, const Vector& r1, const Vector& r2, double v_max);

/// Binary position sampling: bit i is set when draws[i] < sigmoid(velocity[i]).
FeatureMask mask_from_draws(const Vector& velocity, const Vector& draws);

/// All-zero masks select no features and cannot be evaluated; force one
/// uniformly chosen bit on. No-op for any other mask.
void repair_mask(FeatureMask& mask, Rng& rng);

/// Fitness of a candidate subset: mean F-measure of the model over the
/// frozen fold plan on the masked dataset. All-zero masks and runs without a
/// defined F-measure score 0.
double mask_fitness(const FeatureMask& mask, const Dataset& data, const ModelSpec& spec,
                    const std::vector<FoldAssignment>& folds, const CvOptions& opt);

using FitnessFn = std::function<double(const FeatureMask&)>;

struct BpsoResult {
    FeatureMask best_mask;
    double best_fitness = 0.0;
    /// Global-best fitness after each iteration's evaluation sweep;
    /// non-decreasing by construction. One entry per iteration actually run
    /// (fewer than configured when the stall window stops the search early).
    std::vector<double> history;
    long evaluations = 0;  // distinct masks evaluated (cache misses)
};

/// Binary particle swarm over feature subsets. Every particle owns a seed
/// stream derived from config.seed, so the trajectory is reproducible and
/// independent of evaluation order; fitness values are cached by mask.
BpsoResult run_bpso(const FitnessFn& fitness, std::size_t n_features, const BpsoConfig& config);

struct SelectionResult {
    BpsoResult swarm;
    std::vector<FoldAssignment> folds;  // the frozen fitness folds
};

/// Wires run_bpso to mask_fitness for one model family: folds are frozen
/// from the config seed once, then shared by every fitness evaluation so
/// subsets compete on identical splits.
SelectionResult select_features(const Dataset& data, const ModelSpec& spec,
                                const BpsoConfig& config);

}  // namespace maldom
