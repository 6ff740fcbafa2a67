#include "maldom/bpso.hpp"

#include <algorithm>
#include <limits>
#include <mutex>
#include <unordered_map>

#include "maldom/mathutil.hpp"
#include "maldom/parallel.hpp"

namespace maldom {

Vector update_velocity(const Vector& velocity, const FeatureMask& position,
                       const FeatureMask& pbest, const FeatureMask& gbest, double inertia,
                       double c1, double c2, const Vector& r1, const Vector& r2, double v_max) {
    const Eigen::Index d = velocity.size();
    if (static_cast<Eigen::Index>(position.size()) != d ||
        static_cast<Eigen::Index>(pbest.size()) != d ||
        static_cast<Eigen::Index>(gbest.size()) != d || r1.size() != d || r2.size() != d)
        throw ShapeError("velocity update inputs must share one dimension");
    if (v_max <= 0.0) throw ConfigError("v_max must be positive");
    Vector out(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        std::size_t u = static_cast<std::size_t>(i);
        double x = position.test(u) ? 1.0 : 0.0;
        double p = pbest.test(u) ? 1.0 : 0.0;
        double g = gbest.test(u) ? 1.0 : 0.0;
        double v = inertia * velocity[i] + c1 * r1[i] * (p - x) + c2 * r2[i] * (g - x);
        out[i] = std::clamp(v, -v_max, v_max);
    }
    return out;
}

FeatureMask mask_from_draws(const Vector& velocity, const Vector& draws) {
    if (velocity.size() != draws.size())
        throw ShapeError("one draw is needed per velocity dimension");
    FeatureMask mask = FeatureMask::zeros(static_cast<std::size_t>(velocity.size()));
    for (Eigen::Index i = 0; i < velocity.size(); ++i)
        mask.set(static_cast<std::size_t>(i), draws[i] < sigmoid(velocity[i]));
    return mask;
}

void repair_mask(FeatureMask& mask, Rng& rng) {
    if (mask.any()) return;
    mask.set(rng.uniform_index(mask.size()), true);
}

double mask_fitness(const FeatureMask& mask, const Dataset& data, const ModelSpec& spec,
                    const std::vector<FoldAssignment>& folds, const CvOptions& opt) {
    if (static_cast<Eigen::Index>(mask.size()) != data.n_features())
        throw ShapeError("mask width does not match the dataset");
    if (!mask.any()) return 0.0;
    Dataset masked = apply_mask(data, mask);
    CvResult cv = cross_validate_with_folds(fitter_for(spec, 1), masked, folds, opt);
    return cv.f_measure.defined() ? cv.f_measure.mean : 0.0;
}

namespace {

struct Particle {
    FeatureMask position;
    Vector velocity;
    FeatureMask pbest;
    double pbest_fitness = 0.0;
    double fitness = 0.0;
    Rng rng{0};
};

}  // namespace

BpsoResult run_bpso(const FitnessFn& fitness, std::size_t n_features, const BpsoConfig& config) {
    if (n_features == 0) throw ConfigError("bpso needs at least one feature");
    if (config.swarm_size < 1) throw ConfigError("swarm size must be positive");
    if (config.iterations < 1) throw ConfigError("iteration count must be positive");
    if (config.stall_window && *config.stall_window < 1)
        throw ConfigError("stall window must be positive when set");

    // Cached fitness keyed by packed mask; the swarm revisits subsets often.
    std::unordered_map<std::uint64_t, double> cache;
    std::mutex cache_mutex;
    long evaluations = 0;
    const bool cacheable = n_features <= 64;
    auto cached_fitness = [&](const FeatureMask& mask) {
        if (!cacheable) {
            double value = fitness(mask);
            std::lock_guard<std::mutex> lock(cache_mutex);
            ++evaluations;
            return value;
        }
        std::uint64_t key = mask.to_key();
        {
            std::lock_guard<std::mutex> lock(cache_mutex);
            auto it = cache.find(key);
            if (it != cache.end()) return it->second;
        }
        double value = fitness(mask);
        std::lock_guard<std::mutex> lock(cache_mutex);
        auto [it, fresh] = cache.emplace(key, value);
        if (fresh) ++evaluations;
        return it->second;
    };

    std::vector<Particle> swarm(static_cast<std::size_t>(config.swarm_size));
    for (std::size_t p = 0; p < swarm.size(); ++p) {
        Particle& part = swarm[p];
        part.rng = Rng(derive_seed(config.seed, static_cast<std::uint64_t>(p)));
        part.position = FeatureMask::zeros(n_features);
        for (std::size_t i = 0; i < n_features; ++i)
            part.position.set(i, part.rng.u01() < 0.5);
        part.velocity.resize(static_cast<Eigen::Index>(n_features));
        for (Eigen::Index i = 0; i < part.velocity.size(); ++i)
            part.velocity[i] = part.rng.uniform(-config.v_max, config.v_max);
        repair_mask(part.position, part.rng);
    }

    FeatureMask gbest = FeatureMask::zeros(n_features);
    double gbest_fitness = -std::numeric_limits<double>::infinity();
    bool have_gbest = false;

    BpsoResult result;
    result.history.reserve(static_cast<std::size_t>(config.iterations));

    int stall = 0;
    for (int iter = 0; iter < config.iterations; ++iter) {
        // The first sweep evaluates the particles where they were seeded;
        // afterwards each iteration opens by moving the swarm.
        if (iter > 0) {
            for (Particle& part : swarm) {
                const Eigen::Index d = static_cast<Eigen::Index>(n_features);
                Vector r1(d), r2(d), draws(d);
                for (Eigen::Index i = 0; i < d; ++i) r1[i] = part.rng.u01();
                for (Eigen::Index i = 0; i < d; ++i) r2[i] = part.rng.u01();
                part.velocity = update_velocity(part.velocity, part.position, part.pbest,
                                                gbest, config.inertia, config.c1, config.c2,
                                                r1, r2, config.v_max);
                for (Eigen::Index i = 0; i < d; ++i) draws[i] = part.rng.u01();
                part.position = mask_from_draws(part.velocity, draws);
                repair_mask(part.position, part.rng);
            }
        }
        parallel_for(swarm.size(), config.n_threads, [&](std::size_t p) {
            swarm[p].fitness = cached_fitness(swarm[p].position);
        });
        for (Particle& part : swarm) {
            if (iter == 0 || part.fitness > part.pbest_fitness) {
                part.pbest_fitness = part.fitness;
                part.pbest = part.position;
            }
        }
        bool improved = false;
        for (const Particle& part : swarm) {
            if (!have_gbest || part.pbest_fitness > gbest_fitness) {
                gbest_fitness = part.pbest_fitness;
                gbest = part.pbest;
                have_gbest = true;
                improved = true;
            }
        }
        result.history.push_back(gbest_fitness);
        if (config.stall_window) {
            stall = improved ? 0 : stall + 1;
            if (stall >= *config.stall_window) break;
        }
    }

    result.best_mask = gbest;
    result.best_fitness = gbest_fitness;
    result.evaluations = evaluations;
    return result;
}

SelectionResult select_features(const Dataset& data, const ModelSpec& spec,
                                const BpsoConfig& config) {
    CvOptions opt;
    opt.k = config.fitness_folds;
    opt.repeats = 1;
    opt.seed = config.seed;
    opt.n_threads = 1;
    SelectionResult result;
    result.folds = cv_fold_plan(data, opt);
    FitnessFn fitness = [&](const FeatureMask& mask) {
        return mask_fitness(mask, data, spec, result.folds, opt);
    };
    BpsoConfig swarm_config = config;
    result.swarm = run_bpso(fitness, static_cast<std::size_t>(data.n_features()), swarm_config);
    return result;
}

}  // namespace maldom
