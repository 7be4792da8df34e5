#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "rbb/md1.hpp"
#include "rbb/pmf.hpp"
#include "rbb/processes.hpp"

namespace rbb {

// How replicas place their initial balls.
enum class InitKind {
  Explicit,   // a fixed occupancy vector
  IidRepair,  // i.i.d. Poisson(mean) per bin, repaired to total N
  EqualLoad,  // N balls spread as evenly as possible
};

struct Initializer {
  InitKind kind = InitKind::EqualLoad;
  std::vector<std::int64_t> explicit_occ;
  double iid_mean = 0.0;
};

// Draw an initial configuration with exactly N balls in L bins. The
// i.i.d. initializer samples per-bin Poisson counts and then repairs by
// adding/removing uniformly chosen single balls until the total is N.
BinConfiguration make_initial(const Initializer& init, std::int64_t bins,
                              std::int64_t balls, RandomStream& rng);

// Per-step empirical summary of an R-replica RBB ensemble.
struct EnsembleStats {
  std::int64_t t = 0;
  double occupied_fraction = 0.0;            // mean w_bar over replicas
  std::vector<std::int64_t> marginal_counts; // histogram of bin-1 occupancy
  std::array<std::int64_t, 4> pair_counts{}; // joint (bin1>0, bin2>0), index 2*b1+b2
  double mean_load = 0.0;
};

// R independent RBB trajectories with per-step aggregation. Results are
// identical for any thread count (per-replica substreams, reduction in
// replica order).
std::vector<EnsembleStats> run_ensemble_rbb(std::int64_t bins,
                                            std::int64_t balls,
                                            const Initializer& init,
                                            std::int64_t horizon,
                                            std::int64_t replicas,
                                            const RandomStream& rng,
                                            int threads = 1,
                                            std::int64_t record_stride = 1);

// Final-time per-replica summaries, the raw material of the chaos
// estimators. pair_avg is the exchangeability-averaged pair indicator
// n(n-1)/(L(L-1)) with n the number of occupied bins; by symmetry its
// mean equals P(bin 1 and bin 2 both non-empty).
struct ReplicaFinal {
  double wbar;
  double pair_avg;
  std::int64_t bin1;
};

std::vector<ReplicaFinal> run_final_stats(std::int64_t bins,
                                          std::int64_t balls,
                                          const Initializer& init,
                                          std::int64_t horizon,
                                          std::int64_t replicas,
                                          const RandomStream& rng,
                                          int threads = 1);

// Chaos gap |P(bin1>0, bin2>0) - rho^2| across system sizes.
struct ChaosReport {
  std::vector<std::int64_t> L_values;
  std::vector<std::int64_t> replicas;
  std::vector<double> gap;
  std::vector<double> stderr_;
  std::vector<double> bound;      // chebyshev_chaos_bound at this delta
  std::vector<double> rho_hat;
  std::vector<double> pair_hat;
  std::vector<std::vector<std::int64_t>> marginal_hist;  // bin-1 occ at T
  double r = 0.0;
  std::int64_t horizon = 0;
  double delta = 0.1;
};

ChaosReport chaos_sweep(const std::vector<std::int64_t>& L_values, double r,
                        std::int64_t horizon,
                        const std::vector<std::int64_t>& replicas,
                        const RandomStream& rng, int threads = 1,
                        double delta = 0.1);

// Bounded functional of a single coordinate's trajectory: either a
// cylinder indicator 1(eta(t_1)=a_1, ..., eta(t_m)=a_m) or a capped
// monomial min(eta(t), cap).
struct PathFunctional {
  enum class Kind { Cylinder, CappedMonomial };
  Kind kind = Kind::Cylinder;
  std::vector<std::pair<std::int64_t, std::int64_t>> constraints;  // (t, a)
  std::int64_t time = 0;  // for CappedMonomial
  std::int64_t cap = 1;

  double eval(const std::vector<std::int64_t>& trajectory) const;
};

// Exact E[Phi(eta)] for the nonlinear process started from `initial`.
double exact_path_functional_expectation(const Pmf& initial,
                                         const PathFunctional& fn,
                                         std::int64_t horizon);

struct PathFunctionalResult {
  double empirical_product;    // E[prod_k Phi_k(coordinate k)] at finite L
  double product_of_nonlinear; // prod_k E[Phi_k(eta)], exact recursion
  double stderr_;
};

PathFunctionalResult path_functional_test(
    std::int64_t bins, double r, const std::vector<PathFunctional>& functionals,
    std::int64_t horizon, std::int64_t replicas, const RandomStream& rng,
    const Pmf& initial_law, int threads = 1);

// TV(law(eta(t)), pi_{rho_r}) per step, from the exact recursion.
std::vector<std::pair<std::int64_t, double>> convergence_to_equilibrium(
    double r, const Pmf& initial, std::int64_t horizon);

// Exact exponential moments of the M/D/1 queue from delta_{zeta0}
// against the geometric drift bound and the iterated envelope.
struct MomentRow {
  std::int64_t t;
  double moment;    // E(e^{lambda zeta(t)})
  double bound;     // (1 + C/gamma) e^{lambda zeta0}, uniform in t
  double envelope;  // (1-gamma)^t e^{lambda zeta0} + C/gamma
};

std::vector<MomentRow> exponential_moment_check(double rho, std::int64_t zeta0,
                                                std::int64_t horizon);

// Qualitative transient / positive-recurrent demo for the M/D/1 queue.
struct RegimeSummary {
  double rho = 0.0;
  std::int64_t horizon = 0;
  std::int64_t replicas = 0;
  double mean_final = 0.0;
  double stderr_final = 0.0;
  double frac_zero = 0.0;        // mean fraction of time at state 0
  double stderr_frac_zero = 0.0;
  double mean_max_excursion = 0.0;
  std::vector<std::int64_t> return_time_hist;  // pooled, capped at 64
  std::string verdict;
};

RegimeSummary regime_demo(double rho, std::int64_t horizon,
                          std::int64_t replicas, const RandomStream& rng,
                          std::int64_t zeta0 = 0, int threads = 1);

// Batch-means standard error of the mean of xs (100 batches, or fewer
// when xs is short).
double batch_stderr(const std::vector<double>& xs);

}  // namespace rbb
