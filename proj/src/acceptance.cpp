#include "rbb/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "rbb/exact_chain.hpp"
#include "rbb/gof.hpp"
#include "rbb/md1.hpp"
#include "rbb/pmf.hpp"
#include "rbb/processes.hpp"
#include "rbb/random.hpp"
#include "rbb/stats.hpp"

namespace rbb {

namespace {

struct Check {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "FAILED: " << what << "; ";
    }
  }
};

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

// --- 1. Exact stationary measure at N = L = 3 ---------------------------
CriterionResult criterion_stationary_masses() {
  Check c;
  const ExactChain chain(3, 3);
  const auto pi = stationary_rbb(chain, 1e-12);
  const double residual = chain.stationarity_residual(pi);
  c.require(residual <= 1e-12, "residual " + fmt(residual));
  double max_err = 0.0;
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const auto& occ = chain.states()[i].occupancies;
    const std::int64_t mx = *std::max_element(occ.begin(), occ.end());
    const double expect = mx == 1 ? 4.0 / 21.0 : (mx == 3 ? 1.0 / 21.0 : 1.0 / 9.0);
    max_err = std::max(max_err, std::abs(pi[i] - expect));
  }
  c.require(max_err <= 1e-12, "mass mismatch " + fmt(max_err));
  c.detail << "residual=" << fmt(residual) << " max_mass_err=" << fmt(max_err);
  return {1, "exact stationary masses (N=L=3): 4/21, 1/21, 1/9", c.pass,
          c.detail.str(), 0.0};
}

// --- 2. Irreversibility witness -----------------------------------------
CriterionResult criterion_irreversibility() {
  Check c;
  const BinConfiguration flat({1, 1, 1});
  const BinConfiguration spike({3, 0, 0});
  const double fwd = transition_probability(flat, spike);
  const double rev = transition_probability(spike, flat);
  c.require(fwd > 0.0, "forward probability not positive");
  c.require(rev == 0.0, "reverse probability not exactly zero");
  c.detail << "P((1,1,1)->(3,0,0))=" << fmt(fwd) << " reverse=" << fmt(rev);
  return {2, "irreversibility: (1,1,1)->(3,0,0) allowed, reverse forbidden",
          c.pass, c.detail.str(), 0.0};
}

// --- 3. rho_r consistency ------------------------------------------------
CriterionResult criterion_rho_r() {
  Check c;
  double worst_mean = 0.0, worst_fp = 0.0;
  for (double r : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    const double rho = rho_of_r(r);
    const Pmf pi = md1_stationary_pmf(rho, 4000, 1e-12);
    worst_mean = std::max(worst_mean, std::abs(pi.mean() - r));
    const double fp = -rho * rho + 2.0 * rho * (r + 1.0) - 2.0 * r;
    worst_fp = std::max(worst_fp, std::abs(fp));
  }
  c.require(worst_mean <= 1e-8, "stationary mean error " + fmt(worst_mean));
  c.require(worst_fp <= 1e-12, "fixed-point residual " + fmt(worst_fp));
  c.detail << "max_mean_err=" << fmt(worst_mean)
           << " max_fixed_point=" << fmt(worst_fp);
  return {3, "rho_r: stationary mean equals r; fixed point holds", c.pass,
          c.detail.str(), 0.0};
}

// --- 4. Characteristic-function match -----------------------------------
CriterionResult criterion_char_fn() {
  Check c;
  double worst = 0.0;
  for (double rho : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    const Pmf pi = md1_stationary_pmf(rho, 4000, 1e-12);
    for (int i = 1; i <= 30; ++i) {
      const double x = 0.1 * static_cast<double>(i);
      worst = std::max(worst, std::abs(pmf_char_fn(pi, x) - md1_char_fn(rho, x)));
    }
  }
  c.require(worst <= 1e-8, "transform mismatch " + fmt(worst));
  c.detail << "max_abs_err=" << fmt(worst);
  return {4, "M/D/1 pmf transform matches closed-form characteristic function",
          c.pass, c.detail.str(), 0.0};
}

// --- 5. Mean conservation under the nonlinear recursion ------------------
CriterionResult criterion_mean_conservation() {
  Check c;
  const std::vector<Pmf> initials = {
      Pmf::delta(3), Pmf({0.5, 0.5}), poisson_pmf(0.7, 1e-15)};
  double worst = 0.0;
  for (const Pmf& init : initials) {
    const double r = init.mean();
    const auto laws = nonlinear_pmf_evolve(init, 200);
    for (const Pmf& law : laws)
      worst = std::max(worst, std::abs(law.mean() - r));
  }
  c.require(worst <= 1e-10, "mean drift " + fmt(worst));
  c.detail << "max_mean_drift=" << fmt(worst);
  return {5, "nonlinear recursion conserves the mean over 200 steps", c.pass,
          c.detail.str(), 0.0};
}

// --- 6. Stationarity of pi_rho under the nonlinear map -------------------
CriterionResult criterion_pi_stationarity() {
  Check c;
  double worst = 0.0;
  for (double rho : {0.2, 0.5, 0.8}) {
    const Pmf pi = md1_stationary_pmf(rho, 4000, 1e-13);
    const auto laws = nonlinear_pmf_evolve(pi, 1);
    worst = std::max(worst, tv_distance(laws[1], pi));
  }
  c.require(worst <= 1e-10, "TV after one step " + fmt(worst));
  c.detail << "max_tv=" << fmt(worst);
  return {6, "pi_rho is a fixed point of the nonlinear map", c.pass,
          c.detail.str(), 0.0};
}

// --- 7. Convergence to pi_{rho_r} ---------------------------------------
CriterionResult criterion_convergence() {
  Check c;
  const auto curve = convergence_to_equilibrium(0.5, Pmf({0.5, 0.5}), 500);
  double best = 1.0;
  std::int64_t hit = -1;
  for (const auto& [t, tv] : curve) {
    if (tv < best) best = tv;
    if (hit < 0 && tv < 1e-6) hit = t;
  }
  c.require(hit >= 0, "TV never dropped below 1e-6; min=" + fmt(best));
  c.detail << "first_t_below_1e-6=" << hit << " final_tv=" << fmt(curve.back().second);
  return {7, "nonlinear law converges to pi_{rho_0.5} (TV < 1e-6 by t=500)",
          c.pass, c.detail.str(), 0.0};
}

// --- 8. Exponential-moment drift bound ----------------------------------
CriterionResult criterion_drift_bound() {
  Check c;
  double worst_margin = 1.0;
  for (double rho : {0.3, 0.5, 0.9}) {
    for (std::int64_t z0 : {0, 5, 20}) {
      const auto rows = exponential_moment_check(rho, z0, 200);
      for (const auto& row : rows) {
        c.require(row.moment <= row.bound,
                  "moment above uniform bound at rho=" + fmt(rho) +
                      " z0=" + fmt(static_cast<double>(z0)) +
                      " t=" + fmt(static_cast<double>(row.t)));
        c.require(row.moment <= row.envelope,
                  "moment above iterated envelope at rho=" + fmt(rho));
        worst_margin = std::min(worst_margin, 1.0 - row.moment / row.bound);
      }
    }
  }
  c.detail << "min_relative_margin=" << fmt(worst_margin);
  return {8, "exponential moments obey the drift bound and envelope", c.pass,
          c.detail.str(), 0.0};
}

// --- 9. Thinning coupling ------------------------------------------------
CriterionResult criterion_coupling(const RandomStream& base) {
  Check c;
  const double r = 0.8;
  const std::int64_t T = 1000;
  const std::int64_t trajectories = 10000;

  // Exact rho(t) sequence of the nonlinear process with E(eta(0)) = r.
  const Pmf init({1.0 - r, r});
  const auto laws = nonlinear_pmf_evolve(init, T);
  std::vector<double> rho(static_cast<std::size_t>(T));
  for (std::int64_t t = 0; t < T; ++t)
    rho[static_cast<std::size_t>(t)] =
        std::min(r, std::clamp(1.0 - laws[static_cast<std::size_t>(t)][0], 0.0, 1.0));

  std::int64_t violations = 0;
  for (std::int64_t traj = 0; traj < trajectories; ++traj) {
    RandomStream rng = base.substream(static_cast<std::uint64_t>(traj));
    const std::int64_t start = rng.bernoulli(r) ? 1 : 0;
    ScalarState eta{start}, zeta{start};
    for (std::int64_t t = 0; t < T; ++t) {
      std::tie(eta, zeta) =
          coupled_step(eta, zeta, rho[static_cast<std::size_t>(t)], r, rng);
      if (eta.count > zeta.count) ++violations;
    }
  }
  c.require(violations == 0,
            "domination violations: " + fmt(static_cast<double>(violations)));

  // Marginal law of the thinned arrivals at the long-run rate.
  const double rho_star = rho.back();
  RandomStream rng = base.substream(1u << 24);
  std::vector<std::int64_t> hist;
  for (std::int64_t i = 0; i < 1000000; ++i) {
    const auto [eta1, zeta1] =
        coupled_step(ScalarState{0}, ScalarState{0}, rho_star, r, rng);
    if (static_cast<std::size_t>(eta1.count) >= hist.size())
      hist.resize(static_cast<std::size_t>(eta1.count) + 1, 0);
    ++hist[static_cast<std::size_t>(eta1.count)];
  }
  const GofResult gof = poisson_chi_square(hist, rho_star, 1e-3);
  c.require(gof.pass, "thinned arrivals failed Poisson chi-square (stat=" +
                          fmt(gof.statistic) + " crit=" + fmt(gof.critical) + ")");
  c.detail << "violations=0 chi2=" << fmt(gof.statistic) << "/"
           << fmt(gof.critical) << " rho*=" << fmt(rho_star);
  return {9, "coupling dominates pathwise; thinned arrivals are Poisson(rho_t)",
          c.pass, c.detail.str(), 0.0};
}

// --- 10. Propagation of chaos -------------------------------------------
CriterionResult criterion_chaos(const RandomStream& base, int threads) {
  Check c;
  const double r = 0.5;
  const std::int64_t T = 50;
  const std::vector<std::int64_t> Ls = {10, 100, 1000};
  const std::vector<std::int64_t> Rs = {40000, 40000, 20000};
  const ChaosReport report = chaos_sweep(Ls, r, T, Rs, base, threads, 0.1);

  for (double se : report.stderr_)
    c.require(se < 1e-3, "stderr above resolution: " + fmt(se));
  c.require(report.gap[0] > report.gap[1] && report.gap[1] > report.gap[2],
            "gap not strictly decreasing (" + fmt(report.gap[0]) + ", " +
                fmt(report.gap[1]) + ", " + fmt(report.gap[2]) + ")");
  const double end_se = std::sqrt(report.stderr_[0] * report.stderr_[0] +
                                  report.stderr_[2] * report.stderr_[2]);
  c.require(report.gap[0] - report.gap[2] > 3.0 * end_se,
            "end-to-end decrease below 3 sigma");

  // Bin-1 marginal at L = 1000 against the exact nonlinear law started
  // from the same Poisson(r) per-bin law.
  const auto laws = nonlinear_pmf_evolve(poisson_pmf(r, 1e-15), T);
  const Pmf& exact = laws.back();
  const auto& hist = report.marginal_hist[2];
  std::int64_t n = 0;
  for (auto h : hist) n += h;
  double l1 = 0.0;
  const std::size_t cells = std::max(hist.size(), exact.support_size());
  for (std::size_t k = 0; k < cells; ++k) {
    const double emp =
        k < hist.size()
            ? static_cast<double>(hist[k]) / static_cast<double>(n)
            : 0.0;
    l1 += std::abs(emp - exact[k]);
  }
  const double tv = 0.5 * l1 + 0.5 * exact.tail_bound;
  c.require(tv <= 0.02, "marginal TV at L=1000: " + fmt(tv));
  c.detail << "gaps=(" << fmt(report.gap[0]) << "," << fmt(report.gap[1]) << ","
           << fmt(report.gap[2]) << ") marginal_tv=" << fmt(tv);
  return {10, "chaos gap shrinks with L; bin-1 marginal matches nonlinear law",
          c.pass, c.detail.str(), 0.0};
}

// --- 11. Chebyshev bound validity ---------------------------------------
CriterionResult criterion_chebyshev(const RandomStream& base, int threads) {
  Check c;

  // L = 3 with the exact stationary pair probability.
  {
    const ExactChain chain(3, 3);
    const auto pi = stationary_rbb(chain, 1e-12);
    const PairStats ps = exact_pair_stats(chain, pi);
    const std::int64_t T = 1000000;
    RandomStream rng = base.substream(0);
    std::vector<double> dev005, dev01;
    dev005.reserve(static_cast<std::size_t>(T));
    dev01.reserve(static_cast<std::size_t>(T));
    simulate_rbb(BinConfiguration({1, 1, 1}), T, rng,
                 [&](std::int64_t t, const BinConfiguration& cfg) {
                   if (t == 0) return;
                   const double wbar =
                       static_cast<double>(occupied_count(cfg)) / 3.0;
                   const double d = std::abs(wbar - ps.rho);
                   dev005.push_back(d > 0.05 ? 1.0 : 0.0);
                   dev01.push_back(d > 0.1 ? 1.0 : 0.0);
                 });
    for (const auto& [delta, devs] :
         {std::pair<double, const std::vector<double>*>{0.05, &dev005},
          {0.1, &dev01}}) {
      double freq = 0.0;
      for (double d : *devs) freq += d;
      freq /= static_cast<double>(T);
      const double bound = chebyshev_chaos_bound(3, delta, ps.pair_prob, ps.rho);
      const double se = batch_stderr(*devs);
      c.require(freq <= bound + 3.0 * se,
                "L=3 delta=" + fmt(delta) + ": freq " + fmt(freq) +
                    " above bound " + fmt(bound));
    }
  }

  // L = 100 with estimated pair probability.
  {
    const std::int64_t L = 100, R = 10000, T = 60;
    const std::int64_t N = 50;
    const Initializer init{InitKind::IidRepair, {}, 0.5};
    const auto finals =
        run_final_stats(L, N, init, T, R, base.substream(1), threads);
    double rho_hat = 0.0, pair_hat = 0.0;
    for (const auto& f : finals) {
      rho_hat += f.wbar;
      pair_hat += f.pair_avg;
    }
    rho_hat /= static_cast<double>(R);
    pair_hat /= static_cast<double>(R);
    for (double delta : {0.05, 0.1}) {
      std::vector<double> devs;
      devs.reserve(static_cast<std::size_t>(R));
      for (const auto& f : finals)
        devs.push_back(std::abs(f.wbar - rho_hat) > delta ? 1.0 : 0.0);
      double freq = 0.0;
      for (double d : devs) freq += d;
      freq /= static_cast<double>(R);
      const double bound = chebyshev_chaos_bound(L, delta, pair_hat, rho_hat);
      const double se = batch_stderr(devs);
      c.require(freq <= bound + 3.0 * se,
                "L=100 delta=" + fmt(delta) + ": freq " + fmt(freq) +
                    " above bound " + fmt(bound));
      c.detail << "L=100 d=" << fmt(delta) << " freq=" << fmt(freq)
               << " bound=" << fmt(bound) << "; ";
    }
  }
  return {11, "empirical concentration of w_bar stays within the Chebyshev bound",
          c.pass, c.detail.str(), 0.0};
}

// --- 12. Regime classification demo -------------------------------------
CriterionResult criterion_regimes(const RandomStream& base, int threads) {
  Check c;
  const RegimeSummary transient =
      regime_demo(1.2, 10000, 100, base.substream(0), 0, threads);
  c.require(std::abs(transient.mean_final - 2000.0) <= 200.0,
            "transient mean final " + fmt(transient.mean_final));
  const RegimeSummary stable =
      regime_demo(0.5, 100000, 50, base.substream(1), 0, threads);
  c.require(std::abs(stable.frac_zero - 0.5) <=
                3.0 * stable.stderr_frac_zero,
            "time at 0: " + fmt(stable.frac_zero) + " +- " +
                fmt(stable.stderr_frac_zero));
  c.detail << "rho=1.2 mean_final=" << fmt(transient.mean_final)
           << " rho=0.5 frac_zero=" << fmt(stable.frac_zero);
  return {12, "transient growth at rho=1.2; time at 0 near 1-rho at rho=0.5",
          c.pass, c.detail.str(), 0.0};
}

CriterionResult timed(CriterionResult (*fn)()) {
  const auto start = std::chrono::steady_clock::now();
  CriterionResult res = fn();
  res.seconds = std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - start)
                    .count();
  return res;
}

template <class Fn>
CriterionResult timed_with(Fn&& fn) {
  const auto start = std::chrono::steady_clock::now();
  CriterionResult res = fn();
  res.seconds = std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - start)
                    .count();
  return res;
}

void enforce_runtime(CriterionResult& res, double limit_seconds) {
  if (res.seconds > limit_seconds) {
    res.pass = false;
    res.detail += " (runtime " + fmt(res.seconds) + "s above limit " +
                  fmt(limit_seconds) + "s)";
  }
}

}  // namespace

std::vector<CriterionResult> run_acceptance(std::uint64_t seed, int threads) {
  std::vector<CriterionResult> out;

  out.push_back(timed(criterion_stationary_masses));
  enforce_runtime(out.back(), 1.0);
  out.push_back(timed(criterion_irreversibility));
  out.push_back(timed(criterion_rho_r));
  enforce_runtime(out.back(), 1.0);
  out.push_back(timed(criterion_char_fn));
  out.push_back(timed(criterion_mean_conservation));
  out.push_back(timed(criterion_pi_stationarity));
  out.push_back(timed(criterion_convergence));
  enforce_runtime(out.back(), 10.0);
  out.push_back(timed(criterion_drift_bound));

  const RandomStream base9(seed, 9ull << 32);
  out.push_back(timed_with([&] { return criterion_coupling(base9); }));
  const RandomStream base10(seed, 10ull << 32);
  out.push_back(timed_with([&] { return criterion_chaos(base10, threads); }));
  enforce_runtime(out.back(), 300.0);
  const RandomStream base11(seed, 11ull << 32);
  out.push_back(timed_with([&] { return criterion_chebyshev(base11, threads); }));
  const RandomStream base12(seed, 12ull << 32);
  out.push_back(timed_with([&] { return criterion_regimes(base12, threads); }));

  return out;
}

}  // namespace rbb
