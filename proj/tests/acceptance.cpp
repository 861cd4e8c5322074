// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include "delib.hpp"

using namespace delib;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

int failures = 0;

void run(int id, double budget_s, const std::function<void(Outcome&)>& body) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail << " [exception: " << e.what() << "]";
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.require(secs <= budget_s, "runtime over " + std::to_string(budget_s) + " s");
  if (!o.pass) ++failures;
  std::printf("%s criterion %d (%.1f s):%s\n", o.pass ? "PASS" : "FAIL", id, secs, o.detail.str().c_str());
  std::fflush(stdout);
}

PMatrix random_pmatrix(std::size_t m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PMatrix pm(m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) {
      const double p = u(rng) < 0.1 ? 0.5 : u(rng);
      pm(i, j) = p;
      pm(j, i) = 1.0 - p;
    }
  return pm;
}

}  // namespace

int main() {
  const double sqrt2 = std::sqrt(2.0);
  std::optional<ThetaResult> theta2, theta3;

  run(1, 10, [&](Outcome& o) {
    theta2 = solve_theta2();
    const auto& x = theta2->cases.at(0).optimum.point;
    o.detail << " value=" << theta2->value << " p=" << x.at(0) << " q=" << x.at(1);
    o.require(std::abs(theta2->value - (sqrt2 - 1.0)) <= 1e-4, "value");
    o.require(std::abs(x[0] - (1.0 - 1.0 / sqrt2)) <= 1e-3, "p");
    o.require(x[1] <= 1e-3, "q");
    o.require(theta2->certified, "certified");
  });

  run(2, 300, [&](Outcome& o) {
    const double beta = 2.0 + sqrt2 + 1e-3;
    const auto r = solve_copeland_k2(beta);
    const double delta = 1.0 + beta - (3.0 + sqrt2);
    for (const auto& c : r.cases) {
      o.detail << " case" << c.index << "_bound=" << c.optimum.bound << "(" << to_string(c.optimum.status) << ")";
      o.require(c.optimum.status == SolveStatus::Certified, "case certified");
      o.require(c.optimum.bound < 0.0, "case bound negative");
    }
    o.detail << " delta=" << delta;
    o.require(r.both_negative, "both negative");
    o.require(delta <= 4e-3, "delta");
  });

  run(3, 1800, [&](Outcome& o) {
    theta3 = solve_theta3();
    for (const auto& c : theta3->cases) {
      o.detail << " c" << c.index << "=" << c.optimum.bound;
      const bool certified_or_budget =
          c.optimum.status == SolveStatus::Certified || c.optimum.status == SolveStatus::BudgetExhausted;
      o.require(certified_or_budget, "case status");
      o.require(c.optimum.bound <= 0.2530, "case bound <= 0.2530");
      if (c.index != 3) {
        o.require(c.optimum.status == SolveStatus::Certified, "case " + std::to_string(c.index) + " certified");
        o.require(c.optimum.bound <= 0.2505, "case " + std::to_string(c.index) + " bound <= 0.2505");
      }
    }
    o.detail << " incumbent=" << theta3->incumbent_value << " pk=" << theta3->incumbent_pk;
    o.require(theta3->cases.size() == 8, "eight cases");
    o.require(theta3->incumbent_value >= 0.2499, "incumbent");
    o.require(theta3->incumbent_pk >= 0.5 - 1e-12, "incumbent p_k");
  });

  run(4, 10, [&](Outcome& o) {
    const double up[3] = {3.34, 2.31, 1.90};
    const double det[3] = {1.82, 1.51, 1.37};
    const double rnd[3] = {1.41, 1.25, 1.18};
    for (int k = 2; k <= 4; ++k) {
      const auto z = zeta(k);
      o.detail << " k" << k << "=(" << z.distortion_upper << "," << z.det_lb << "," << z.rand_lb << ")";
      o.require(std::abs(z.distortion_upper - up[k - 2]) <= 0.01, "distortion_upper k=" + std::to_string(k));
      o.require(std::abs(z.det_lb - det[k - 2]) <= 0.01, "det_lb k=" + std::to_string(k));
      o.require(std::abs(z.rand_lb - rnd[k - 2]) <= 0.01, "rand_lb k=" + std::to_string(k));
    }
  });

  run(5, 30, [&](Outcome& o) {
    const auto lin = sweep(2, 30);
    for (std::size_t i = 1; i < lin.size(); ++i)
      o.require(lin[i].distortion_upper < lin[i - 1].distortion_upper, "linear strictly decreasing");
    o.require(lin.back().distortion_upper < lin[2].distortion_upper, "k=30 below k=4");
    const auto sq = sweep(2, 30, BiasTransform::sqrt());
    for (std::size_t i = 0; i < sq.size(); ++i) {
      o.require(sq[i].distortion_upper >= 2.0, "sqrt >= 2");
      if (i) o.require(sq[i].distortion_upper < sq[i - 1].distortion_upper, "sqrt decreasing");
    }
    o.detail << " linear k30=" << lin.back().distortion_upper << " sqrt k2=" << sq.front().distortion_upper
             << " sqrt k30=" << sq.back().distortion_upper;
  });

  run(6, 60, [&](Outcome& o) {
    for (int k = 2; k <= 9; ++k) {
      const auto inst = lb1_instance(k);
      const double p = exact_pk(inst, ModelConfig::averaging(k), 0, 1).value;
      const double mean = bias_distribution(inst, 0, 1).mean();
      const double target = k % 2 ? 1.0 / (k + 1) : 2.0 / (3.0 * k);
      o.detail << " k" << k << ":pk=" << p;
      o.require(p >= 0.5, "pk >= 1/2 at k=" + std::to_string(k));
      if (k % 2) o.require(p == 0.5, "pk == 1/2 at odd k=" + std::to_string(k));
      o.require(std::abs(mean - target) <= 1e-12, "mean at k=" + std::to_string(k));
    }
  });

  run(7, 60, [&](Outcome& o) {
    const auto r = pipeline_distortion(copeland_k2_worst_case(1e-3), ModelConfig::averaging(2),
                                       EstimationMode::exact_mode());
    const double target = 3.0 + sqrt2;
    o.detail << " distortion=" << r.distortion;
    o.require(r.distortion >= target - 0.05 && r.distortion <= target, "distortion window");
  });

  run(8, 60, [&](Outcome& o) {
    double prev = 0.0;
    for (int n : {6, 12, 20}) {
      const auto inst = example1_instance(n, 2, 0.01);
      double worst = std::numeric_limits<double>::infinity();
      for (std::size_t c = 1; c < inst.m(); ++c) worst = std::min(worst, distortion_of(inst, c));
      o.detail << " n" << n << "=" << worst;
      o.require(worst > prev, "monotone in n");
      o.require(worst < 3.0, "below 3");
      if (n == 20) o.require(worst >= 2.75, "n=20 >= 2.75");
      prev = worst;
    }
  });

  run(9, 600, [&](Outcome& o) {
    std::mt19937_64 rng(2027);
    int uncovered = 0;
    for (int t = 0; t < 1000; ++t) {
      const auto tour = build_tournament(random_pmatrix(2 + t % 11, rng), 0.0);
      uncovered += uncovered_check(tour, copeland_winner(tour));
    }
    o.require(uncovered == 1000, "copeland winner uncovered");

    int mc_ok = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
      const auto inst = random_euclidean_instance(2 + s % 3, 3 + s % 5, 1 + s % 3, 7000 + s);
      const auto model = s % 2 ? ModelConfig::averaging(1 + s % 5) : ModelConfig::random_choice(1 + s % 5);
      const double p = exact_pk(inst, model, 0, 1).value;
      const auto r = monte_carlo_pk(inst, model, 0, 1, 20000, s, 4);
      mc_ok += std::abs(r.value - p) <= 4.0 * std::sqrt(p * (1.0 - p) / 20000.0) + 1e-12;
    }
    o.require(mc_ok == 100, "monte carlo within 4 stderr");

    int ratio_ok = 0, ratio_n = 0;
    for (std::uint64_t s = 0; ratio_n < 500; ++s) {
      const auto inst = random_euclidean_instance(2 + s % 5, 2 + s % 6, 1 + s % 3, 9000 + s);
      std::size_t w = rng() % inst.m();
      std::size_t x = (w + 1 + rng() % (inst.m() - 1)) % inst.m();
      double g = bias_distribution(inst, w, x).mean();
      if (g < 0.0) {
        std::swap(w, x);
        g = -g;
      }
      if (!(g < 1.0)) continue;
      ++ratio_n;
      ratio_ok += social_cost(inst, w) / social_cost(inst, x) <= (1.0 + g) / (1.0 - g) * (1.0 + 1e-12);
    }
    o.require(ratio_ok == 500, "cost ratio bound");

    int shape_bad = 0;
    const auto g = BiasTransform::linear();
    for (int k = 1; k <= 30; ++k)
      for (int ia = 1; ia < 50; ++ia) {
        const double a = ia / 50.0;
        double prev = constraint_lhs(k, a, 1e-3, g, 1.0);
        double prev_d = std::numeric_limits<double>::infinity();
        for (int iw = 2; iw <= 1000; ++iw) {
          const double v = constraint_lhs(k, a, iw / 1000.0, g, 1.0);
          const double d = v - prev;
          shape_bad += d < -1e-15 || d > prev_d + 1e-13;
          prev_d = d;
          prev = v;
        }
      }
    o.require(shape_bad == 0, "constraint_lhs monotone and concave");
    o.detail << " uncovered=" << uncovered << "/1000 mc=" << mc_ok << "/100 ratio=" << ratio_ok
             << "/500 lhs_violations=" << shape_bad;
  });

  run(10, 120, [&](Outcome& o) {
    SampleRunConfig cfg;
    cfg.instance = random_euclidean_instance(5, 8, 2, 7);
    cfg.model = ModelConfig::averaging(3);
    cfg.groups = sample_size_averaging(5, 0.05, 0.1);
    cfg.trials = 200;
    cfg.seed = 1;
    cfg.epsilon = 0.05;
    cfg.threads = default_threads();
    const auto rep = empirical_distortion_trials(cfg);
    o.detail << " groups=" << cfg.groups << " fraction=" << rep.fraction_within_epsilon;
    o.require(rep.fraction_within_epsilon >= 0.9, "fraction within epsilon");
  });

  run(11, 10, [&](Outcome& o) {
    o.require(theta2.has_value() && theta3.has_value(), "certified values available");
    if (!o.pass) return;
    for (const auto& [k, r] : {std::pair{2, &*theta2}, std::pair{3, &*theta3}}) {
      const double lo = theta_lower_bound_closed_form(k);
      const double hi = theta_upper_bound_closed_form(k);
      o.detail << " k" << k << ":" << lo << "<=" << r->value << "<=" << hi;
      o.require(lo <= r->value && r->value <= hi, "chain at k=" + std::to_string(k));
    }
    const double z1 = zeta(1).zeta;
    o.detail << " zeta1=" << z1;
    o.require(std::abs(z1 - 0.5) <= 1e-6, "zeta_1");
  });

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
