// Acceptance suite: one line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "fkpp/fit.hpp"
#include "fkpp/model.hpp"
#include "fkpp/pde.hpp"
#include "fkpp/profile.hpp"
#include "fkpp/spectrum.hpp"
#include "fkpp/wave.hpp"

namespace fs = std::filesystem;
using namespace fkpp;

namespace {

int g_failures = 0;

void report(int id, bool pass, const std::string& what,
            const std::string& detail = "") {
  std::printf("[%s] C%d: %s%s%s\n", pass ? "PASS" : "FAIL", id, what.c_str(),
              detail.empty() ? "" : " -- ", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// ---- C1: constant identities --------------------------------------------
void criterion1() {
  bool ok = true;
  std::string detail;
  for (double r : {1.2, 1.5, 2.0, 2.5, 2.9, 3.0, 4.0, 5.0}) {
    for (double A : {0.5, 1.0, 2.0, 4.0}) {
      ModelParams p = make_params(r, A);
      double id1 = std::abs(std::sqrt(p.gamma * p.gamma - p.beta) -
                            (1.0 - p.gamma));
      double f1 = std::abs(reaction(1.0, p));
      double ida = std::abs(p.alpha * (p.alpha - 1.0) - A);
      bool here = id1 <= 1e-12 && f1 <= 1e-12 && ida <= 1e-12;
      if (r < 3.0) {
        double lhs = gamma_curve_deriv(p.y_bar, p);
        double rhs = 0.5 * p.gamma * p.y_bar;
        here = here && std::abs(lhs - rhs) <= 1e-10 * (1.0 + rhs);
      }
      if (!here && ok) {
        ok = false;
        detail = "first failure at r=" + fmt(r) + ", A=" + fmt(A);
      }
    }
  }
  report(1, ok, "constant identities on the (r, A) lattice", detail);
}

// ---- C2: Theta cross-validation -----------------------------------------
void criterion2() {
  bool ok = true;
  std::string detail;
  const std::vector<double> rs{1.2, 1.5, 2.0, 2.5, 2.9};
  const std::vector<double> as{0.5, 1.0, 2.0, 4.0};
  for (double r : rs) {
    std::vector<double> theta_r_by_A;
    for (double A : as) {
      ModelParams p = make_params(r, A);
      double t_term = solve_phi_terminal(p).second.theta;
      double t_bis = compute_theta_bisection(p, 1e-8).theta;
      double rel = std::abs(t_term - t_bis) / t_term;
      if (rel > 1e-6 && ok) {
        ok = false;
        detail = "method gap " + fmt(rel) + " at r=" + fmt(r) + ", A=" + fmt(A);
      }
      theta_r_by_A.push_back(t_term / std::pow(A, p.gamma));
    }
    // scaling: Theta(r, A)/A^gamma must match Theta(r, 1)
    double ref = theta_r_by_A[1];  // A = 1
    for (std::size_t i = 0; i < as.size(); ++i) {
      double rel = std::abs(theta_r_by_A[i] - ref) / ref;
      if (rel > 1e-6 && ok) {
        ok = false;
        detail = "scaling gap " + fmt(rel) + " at r=" + fmt(r) +
                 ", A=" + fmt(as[i]);
      }
    }
  }
  report(2, ok, "Theta: terminal vs bisection and A^gamma scaling", detail);
}

// ---- C3: Theta_r trend ----------------------------------------------------
void criterion3() {
  bool ok = true;
  std::string detail;
  std::vector<double> thetas;
  for (int i = 0; i <= 18; ++i) {
    double r = 1.1 + 0.1 * i;
    ModelParams p = make_params(r, 1.0);
    thetas.push_back(solve_phi_terminal(p).second.theta_r);
  }
  for (std::size_t i = 1; i < thetas.size(); ++i) {
    if (!(thetas[i] > thetas[i - 1]) && ok) {
      ok = false;
      detail = "not increasing at r=" + fmt(1.1 + 0.1 * double(i));
    }
  }
  if (!(thetas.front() >= 1.0 && thetas.front() <= 1.5) && ok) {
    ok = false;
    detail = "Theta_r(1.1) = " + fmt(thetas.front()) + " outside [1, 1.5]";
  }
  // slope of log Theta_r against log(3 - r) near r = 3
  std::vector<double> xs, ys;
  for (int i = 0; i < 8; ++i) {
    double r = 2.6 + 0.05 * i;
    ModelParams p = make_params(r, 1.0);
    xs.push_back(std::log(3.0 - r));
    ys.push_back(std::log(solve_phi_terminal(p).second.theta_r));
  }
  FitResult f = linfit(xs, ys, -1e300, 1e300);
  if (std::abs(f.slope + 1.0) > 0.15 && ok) {
    ok = false;
    detail = "log-log slope " + fmt(f.slope) + " outside -1 +/- 0.15";
  }
  report(3, ok,
         "Theta_r increasing, left limit in [1,1.5], blow-up slope -1", detail);
}

// ---- C4: Phi sandwich -----------------------------------------------------
void criterion4() {
  ModelParams p = make_params(2.0, 1.0);
  auto [curve, term] = solve_phi_terminal(p);
  ProfileCurve full = extend_Phi(p, curve, 3.0 * p.y_bar);
  const double cap = p.A * std::pow(p.y_bar, 1.0 - p.r) / p.beta;
  bool lower_ok = true, upper_ok = true, convex_ok = true;
  double worst_upper = 0.0, worst_y = 0.0;
  double prev_d = -1e300;
  for (std::size_t i = 0; i < full.y.size(); ++i) {
    double y = full.y[i];
    if (y < p.y_bar || y > 3.0 * p.y_bar) continue;
    double lb = y * y / 4.0;
    if (full.value[i] < lb - 1e-9) lower_ok = false;
    double excess = full.value[i] - (lb + cap);
    if (excess > 0.0 && excess > worst_upper) {
      worst_upper = excess;
      worst_y = y;
    }
    if (prev_d > -1e299 && full.derivative[i] < prev_d - 1e-8) convex_ok = false;
    prev_d = full.derivative[i];
  }
  if (worst_upper > 0.0) upper_ok = false;
  bool ok = lower_ok && upper_ok && convex_ok;
  std::string detail;
  if (!upper_ok)
    detail = "upper bound exceeded by " + fmt(worst_upper) + " at y=" +
             fmt(worst_y) + " (largest near y_bar=" + fmt(p.y_bar) + ")";
  else if (!lower_ok)
    detail = "lower bound y^2/4 violated";
  else if (!convex_ok)
    detail = "derivative not monotone";
  report(4, ok, "Phi sandwich y^2/4 <= Phi <= y^2/4 + C and convexity", detail);
}

// ---- C5: traveling-wave tails --------------------------------------------
void criterion5() {
  bool ok = true;
  std::string detail;
  auto flag = [&](bool pass, const std::string& msg) {
    if (!pass) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      detail += msg;
    }
  };
  try {
    {
      ModelParams p = make_params(5.0, 1.0);
      WaveProfile prof = shoot_wave(p, 35.0, 1e-10);
      TailFit f = extract_tail_law(prof, p, 25.0, 35.0);
      flag(f.flatness <= 0.02,
           "r=5 compensated ratio varies by " + fmt(f.flatness));
    }
    {
      ModelParams p = make_params(3.0, 2.0);
      WaveProfile prof = shoot_wave(p, 35.0, 1e-10);
      TailFit f = extract_tail_law(prof, p, 25.0, 35.0);
      flag(f.flatness <= 0.02,
           "r=3 compensated ratio varies by " + fmt(f.flatness) +
               " (want <= 0.02)");
    }
    {
      ModelParams p = make_params(2.0, 1.0);
      WaveProfile prof = shoot_wave(p, 1e6, 1e-10);
      TailFit f = extract_tail_law(prof, p, 1e4, 1e6);
      flag(std::abs(f.statistic - 2.0) <= 0.1,
           "r=2 slope " + fmt(f.statistic) + " outside 2 +/- 0.1");
    }
  } catch (const std::exception& e) {
    ok = false;
    detail = e.what();
  }
  report(5, ok, "traveling-wave tail laws (r=5, r=3, r=2)", detail);
}

// ---- C6: delay laws --------------------------------------------------------
void criterion6() {
  bool ok = true;
  std::string detail;
  auto flag = [&](bool pass, const std::string& msg) {
    if (!pass) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      detail += msg;
    }
  };
  try {
    {
      ModelParams p = make_params(5.0, 1.0);
      DelayFit df = fit_delay(run_front(p, 2000.0, 0.5, 0.1), p);
      flag(std::abs(df.coefficient - 1.5) <= 0.25,
           "r=5 log coefficient " + fmt(df.coefficient) + " (want 1.5 +/- 0.25)");
      // grid-refinement sanity at a shorter horizon
      DelayFit c0 = fit_delay(run_front(p, 600.0, 0.5, 0.1), p);
      DelayFit c1 = fit_delay(run_front(p, 600.0, 0.5, 0.05), p);
      flag(std::abs(c0.coefficient - c1.coefficient) < 0.05,
           "refinement moves a by " +
               fmt(std::abs(c0.coefficient - c1.coefficient)) + " (want < 0.05)");
    }
    {
      ModelParams p = make_params(3.0, 2.0);
      DelayFit df = fit_delay(run_front(p, 2000.0, 0.5, 0.1), p);
      flag(std::abs(df.coefficient - 2.5) <= 0.35,
           "r=3 log coefficient " + fmt(df.coefficient) + " (want 2.5 +/- 0.35)");
    }
    {
      ModelParams p = make_params(2.0, 1.0);
      // subexponential tail (W ~ 2 sqrt(xi)) needs a wide window: the
      // leading edge relevant to the t^{1/3} delay outgrows the default
      // 240-wide window past t ~ 500 and inflates the fitted coefficient
      WindowPolicy wide;
      wide.x_lo = -80.0;
      wide.width = 1200.0;
      DelayFit df = fit_delay(run_front(p, 3000.0, 0.5, 0.1, wide), p);
      double theta = solve_phi_terminal(p).second.theta;
      double rel = std::abs(df.coefficient - theta) / theta;
      flag(rel <= 0.15, "r=2 power coefficient " + fmt(df.coefficient) +
                            " vs Theta " + fmt(theta) + " (rel " + fmt(rel) +
                            ", want <= 0.15)");
    }
  } catch (const std::exception& e) {
    ok = false;
    detail = e.what();
  }
  report(6, ok, "delay laws at desk scale with refinement sanity", detail);
}

// ---- C7: heat-kernel sandwich ---------------------------------------------
void criterion7() {
  bool ok = true;
  std::string detail;
  try {
    ModelParams p = make_params(2.0, 1.0);
    HeatBoundReport rep = heat_bound_check(p, {1.0, 2.0, 5.0, 10.0}, 0.1);
    double c = std::max(rep.c_lower, rep.c_upper);
    if (!(rep.ok && c <= 1e3)) {
      ok = false;
      detail = "no single C <= 1e3 (needed " + fmt(c) + ")";
    }
    // negative control: the zero field must fail the lower bound
    FieldState z;
    z.window_left = -10.0;
    z.dx = 0.1;
    z.t = 2.0;
    z.values.assign(400, 0.0);
    if (fkpp::detail::heat_lower_constant(z, 6.0 * std::sqrt(z.t)).has_value()) {
      ok = false;
      detail = "zero-field negative control passed the lower bound";
    }
  } catch (const std::exception& e) {
    ok = false;
    detail = e.what();
  }
  report(7, ok, "heat-kernel sandwich with C <= 1e3 and negative control",
         detail);
}

// ---- C8: spectral facts -----------------------------------------------------
void criterion8() {
  bool ok = true;
  std::string detail;
  for (double A : {1.0, 2.0, 4.0}) {
    double r1 = ma_residual(A, 1.0 / 200.0, 40.0);
    double r2 = ma_residual(A, 1.0 / 400.0, 40.0);
    SpectrumResult s = ma_spectrum(A, 1.0 / 200.0, 40.0, 2);
    bool here = r1 <= 1e-3 && r1 / r2 >= 3.5 && r1 / r2 <= 4.5 &&
                std::abs(s.eigenvalues[0]) <= 1e-3 &&
                s.eigenvalues[1] - s.eigenvalues[0] >= 0.9;
    if (!here && ok) {
      ok = false;
      detail = "A=" + fmt(A) + ": residual " + fmt(r1) + ", ratio " +
               fmt(r1 / r2) + ", lambda0 " + fmt(s.eigenvalues[0]) +
               ", gap " + fmt(s.eigenvalues[1] - s.eigenvalues[0]);
    }
  }
  report(8, ok, "ground-state residual, h^2 decay, lambda0 = 0, gap >= 0.9",
         detail);
}

// ---- C9: determinism --------------------------------------------------------
int run_cli(const std::string& args) {
  std::string cmd = std::string(FKPPLAB_BIN) + " " + args +
                    " >/dev/null 2>/dev/null";
  return WEXITSTATUS(std::system(cmd.c_str()));
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void criterion9() {
  bool ok = true;
  std::string detail;
  fs::path base = fs::temp_directory_path() / "fkpplab_acceptance";
  fs::remove_all(base);
  fs::create_directories(base);
  auto dir = [&](const std::string& s) { return (base / s).string(); };

  if (run_cli("theta --r-grid 1.5,2,2.5 --out " + dir("t1")) != 0 ||
      run_cli("theta --r-grid 1.5,2,2.5 --out " + dir("t2")) != 0) {
    ok = false;
    detail = "theta invocation failed";
  } else if (slurp(base / "t1/theta.csv") != slurp(base / "t2/theta.csv")) {
    ok = false;
    detail = "repeated theta runs differ";
  }
  if (ok) {
    if (run_cli("wave --r 5 --xi-end 35 --out " + dir("w1")) != 0 ||
        run_cli("wave --r 5 --xi-end 35 --out " + dir("w2")) != 0 ||
        slurp(base / "w1/wave.csv") != slurp(base / "w2/wave.csv")) {
      ok = false;
      detail = "repeated wave runs differ";
    }
  }
  if (ok) {
    std::ofstream os(base / "config.json");
    os << "{\"runs\":[{\"cmd\":\"theta\",\"r\":2.0},{\"cmd\":\"theta\",\"r\":1.5},"
          "{\"cmd\":\"theta\",\"r\":2.5},{\"cmd\":\"spectrum\",\"A\":2.0}]}";
    os.close();
    if (run_cli("sweep --config " + (base / "config.json").string() +
                " --jobs 1 --out " + dir("s1")) != 0 ||
        run_cli("sweep --config " + (base / "config.json").string() +
                " --jobs 8 --out " + dir("s2")) != 0 ||
        slurp(base / "s1/theta.csv") != slurp(base / "s2/theta.csv")) {
      ok = false;
      detail = "sweep --jobs 1 vs --jobs 8 differ";
    }
  }
  report(9, ok, "byte-identical CSVs across repeats and job counts", detail);
}

}  // namespace

int main() {
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  if (g_failures > 0)
    std::printf("%d criterion(s) failed\n", g_failures);
  else
    std::printf("all criteria passed\n");
  return g_failures == 0 ? 0 : 1;
}
