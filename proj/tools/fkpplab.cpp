// fkpplab: command-line driver exposing the wave, theta, front, spectrum,
// and sweep workflows with manifest-stamped, reproducible outputs.
//
// Exit codes: 0 success, 1 usage/validation error, 2 numerical failure.

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fkpp/io.hpp"
#include "fkpp/model.hpp"
#include "fkpp/pde.hpp"
#include "fkpp/profile.hpp"
#include "fkpp/spectrum.hpp"
#include "fkpp/wave.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void fail(int code, const std::string& kind, const std::string& msg) {
  std::cerr << "error[" << kind << "]: " << msg << "\n";
  std::exit(code);
}

json params_json(const fkpp::ModelParams& p) {
  using fkpp::fmt_g15;
  return json{{"r", fmt_g15(p.r)},        {"A", fmt_g15(p.A)},
              {"nu", fmt_g15(p.nu)},      {"gamma", fmt_g15(p.gamma)},
              {"beta", fmt_g15(p.beta)},  {"alpha", fmt_g15(p.alpha)},
              {"s_a", fmt_g15(p.s_a)},    {"y_bar", fmt_g15(p.y_bar)}};
}

// Grid spec: a single value, a comma list, or "start:stop:step" (inclusive).
std::vector<double> parse_grid(const std::string& spec) {
  std::vector<double> grid;
  if (spec.empty()) return grid;
  if (spec.find(':') != std::string::npos) {
    double a, b, s;
    char c1, c2;
    std::istringstream is(spec);
    if (!(is >> a >> c1 >> b >> c2 >> s) || c1 != ':' || c2 != ':' || s <= 0)
      throw std::invalid_argument("bad grid spec '" + spec + "' (want start:stop:step)");
    long n = std::lround((b - a) / s);
    for (long i = 0; i <= n; ++i) grid.push_back(a + double(i) * s);
  } else {
    std::istringstream is(spec);
    std::string tok;
    while (std::getline(is, tok, ',')) grid.push_back(std::stod(tok));
  }
  return grid;
}

struct WaveArgs {
  double r = 2.0, A = 1.0, xi_end = 0.0, tol = 1e-10;
  std::string out = ".";
};

int run_wave(const WaveArgs& a) {
  std::string started = fkpp::iso_timestamp();
  fkpp::ModelParams p = fkpp::make_params(a.r, a.A);
  double xi_end = a.xi_end > 0 ? a.xi_end : (p.r < 3.0 ? 1e6 : 35.0);

  fkpp::WaveProfile prof = fkpp::shoot_wave(p, xi_end, a.tol);
  std::optional<double> lo, hi;
  if (p.r < 3.0) {
    lo = 1e4;
    hi = 1e6;
    if (xi_end < 1e6) { lo = xi_end / 100.0; hi = xi_end; }
  }
  fkpp::TailFit tf = fkpp::extract_tail_law(prof, p, lo, hi);

  fs::create_directories(a.out);
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < prof.xi.size(); ++i)
    rows.push_back({fkpp::fmt_g15(prof.xi[i]), fkpp::fmt_g15(prof.U[i]),
                    fkpp::fmt_g15(prof.Q[i]), fkpp::fmt_g15(prof.W[i])});
  fkpp::write_csv(fs::path(a.out) / "wave.csv", {"xi", "U", "Q", "W"}, rows);

  json tfj{{"regime", p.r > 3 ? "r>3" : (p.r == 3 ? "r=3" : "r in (1,3)")},
           {"statistic", tf.statistic},
           {"window", {tf.window_lo, tf.window_hi}},
           {"flatness", tf.flatness}};
  {
    std::ofstream os(fs::path(a.out) / "tailfit.json");
    os << tfj.dump(2) << "\n";
  }

  json params = params_json(p);
  params["xi_end"] = fkpp::fmt_g15(xi_end);
  params["tol"] = fkpp::fmt_g15(a.tol);
  json m = fkpp::make_manifest("wave", params, started);
  m["outputs"] = {"wave.csv", "tailfit.json"};
  fkpp::write_manifest(fs::path(a.out) / "manifest.json", m);

  std::cout << "tail statistic = " << fkpp::fmt_g15(tf.statistic)
            << " (flatness " << fkpp::fmt_g15(tf.flatness) << ")\n";
  return 0;
}

struct ThetaArgs {
  std::string r_grid;
  double A = 1.0, tol = 1e-10;
  std::string out = ".";
};

std::vector<std::vector<std::string>> theta_rows(
    const std::vector<fkpp::SweepRow>& rows) {
  std::vector<std::vector<std::string>> out;
  for (const auto& row : rows) {
    if (!row.ok) continue;
    out.push_back({fkpp::fmt_g15(row.r), fkpp::fmt_g15(row.A),
                   fkpp::fmt_g15(row.theta), fkpp::fmt_g15(row.theta_r),
                   fkpp::fmt_g15(row.ybar), fkpp::fmt_g15(row.method_residual)});
  }
  return out;
}

int run_theta(const ThetaArgs& a) {
  std::string started = fkpp::iso_timestamp();
  std::vector<double> grid = parse_grid(a.r_grid);
  if (grid.empty()) throw std::invalid_argument("theta: empty r grid");

  auto rows = fkpp::theta_sweep(grid, a.A, a.tol);
  std::size_t ok = 0;
  json warnings = json::array();
  for (const auto& row : rows) {
    if (row.ok)
      ++ok;
    else
      warnings.push_back("r=" + fkpp::fmt_g15(row.r) + ": " + row.error);
  }

  fs::create_directories(a.out);
  fkpp::write_csv(fs::path(a.out) / "theta.csv",
                  {"r", "A", "theta", "theta_r", "ybar", "method_residual"},
                  theta_rows(rows));
  json params{{"r_grid", a.r_grid},
              {"A", fkpp::fmt_g15(a.A)},
              {"tol", fkpp::fmt_g15(a.tol)}};
  json m = fkpp::make_manifest("theta", params, started);
  m["outputs"] = {"theta.csv"};
  m["warnings"] = warnings;
  fkpp::write_manifest(fs::path(a.out) / "manifest.json", m);

  if (ok == 0) throw std::runtime_error("theta: every grid point failed");
  return 0;
}

struct FrontArgs {
  double r = 2.0, A = 1.0, t_end = 1000.0, dx = 0.1, lambda = 0.5;
  std::string out = ".";
};

int run_front_cmd(const FrontArgs& a) {
  std::string started = fkpp::iso_timestamp();
  fkpp::ModelParams p = fkpp::make_params(a.r, a.A);
  if (!(a.dx > 0.0)) throw std::invalid_argument("front: dx must be positive");

  fkpp::FrontTrace trace = fkpp::run_front(p, a.t_end, a.lambda, a.dx);
  fkpp::DelayFit df = fkpp::fit_delay(trace, p);

  fs::create_directories(a.out);
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < trace.times.size(); ++i)
    rows.push_back({fkpp::fmt_g15(trace.times[i]),
                    fkpp::fmt_g15(trace.positions[i]),
                    fkpp::fmt_g15(trace.delays[i])});
  fkpp::write_csv(fs::path(a.out) / "trace.csv", {"t", "X", "delay"}, rows);

  json dfj{{"model", df.log_model ? "a*ln(t)+b" : "Theta*t^beta+b"},
           {"coefficient", df.coefficient},
           {"intercept", df.intercept},
           {"rms", df.rms},
           {"window", {df.window_lo, df.window_hi}}};
  {
    std::ofstream os(fs::path(a.out) / "delayfit.json");
    os << dfj.dump(2) << "\n";
  }

  json params = params_json(p);
  params["t_end"] = fkpp::fmt_g15(a.t_end);
  params["dx"] = fkpp::fmt_g15(a.dx);
  params["dt"] = fkpp::fmt_g15(0.4 * a.dx * a.dx);
  params["lambda"] = fkpp::fmt_g15(a.lambda);
  json m = fkpp::make_manifest("front", params, started);
  m["outputs"] = {"trace.csv", "delayfit.json"};
  fkpp::write_manifest(fs::path(a.out) / "manifest.json", m);

  std::cout << "delay coefficient = " << fkpp::fmt_g15(df.coefficient) << "\n";
  return 0;
}

struct SpectrumArgs {
  double A = 2.0, h = 1.0 / 200.0, L = 40.0;
  int k = 5;
  std::string out = ".";
};

int run_spectrum(const SpectrumArgs& a) {
  std::string started = fkpp::iso_timestamp();
  if (a.k < 1) throw std::invalid_argument("spectrum: k must be >= 1");
  fkpp::SpectrumResult res = fkpp::ma_spectrum(a.A, a.h, a.L, a.k);

  fs::create_directories(a.out);
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < res.eigenvalues.size(); ++i)
    rows.push_back({std::to_string(i), fkpp::fmt_g15(res.eigenvalues[i])});
  fkpp::write_csv(fs::path(a.out) / "spectrum.csv", {"n", "lambda"}, rows);

  json params{{"A", fkpp::fmt_g15(a.A)},
              {"h", fkpp::fmt_g15(a.h)},
              {"L", fkpp::fmt_g15(a.L)},
              {"k", a.k}};
  json m = fkpp::make_manifest("spectrum", params, started);
  m["outputs"] = {"spectrum.csv"};
  m["q_residual"] = res.q_residual;
  fkpp::write_manifest(fs::path(a.out) / "manifest.json", m);

  std::cout << "lambda_0 = " << fkpp::fmt_g15(res.eigenvalues[0])
            << ", q_residual = " << fkpp::fmt_g15(res.q_residual) << "\n";
  return 0;
}

struct SweepArgs {
  std::string config;
  int jobs = 1;
  std::string out = ".";
};

int run_sweep(const SweepArgs& a) {
  std::string started = fkpp::iso_timestamp();
  json cfg;
  {
    std::ifstream is(a.config);
    if (!is) throw std::invalid_argument("sweep: cannot open config " + a.config);
    try {
      cfg = json::parse(is);
    } catch (const json::parse_error& e) {
      throw std::invalid_argument(std::string("sweep: malformed config: ") + e.what());
    }
  }
  if (!cfg.contains("runs") || !cfg["runs"].is_array() || cfg["runs"].empty())
    throw std::invalid_argument("sweep: config must contain a non-empty 'runs' array");
  if (a.jobs < 1) throw std::invalid_argument("sweep: jobs must be >= 1");

  const auto& runs = cfg["runs"];
  // validate up front so a malformed entry is a usage error, not a partial run
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (!runs[i].is_object() || !runs[i].contains("cmd"))
      throw std::invalid_argument("sweep: runs[" + std::to_string(i) +
                                  "] missing field 'cmd'");
  }

  fs::create_directories(a.out);
  std::vector<std::string> statuses(runs.size(), "ok");
  std::atomic<std::size_t> next{0};
  std::mutex mu;

  auto worker = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= runs.size()) return;
      const json& run = runs[i];
      char sub[32];
      std::snprintf(sub, sizeof(sub), "run_%03zu", i);
      std::string dir = (fs::path(a.out) / sub).string();
      try {
        std::string cmd = run.at("cmd").get<std::string>();
        if (cmd == "theta") {
          ThetaArgs ta;
          ta.r_grid = run.value("r_grid", std::string());
          if (run.contains("r")) ta.r_grid = fkpp::fmt_g15(run["r"].get<double>());
          ta.A = run.value("A", 1.0);
          ta.tol = run.value("tol", 1e-10);
          ta.out = dir;
          run_theta(ta);
        } else if (cmd == "wave") {
          WaveArgs wa;
          wa.r = run.at("r").get<double>();
          wa.A = run.value("A", 1.0);
          wa.xi_end = run.value("xi_end", 0.0);
          wa.tol = run.value("tol", 1e-10);
          wa.out = dir;
          run_wave(wa);
        } else if (cmd == "front") {
          FrontArgs fa;
          fa.r = run.at("r").get<double>();
          fa.A = run.value("A", 1.0);
          fa.t_end = run.value("t_end", 1000.0);
          fa.dx = run.value("dx", 0.1);
          fa.lambda = run.value("lambda", 0.5);
          fa.out = dir;
          run_front_cmd(fa);
        } else if (cmd == "spectrum") {
          SpectrumArgs sa;
          sa.A = run.value("A", 2.0);
          sa.h = run.value("h", 1.0 / 200.0);
          sa.L = run.value("L", 40.0);
          sa.k = run.value("k", 5);
          sa.out = dir;
          run_spectrum(sa);
        } else {
          throw std::invalid_argument("unknown cmd '" + cmd + "'");
        }
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lk(mu);
        statuses[i] = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int j = 0; j < std::min<int>(a.jobs, int(runs.size())); ++j)
    pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  // merge theta outputs, sorted by (r, A)
  std::vector<std::array<std::string, 6>> merged;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (statuses[i] != "ok" || runs[i]["cmd"] != "theta") continue;
    char sub[32];
    std::snprintf(sub, sizeof(sub), "run_%03zu", i);
    std::ifstream is(fs::path(a.out) / sub / "theta.csv");
    std::string line;
    std::getline(is, line);  // header
    while (std::getline(is, line)) {
      std::istringstream ls(line);
      std::array<std::string, 6> row;
      for (auto& cell : row) std::getline(ls, cell, ',');
      merged.push_back(row);
    }
  }
  std::sort(merged.begin(), merged.end(),
            [](const auto& x, const auto& y) {
              double rx = std::stod(x[0]), ry = std::stod(y[0]);
              double ax = std::stod(x[1]), ay = std::stod(y[1]);
              return rx < ry || (rx == ry && ax < ay);
            });
  if (!merged.empty()) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& row : merged)
      rows.emplace_back(row.begin(), row.end());
    fkpp::write_csv(fs::path(a.out) / "theta.csv",
                    {"r", "A", "theta", "theta_r", "ybar", "method_residual"},
                    rows);
  }

  std::size_t ok = 0;
  json warnings = json::array();
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (statuses[i] == "ok")
      ++ok;
    else
      warnings.push_back("runs[" + std::to_string(i) + "]: " + statuses[i]);
  }
  json params{{"config", a.config}, {"jobs", a.jobs}, {"n_runs", runs.size()}};
  json m = fkpp::make_manifest("sweep", params, started);
  json outs = json::array();
  if (!merged.empty()) outs.push_back("theta.csv");
  for (std::size_t i = 0; i < runs.size(); ++i) {
    char sub[32];
    std::snprintf(sub, sizeof(sub), "run_%03zu", i);
    outs.push_back(std::string(sub) + "/");
  }
  m["outputs"] = outs;
  m["warnings"] = warnings;
  fkpp::write_manifest(fs::path(a.out) / "manifest.json", m);

  if (ok == 0) throw std::runtime_error("sweep: every run failed");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical laboratory for a Fisher-KPP equation with a log-singular reaction"};
  app.require_subcommand(1);

  WaveArgs wa;
  auto* wave = app.add_subcommand("wave", "traveling-wave profile and tail law");
  wave->add_option("--r", wa.r, "singularity exponent r > 1")->required();
  wave->add_option("--A", wa.A, "amplitude A > 0");
  wave->add_option("--xi-end", wa.xi_end, "integration endpoint (default per regime)");
  wave->add_option("--tol", wa.tol, "integrator tolerance");
  wave->add_option("--out", wa.out, "output directory");

  ThetaArgs ta;
  auto* theta = app.add_subcommand("theta", "critical constant Theta over an r grid");
  theta->add_option("--r-grid", ta.r_grid, "grid spec: value, list, or start:stop:step")
      ->required();
  theta->add_option("--A", ta.A, "amplitude A > 0");
  theta->add_option("--tol", ta.tol, "bisection bracket tolerance");
  theta->add_option("--out", ta.out, "output directory");

  FrontArgs fa;
  auto* front = app.add_subcommand("front", "Cauchy-problem front tracking and delay fit");
  front->add_option("--r", fa.r, "singularity exponent r > 1")->required();
  front->add_option("--A", fa.A, "amplitude A > 0");
  front->add_option("--t-end", fa.t_end, "final time");
  front->add_option("--dx", fa.dx, "grid spacing");
  front->add_option("--lambda", fa.lambda, "tracked level in (0,1)");
  front->add_option("--out", fa.out, "output directory");

  SpectrumArgs sa;
  auto* spec = app.add_subcommand("spectrum", "eigenvalues of the discretized operator");
  spec->set_help_flag("--help", "print help");  // frees -h for the grid spacing
  spec->add_option("--A", sa.A, "amplitude A > 0");
  spec->add_option("--h", sa.h, "grid spacing");
  spec->add_option("--L", sa.L, "domain length");
  spec->add_option("--k", sa.k, "number of eigenvalues");
  spec->add_option("--out", sa.out, "output directory");

  SweepArgs swa;
  auto* sweep = app.add_subcommand("sweep", "batch driver over a JSON config");
  sweep->add_option("--config", swa.config, "JSON config with a 'runs' array")->required();
  sweep->add_option("--jobs", swa.jobs, "parallel workers");
  sweep->add_option("--out", swa.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*wave) return run_wave(wa);
    if (*theta) return run_theta(ta);
    if (*front) return run_front_cmd(fa);
    if (*spec) return run_spectrum(sa);
    if (*sweep) return run_sweep(swa);
  } catch (const std::invalid_argument& e) {
    fail(1, "usage", e.what());
  } catch (const std::exception& e) {
    fail(2, "numerical", e.what());
  }
  return 1;
}
