// ordpat: Hurst estimation from ordinal patterns and the reproduction runs.
//
// Exit codes: 0 success, 2 input error, 3 numerical failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "ordpat/ordpat.hpp"

namespace {

using namespace ordpat;

constexpr int kInputErrorExit = 2;
constexpr int kNumericalErrorExit = 3;

struct Settings {
  int quadrature_nodes = QuadratureConfig{}.nodes;
  int taylor_order = VarianceApproxConfig{}.m;
  std::uint64_t n_tilde_cap = VarianceApproxConfig{}.n_tilde_cap;
  double grid_step = 0.001;
  double figure1_step = 0.01;
  unsigned workers = 0;

  QuadratureConfig quad() const {
    QuadratureConfig q;
    q.nodes = quadrature_nodes;
    q.validate();
    return q;
  }

  VarianceApproxConfig approx() const {
    VarianceApproxConfig a;
    a.m = taylor_order;
    a.n_tilde_cap = n_tilde_cap;
    a.validate();
    return a;
  }
};

std::vector<double> read_series(const std::string& path) {
  std::ifstream file;
  std::istream* in = &std::cin;
  if (path != "-") {
    file.open(path);
    if (!file) throw InputError("cannot open " + path);
    in = &file;
  }
  std::vector<double> x;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(*in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    const char* begin = line.data() + first;
    const char* end = line.data() + last + 1;
    if (*begin == '+') ++begin;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc() || ptr != end) {
      throw InputError(path + ":" + std::to_string(lineno) + ": not a number: " + line);
    }
    x.push_back(v);
  }
  return x;
}

nlohmann::json to_json(const EstimateReport& r) {
  auto opt = [](const std::optional<double>& v) -> nlohmann::json {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  return {{"method", to_string(r.method)},
          {"h_hat", r.h_hat},
          {"statistic", r.statistic},
          {"n", r.n},
          {"ci_low", opt(r.ci_low)},
          {"ci_high", opt(r.ci_high)},
          {"s_n", opt(r.s_n)},
          {"asymptotic_bias", opt(r.asymptotic_bias)},
          {"asymptotic_variance", opt(r.asymptotic_variance)},
          {"degenerate", r.degenerate}};
}

void print_report(std::ostream& out, const EstimateReport& r) {
  out << "method " << to_string(r.method) << '\n'
      << "h_hat " << format_double(r.h_hat) << '\n'
      << (r.method == Method::kZc ? "c_hat " : "rho_hat ") << format_double(r.statistic) << '\n'
      << "n " << r.n << '\n';
  if (r.ci_low) {
    out << "ci " << format_double(*r.ci_low) << ' ' << format_double(*r.ci_high) << '\n'
        << "s_n " << format_double(*r.s_n) << '\n'
        << "asymptotic_bias " << format_double(*r.asymptotic_bias) << '\n'
        << "asymptotic_variance " << format_double(*r.asymptotic_variance) << '\n';
  }
  if (r.degenerate) out << "degenerate true\n";
}

// Writes to `path`, or to stdout when empty.
template <class Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path.empty()) {
    fn(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  fn(out);
}

std::vector<double> study_hurst() { return {0.55, 0.65, 0.75, 0.85, 0.95}; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hurst parameter estimation from ordinal patterns of fBm"};
  app.set_help_flag("--help", "print help and exit");  // -h would clash with --h
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "key = value file with default settings");

  Settings st;
  app.add_option("--quadrature-nodes", st.quadrature_nodes, "Gauss-Legendre nodes")
      ->capture_default_str();
  app.add_option("--taylor-order", st.taylor_order, "Taylor order m (1..3)")
      ->capture_default_str();
  app.add_option("--n-tilde-cap", st.n_tilde_cap, "cap on the exact-lag range")
      ->capture_default_str();
  app.add_option("--grid-step", st.grid_step, "H step of the variance grid in campaigns")
      ->capture_default_str();
  app.add_option("--figure1-step", st.figure1_step, "abscissa step of figure1")
      ->capture_default_str();
  app.add_option("--workers", st.workers, "worker threads (0 = all cores)")
      ->capture_default_str();

  auto* est = app.add_subcommand("estimate", "estimate H from a series, one value per line");
  std::string est_file;
  std::string est_method = "zc";
  bool est_json = false;
  est->add_option("file", est_file, "input file, - for stdin")->required();
  est->add_option("--method", est_method)
      ->check(CLI::IsMember({"zc", "heaf"}))
      ->capture_default_str();
  est->add_flag("--json", est_json, "print a JSON object");

  auto* vt = app.add_subcommand("variance-table", "Var_H(c_hat_n) and the delta-method moments");
  std::vector<double> vt_h;
  std::vector<std::uint64_t> vt_n;
  bool vt_exact = false;
  std::string vt_out;
  vt->add_option("--h", vt_h, "Hurst values")->required()->delimiter(',');
  vt->add_option("--n", vt_n, "window counts")->required()->delimiter(',');
  vt->add_flag("--exact", vt_exact, "add the all-quadrature variance column");
  vt->add_option("--out", vt_out, "output CSV (default stdout)");

  auto* t1 = app.add_subcommand("table1", "threshold lags of the order-3 Taylor approximation");
  std::vector<double> t1_eps{0.01, 0.001};
  std::vector<double> t1_h = default_table1_hurst_grid();
  std::uint64_t t1_cap = kDefaultThresholdCap;
  std::string t1_out;
  t1->add_option("--eps", t1_eps)->delimiter(',')->capture_default_str();
  t1->add_option("--h", t1_h)->delimiter(',');
  t1->add_option("--cap", t1_cap)->capture_default_str();
  t1->add_option("--out", t1_out, "output CSV (default stdout)");

  auto* f1 = app.add_subcommand("figure1", "confidence interval, bias and variance against H_hat");
  std::vector<std::uint64_t> f1_n{128, 1024, 8192};
  std::string f1_out;
  f1->add_option("--n", f1_n)->delimiter(',')->capture_default_str();
  f1->add_option("--out", f1_out, "output CSV (default stdout)");

  auto* f3 = app.add_subcommand("figure3", "standardized ZC estimates with KS diagnostics");
  std::vector<double> f3_h{0.55, 0.75, 0.95};
  std::uint64_t f3_n = 8192;
  std::uint64_t f3_reps = 5000;
  std::uint64_t f3_seed = 1;
  std::string f3_out;
  f3->add_option("--h", f3_h)->delimiter(',')->capture_default_str();
  f3->add_option("--n", f3_n)->capture_default_str();
  f3->add_option("--replications", f3_reps)->capture_default_str();
  f3->add_option("--seed", f3_seed)->capture_default_str();
  f3->add_option("--out", f3_out, "output CSV (default stdout)");

  auto* rep = app.add_subcommand("reproduce", "write table1.csv, table2.csv or table3.csv");
  int rep_table = 2;
  std::uint64_t rep_reps = 5000;
  std::uint64_t rep_seed = 1;
  std::string rep_dir = ".";
  rep->add_option("--table", rep_table)->required()->check(CLI::Range(1, 3));
  rep->add_option("--replications", rep_reps)->capture_default_str();
  rep->add_option("--seed", rep_seed)->capture_default_str();
  rep->add_option("--out", rep_dir, "output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kInputErrorExit;
  }

  try {
    const auto quad = st.quad();
    const auto approx = st.approx();

    if (*est) {
      const auto x = read_series(est_file);
      const EstimateReport r =
          est_method == "zc" ? zc_estimate(x, ApproxVariance{approx, quad}) : heaf_estimate(x);
      if (est_json) {
        std::cout << to_json(r).dump(2) << '\n';
      } else {
        print_report(std::cout, r);
      }
    } else if (*vt) {
      std::vector<std::vector<std::string>> rows;
      for (double hv : vt_h) {
        const HurstParam h(hv);
        ChangeCovariance cov(h, quad);
        for (auto n : vt_n) {
          const double v = var_c_approx(cov, n, approx);
          rows.push_back({format_double(hv), std::to_string(n),
                          std::to_string(n_tilde(cov, n, approx)), format_double(v),
                          vt_exact ? format_double(var_c_exact(cov, n)) : std::string{},
                          format_double(asymptotic_expectation(h, v)),
                          format_double(asymptotic_variance(h, v))});
        }
      }
      with_output(vt_out, [&](std::ostream& out) {
        CsvWriter csv(out, {"hurst", "n", "n_tilde", "var_c_approx", "var_c_exact",
                            "asymptotic_expectation", "asymptotic_variance"});
        for (const auto& r : rows) csv.write_row(r);
      });
    } else if (*t1) {
      const auto cells = table1(t1_eps, t1_h, quad, t1_cap, st.workers);
      with_output(t1_out, [&](std::ostream& out) { write_table1_csv(out, cells); });
    } else if (*f1) {
      const auto rows = figure1_data(f1_n, st.figure1_step, approx, quad, st.workers);
      with_output(f1_out, [&](std::ostream& out) { write_figure1_csv(out, rows); });
    } else if (*f3) {
      const auto samples = figure3_data(f3_h, f3_n, f3_reps, f3_seed, st.workers);
      for (const auto& s : samples) {
        std::cerr << "H=" << format_double(s.hurst) << " KS D=" << format_double(s.ks.statistic)
                  << " p=" << format_double(s.ks.p_value) << '\n';
      }
      with_output(f3_out, [&](std::ostream& out) { write_figure3_csv(out, samples); });
    } else if (*rep) {
      std::filesystem::create_directories(rep_dir);
      const auto dir = std::filesystem::path(rep_dir);
      if (rep_table == 1) {
        const auto cells = table1({0.01, 0.001}, default_table1_hurst_grid(), quad,
                                  kDefaultThresholdCap, st.workers);
        with_output((dir / "table1.csv").string(),
                    [&](std::ostream& out) { write_table1_csv(out, cells); });
      } else {
        CampaignSpec spec;
        spec.hurst_grid = study_hurst();
        spec.lengths = {128, 1024, 8192};
        spec.replications = rep_reps;
        spec.base_seed = rep_seed;
        spec.estimators = {rep_table == 2 ? Method::kZc : Method::kHeaf};
        spec.workers = st.workers;
        spec.grid_step = st.grid_step;
        spec.approx = approx;
        spec.quad = quad;
        const auto res = run_campaign(spec);
        const auto name = rep_table == 2 ? "table2.csv" : "table3.csv";
        with_output((dir / name).string(),
                    [&](std::ostream& out) { write_campaign_csv(out, res); });
        std::cerr << "wall time " << res.wall_time << " s\n";
      }
    }
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputErrorExit;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalErrorExit;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputErrorExit;
  }
  return 0;
}
