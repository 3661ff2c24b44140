// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "support.hpp"

using namespace rigidity;
namespace fs = std::filesystem;

namespace {

struct Check {
  std::string name;
  bool ok;
  std::string detail;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

bool report(int id, const std::string& title, const std::vector<Check>& checks) {
  bool all = true;
  std::string failed;
  std::string notes;
  for (const auto& c : checks) {
    all = all && c.ok;
    if (!c.ok) failed += (failed.empty() ? "" : "; ") + c.name + " (" + c.detail + ")";
    else if (!c.detail.empty()) notes += (notes.empty() ? "" : "; ") + c.name + " " + c.detail;
  }
  std::printf("criterion %d %s: %s", id, all ? "PASS" : "FAIL", title.c_str());
  if (!all) std::printf(" | failed: %s", failed.c_str());
  if (!notes.empty()) std::printf(" | %s", notes.c_str());
  std::printf("\n");
  std::fflush(stdout);
  return all;
}

template <class F>
Check guarded(const std::string& name, F&& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    return {name, false, std::string("threw: ") + e.what()};
  }
}

FitOptions fit_for(const Framework& f, Measure m = Measure::squared) {
  FitOptions o;
  o.noise_floor = noise_floor_for(f.rest());
  o.measure = m;
  return o;
}

// ---------------------------------------------------------------------------

bool criterion1() {
  std::mt19937_64 rng(1001);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int d = trial % 2 ? 3 : 2;
    const int n = d + 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(10 - d));
    const auto f = testing_support::random_framework(rng, d, n, 4);
    const Configuration x(f.rest().values() + testing_support::random_vector(rng, f.free_coordinate_count(), 0.1));
    const Matrix r = rigidity_matrix(f, x);
    // Central differences: D is quadratic, so only rounding remains.
    const double eps = 1e-6;
    Matrix fd(r.rows(), r.cols());
    for (Eigen::Index c = 0; c < r.cols(); ++c) {
      Vector p = x.values(), m = x.values();
      p(c) += eps;
      m(c) -= eps;
      fd.col(c) = (squared_elongation(f, Configuration(p)).squared - squared_elongation(f, Configuration(m)).squared) / (2 * eps);
    }
    worst = std::max(worst, (fd - r).norm() / r.norm());
  }
  return report(1, "rigidity matrix matches finite differences on 50 random frameworks",
                {{"max relative error", worst <= 1e-5, fmt(worst) + " <= 1e-5"}});
}

bool criterion2() {
  std::vector<Check> checks;
  checks.push_back(guarded("triangle", [] {
    const auto v = classic_order_test(make_triangle(), make_triangle().rest(), 1);
    return Check{"triangle", v.kind == Verdict::rigid, std::string("order 1 ") + to_string(v.kind)};
  }));
  checks.push_back(guarded("chain", [] {
    const auto f = make_collinear_chain();
    const auto v1 = classic_order_test(f, f.rest(), 1);
    const auto v2 = classic_order_test(f, f.rest(), 2);
    const bool ok = v1.kind == Verdict::flexible && v2.kind == Verdict::rigid && v2.obstruction > 0 && !v2.detail.empty();
    return Check{"chain", ok, std::string("order 1 ") + to_string(v1.kind) + ", order 2 " + to_string(v2.kind) +
                                  " obstruction " + fmt(v2.obstruction)};
  }));
  checks.push_back(guarded("four-bar", [] {
    const auto f = make_fourbar();
    const auto v = classic_order_test(f, f.rest(), 1);
    const auto r = trace_mechanism(f, f.rest(), first_order_flex_basis(f, f.rest()).front(), 1e-2, 100);
    const double res = r.path.max_abs_squared();
    return Check{"four-bar", v.kind == Verdict::flexible && !r.truncated && res <= 1e-10,
                 std::string(to_string(v.kind)) + ", trace residual " + fmt(res)};
  }));
  return report(2, "classic tests on triangle, collinear chain and four-bar", checks);
}

bool criterion3() {
  std::vector<Check> checks;
  const auto f = make_double_watt();
  checks.push_back(guarded("flex space 1-D", [&] {
    const auto dim = first_order_flex_basis(f, f.rest()).size();
    return Check{"flex space 1-D", dim == 1, "dimension " + std::to_string(dim)};
  }));
  checks.push_back(guarded("n=3 rigid", [&] {
    const auto v = classic_order_test(f, f.rest(), 3);
    return Check{"n=3 rigid", v.kind == Verdict::rigid, to_string(v.kind)};
  }));
  std::vector<double> gaps;
  checks.push_back(guarded("relations", [&] {
    double worst = 0.0;
    bool ok = true;
    for (int branch : {1, -1}) {
      const auto sol = solve_cusp_flexes(f, -0.5, branch);
      const auto rep = verify_watt_relations(f, sol);
      ok = ok && rep.ok;
      worst = std::max({worst, rep.max_relation, rep.max_level});
      gaps.push_back(sol.right.b1 - sol.left.b1);
    }
    return Check{"relations", ok && worst <= 1e-8, "max residual " + fmt(worst)};
  }));
  checks.push_back(guarded("L=1 constant 9", [] {
    const auto g = make_double_watt(1.0);
    const double a = -0.5;
    const auto sol = solve_cusp_flexes(g, a, 1);
    const double k = std::pow(sol.right.b1 - sol.left.b1, 2) / (-sol.bar_length * a * a * a);
    return Check{"L=1 constant 9", std::abs(k - 9.0) <= 1e-12 && verify_watt_relations(g, sol).ok, "constant " + fmt(k)};
  }));
  checks.push_back(guarded("a >= 0 rejected", [&] {
    try {
      solve_cusp_flexes(f, 0.5, 1);
    } catch (const InfeasibleFlex&) {
      return Check{"a >= 0 rejected", true, ""};
    }
    return Check{"a >= 0 rejected", false, "accepted a = 0.5"};
  }));
  checks.push_back(guarded("branches", [&] {
    const bool opposite = gaps.size() == 2 && gaps[0] * gaps[1] < 0;
    const auto branches = trace_branches(f, f.rest(), 1e-2, 100);
    double worst = 0.0;
    bool complete = branches.size() == 2;
    for (const auto& b : branches) {
      complete = complete && !b.result.truncated;
      worst = std::max(worst, b.result.path.max_abs_squared());
    }
    return Check{"branches", opposite && complete && worst <= 1e-10,
                 std::to_string(branches.size()) + " traced, max |D| " + fmt(worst)};
  }));
  return report(3, "double-Watt cusp reconstruction", checks);
}

bool criterion4() {
  std::vector<Check> checks;
  std::vector<OrderEstimate> all;

  checks.push_back(guarded("(a) flex slopes", [&] {
    const std::pair<const char*, Framework> fixtures[] = {
        {"chain", make_collinear_chain()}, {"four-bar", make_fourbar()}, {"double-Watt", make_double_watt()}};
    double margin = std::numeric_limits<double>::infinity();
    int counted = 0;
    for (const auto& [name, f] : fixtures) {
      const FlexContext ctx(f, f.rest());
      for (int n = 1; n <= 6; ++n) {
        const auto v = classic_order_test(ctx, n);
        if (!v.witness || v.witness->derivative(1).isZero(0.0)) continue;
        const auto est = fit_order(elongation_profile(sample_polynomial_path(f, f.rest(), *v.witness, 1e-4, 1e-2)), fit_for(f));
        all.push_back(est);
        ++counted;
        if (!est.floor_hit) margin = std::min(margin, est.slope - n);
      }
    }
    return Check{"(a) flex slopes", counted > 0 && margin >= 0.8,
                 std::to_string(counted) + " flexes, min alpha - n " + fmt(margin)};
  }));

  checks.push_back(guarded("(b) chain", [&] {
    const auto f = make_collinear_chain();
    std::mt19937_64 rng(1004);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<Vector> levels;
      if (trial % 4 == 3) {  // cusp-like: X1 = 0
        levels = {Vector::Zero(2), testing_support::random_vector(rng, 2), testing_support::random_vector(rng, 2)};
      } else {
        Vector x1 = testing_support::random_vector(rng, 2);
        if (trial % 2) x1(0) = 0.0;  // along the first-order flex
        levels = {x1, testing_support::random_vector(rng, 2), testing_support::random_vector(rng, 2)};
      }
      const FlexSequence flex(levels);
      const auto est = fit_order(elongation_profile(sample_polynomial_path(f, f.rest(), flex, 1e-5, 1e-1)), fit_for(f));
      all.push_back(est);
      worst = std::max(worst, est.floor_hit ? std::numeric_limits<double>::infinity() : est.slope);
    }
    const auto straight = fit_order(
        elongation_profile(sample_polynomial_path(f, f.rest(), FlexSequence(std::vector<Vector>{Eigen::Vector2d(0, 1)}))),
        fit_for(f));
    all.push_back(straight);
    const bool ok = worst <= 2.1 && !straight.floor_hit && std::abs(straight.slope - 2.0) <= 0.05 &&
                    classify(straight, 1) == Classification::witnesses_flexibility;
    return Check{"(b) chain", ok, "max random alpha " + fmt(worst) + ", straight alpha " + fmt(straight.slope)};
  }));

  checks.push_back(guarded("(d) mechanisms", [&] {
    bool ok = true;
    int paths = 0;
    const auto four = make_fourbar();
    const auto watt = make_double_watt();
    std::vector<std::pair<const Framework*, TraceResult>> traces;
    traces.emplace_back(&four, trace_mechanism(four, four.rest(), first_order_flex_basis(four, four.rest()).front(), 1e-2, 100));
    for (auto& b : trace_branches(watt, watt.rest(), 1e-2, 100)) traces.emplace_back(&watt, std::move(b.result));
    for (const auto& [f, r] : traces) {
      const auto est = fit_order(elongation_profile(r.path), fit_for(*f));
      all.push_back(est);
      ++paths;
      ok = ok && est.floor_hit;
      for (int n = 1; n <= 6; ++n) ok = ok && classify(est, n) == Classification::witnesses_flexibility;
    }
    return Check{"(d) mechanisms", ok && paths == 3, std::to_string(paths) + " traced paths at the noise floor"};
  }));

  checks.push_back(guarded("(c) monotone", [&] {
    int violations = 0;
    for (const auto& est : all)
      for (int n = 2; n <= 7; ++n)
        if (classify(est, n) == Classification::witnesses_flexibility &&
            classify(est, n - 1) != Classification::witnesses_flexibility)
          ++violations;
    return Check{"(c) monotone", violations == 0 && !all.empty(),
                 std::to_string(all.size()) + " estimates, " + std::to_string(violations) + " violations"};
  }));
  return report(4, "arclength order agrees with classic flexes", checks);
}

bool criterion5() {
  std::vector<Check> checks;
  checks.push_back(guarded("synthetic", [] {
    std::vector<double> s;
    for (int i = 0; i < 60; ++i) s.push_back(1e-6 * std::pow(1e5, i / 59.0));
    FitOptions exact;
    exact.noise_floor = 0.0;
    double worst = 0.0;
    for (double alpha : {1.0, 2.0, 2.5, 3.0, 3.5, 4.0})
      worst = std::max(worst, std::abs(fit_order(synthetic_profile(s, alpha), exact).slope - alpha));
    return Check{"synthetic", worst <= 0.02, "max error " + fmt(worst)};
  }));
  checks.push_back(guarded("parameterization", [] {
    std::mt19937_64 rng(1005);
    const auto f = make_collinear_chain();
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
      const FlexSequence flex(
          std::vector<Vector>{testing_support::random_vector(rng, 2), testing_support::random_vector(rng, 2)});
      auto plain = [&](double t) { return polynomial_path(f.rest(), flex, t); };
      auto cubed = [&](double t) { return polynomial_path(f.rest(), flex, t * t * t); };
      const auto a = fit_order(elongation_profile(sample_curve(f, log_parameter_grid(1e-6, 1e-1, 40), plain)), fit_for(f));
      const auto b = fit_order(elongation_profile(sample_curve(f, log_parameter_grid(1e-2, 0.46, 40), cubed)), fit_for(f));
      worst = std::max(worst, std::abs(a.slope - b.slope));
    }
    return Check{"parameterization", worst <= 0.05, "max difference " + fmt(worst)};
  }));
  checks.push_back(guarded("D vs d", [] {
    std::mt19937_64 rng(1006);
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
      const auto f = testing_support::random_framework(rng, 2, 5, 0);
      const auto n = f.free_coordinate_count();
      const FlexSequence flex(
          std::vector<Vector>{testing_support::random_vector(rng, n), testing_support::random_vector(rng, n)});
      const auto p = elongation_profile(sample_polynomial_path(f, f.rest(), flex, 1e-6, 1e-2));
      worst = std::max(worst, std::abs(fit_order(p, fit_for(f, Measure::squared)).slope -
                                       fit_order(p, fit_for(f, Measure::linear)).slope));
    }
    return Check{"D vs d", worst <= 0.05, "max difference " + fmt(worst)};
  }));
  return report(5, "order estimator calibration", checks);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

bool criterion6() {
  std::vector<Check> checks;
  const fs::path root = fs::temp_directory_path() / ("rigidity-acceptance-" + std::to_string(::getpid()));
  // Runs the CLI from a fresh directory; returns stdout followed by every file it wrote.
  auto run = [&](const std::string& tag, const std::string& args) {
    const fs::path dir = root / tag;
    fs::create_directories(dir);
    const std::string cmd = "cd '" + dir.string() + "' && '" + RIGIDITY_CLI + "' " + args + " > stdout.txt 2>&1";
    const int status = std::system(cmd.c_str());
    std::string all = "exit " + std::to_string(WIFEXITED(status) ? WEXITSTATUS(status) : -1) + "\n";
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& p : files) all += p.filename().string() + "\n" + slurp(p);
    return all;
  };
  const std::string data = RIGIDITY_DATA_DIR;
  const std::pair<const char*, std::string> commands[] = {
      {"cusp-demo", "cusp-demo --seed 7 --steps 100 --out-dir ."},
      {"analyze", "analyze '" + data + "/double_watt.json' --seed 7"},
  };
  for (const auto& [name, args] : commands) {
    checks.push_back(guarded(name, [&] {
      const auto a = run(std::string(name) + "-1", args);
      const auto b = run(std::string(name) + "-2", args);
      const bool ran = a.rfind("exit 0\n", 0) == 0;
      return Check{name, ran && a == b, ran ? std::to_string(a.size()) + " bytes identical" : "did not exit 0"};
    }));
  }
  fs::remove_all(root);
  return report(6, "repeated CLI runs are byte-identical", checks);
}

}  // namespace

int main() {
  const std::vector<std::function<bool()>> criteria = {criterion1, criterion2, criterion3,
                                                       criterion4, criterion5, criterion6};
  int failed = 0;
  for (const auto& c : criteria) failed += c() ? 0 : 1;
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed ? 1 : 0;
}
