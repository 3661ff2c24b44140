// rigidity: command-line front end for the framework analyses.
//
// Exit codes: 0 success, 1 runtime or math failure, 2 input validation or I/O failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <openssl/evp.h>

#include "rigidity/rigidity.hpp"
#include "rigidity/report.hpp"

namespace fs = std::filesystem;
using namespace rigidity;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitInput = 2;

// Failure of a named cusp-demo stage.
struct StageError : std::runtime_error {
  StageError(const std::string& stage, const std::string& what)
      : std::runtime_error("stage '" + stage + "': " + what) {}
};

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr)) throw std::runtime_error("sha256 failed");
  std::string out;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    out += buf;
  }
  return out;
}

struct Loaded {
  Framework f;
  std::string digest;
};

Loaded load(const std::string& path) {
  const std::string text = read_file(path);
  return {parse_framework_json(text), sha256_hex(text)};
}

Json header(const std::string& command) {
  Json j;
  j["tool"] = "rigidity";
  j["version"] = kToolVersion;
  j["command"] = command;
  return j;
}

void print(const Json& j) { std::cout << dump_json(j) << '\n'; }

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  if (!out) throw IoError("error writing '" + path + "'");
}

void write_branch_csv(const std::string& path, const Framework& f, const PathSamples& samples) {
  std::ostringstream os;
  write_csv(os, f, samples);
  write_text(path, os.str());
}

// foo.csv + "plus" -> foo_plus.csv
std::string suffixed(const std::string& path, const std::string& tag) {
  fs::path p(path);
  const std::string ext = p.has_extension() ? p.extension().string() : ".csv";
  return (p.parent_path() / (p.stem().string() + "_" + tag + ext)).string();
}

std::string branch_tag(const Branch& b) { return b.side > 0 ? "plus" : b.side < 0 ? "minus" : "main"; }

Json fit_json(const ElongationProfile& profile, const FitOptions& opts, int max_order) {
  try {
    const auto est = fit_order(profile, opts);
    Json j = estimate_to_json(est);
    j["classification"] = classification_to_json(est, max_order);
    return j;
  } catch (const std::exception& e) {
    Json j;
    j["error"] = e.what();
    return j;
  }
}

bool looks_like_double_watt(const Framework& f) {
  for (const char* id : {"p1", "p2", "q", "p1b", "p2b", "qb"})
    if (!f.index_of(id)) return false;
  return true;
}

// ---------------------------------------------------------------------------

int cmd_validate(const std::string& path) {
  const auto loaded = load(path);
  const auto& f = loaded.f;
  std::cout << "ok: " << f.vertex_count() << " vertices, " << f.edge_count() << " edges, dimension " << f.dimension()
            << ", " << f.pinned_count() << " pinned\n";
  for (const auto& w : f.warnings()) std::cout << "warning: " << w << '\n';
  return 0;
}

struct AnalyzeArgs {
  std::string path;
  int max_order = 3;
  std::uint64_t seed = 1;
  int steps = 100;
  double step = 0.01;
};

int cmd_analyze(const AnalyzeArgs& args) {
  const auto loaded = load(args.path);
  const auto& f = loaded.f;
  const Configuration x0 = f.rest();
  const FlexContext ctx(f, x0);
  OrderTestOptions opts;
  opts.seed = args.seed;

  Json report = header("analyze");
  report["input_sha256"] = loaded.digest;
  report["framework"] = framework_summary(f);
  report["rigidity_matrix"] = spectrum_summary(ctx);

  FitOptions fit;
  fit.noise_floor = noise_floor_for(x0);
  report["classic"] = Json::array();
  for (int n = 1; n <= args.max_order; ++n) {
    const auto v = classic_order_test(ctx, n, opts);
    Json j = verdict_to_json(n, v);
    if (v.witness && !v.witness->derivative(1).isZero(0.0)) {
      const auto samples = sample_polynomial_path(f, x0, *v.witness);
      j["polynomial_path"] = fit_json(elongation_profile(samples), fit, args.max_order);
    }
    report["classic"].push_back(j);
  }

  report["traced_paths"] = Json::array();
  if (ctx.split().nullspace.cols() > 0) {
    for (const auto& b : trace_branches(f, x0, args.step, args.steps, std::nullopt, opts)) {
      Json j;
      j["label"] = b.label;
      j["trace"] = trace_summary(b.result);
      if (b.result.path.records.size() > 1)
        j["estimate"] = fit_json(elongation_profile(b.result.path), fit, args.max_order);
      report["traced_paths"].push_back(j);
    }
  }

  if (looks_like_double_watt(f) && ctx.split().nullspace.cols() == 2) {
    Json cusp = Json::array();
    for (int branch : {1, -1}) {
      try {
        const auto sol = solve_cusp_flexes(f, -0.5, branch);
        cusp.push_back(watt_report_to_json(sol, verify_watt_relations(f, sol)));
      } catch (const std::exception& e) {
        cusp.push_back({{"branch", branch}, {"error", e.what()}});
      }
    }
    report["cusp_verification"] = cusp;
  } else {
    report["cusp_verification"] = nullptr;
  }
  print(report);
  return 0;
}

struct TraceArgs {
  std::string path;
  std::string direction = "auto";
  int steps = 100;
  double step = 0.01;
  std::string out = "trace.csv";
  std::uint64_t seed = 1;
};

int cmd_trace(const TraceArgs& args) {
  const auto loaded = load(args.path);
  const auto& f = loaded.f;
  std::optional<int> index;
  if (args.direction != "auto") {
    try {
      std::size_t used = 0;
      index = std::stoi(args.direction, &used);
      if (used != args.direction.size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw InputError("--direction must be 'auto' or a flex basis index, got '" + args.direction + "'");
    }
  }
  OrderTestOptions opts;
  opts.seed = args.seed;
  const auto branches = trace_branches(f, f.rest(), args.step, args.steps, index, opts);

  Json report = header("trace");
  report["input_sha256"] = loaded.digest;
  report["branch_count"] = branches.size();
  report["branches"] = Json::array();
  for (const auto& b : branches) {
    const std::string csv = branches.size() == 1 ? args.out : suffixed(args.out, branch_tag(b));
    write_branch_csv(csv, f, b.result.path);
    Json j;
    j["label"] = b.label;
    j["csv"] = csv;
    j["trace"] = trace_summary(b.result);
    report["branches"].push_back(j);
  }
  print(report);
  return 0;
}

struct OrderArgs {
  std::string path;
  std::optional<int> from_flex;
  bool from_trace = false;
  std::optional<double> synthetic_alpha;
  int max_order = 6;
  std::string measure = "squared";
  std::uint64_t seed = 1;
  int steps = 100;
  double step = 0.01;
};

int cmd_order(const OrderArgs& args) {
  FitOptions fit;
  if (args.measure == "linear") fit.measure = Measure::linear;
  else if (args.measure != "squared") throw InputError("--measure must be 'squared' or 'linear'");

  Json report = header("order");
  report["estimates"] = Json::array();

  if (args.synthetic_alpha) {
    std::vector<double> s;
    for (double t : log_parameter_grid(1e-6, 1e-1, 40)) s.push_back(t);
    const auto profile = synthetic_profile(s, *args.synthetic_alpha);
    report["source"] = "synthetic";
    fit.noise_floor = 0.0;
    Json j = fit_json(profile, fit, args.max_order);
    j["path"] = "synthetic";
    report["estimates"].push_back(j);
    print(report);
    return 0;
  }
  if (args.path.empty()) throw InputError("a framework file is required unless --synthetic-alpha is given");
  if (args.from_flex.has_value() == args.from_trace) throw InputError("give exactly one of --from-flex n or --from-trace");

  const auto loaded = load(args.path);
  const auto& f = loaded.f;
  const Configuration x0 = f.rest();
  fit.noise_floor = noise_floor_for(x0);
  report["input_sha256"] = loaded.digest;
  OrderTestOptions opts;
  opts.seed = args.seed;

  if (args.from_flex) {
    const int n = *args.from_flex;
    if (n < 1) throw InputError("--from-flex must be >= 1");
    const auto v = classic_order_test(f, x0, n, opts);
    if (!v.witness) throw std::runtime_error("no order-" + std::to_string(n) + " flex available: " + to_string(v.kind) + ", " + v.detail);
    report["source"] = "flex";
    report["flex_order"] = n;
    const auto samples = sample_polynomial_path(f, x0, *v.witness);
    Json j = fit_json(elongation_profile(samples), fit, args.max_order);
    j["path"] = "polynomial";
    report["estimates"].push_back(j);
  } else {
    report["source"] = "trace";
    for (const auto& b : trace_branches(f, x0, args.step, args.steps, std::nullopt, opts)) {
      Json j = fit_json(elongation_profile(b.result.path), fit, args.max_order);
      j["path"] = b.label;
      j["trace"] = trace_summary(b.result);
      report["estimates"].push_back(j);
    }
  }
  print(report);
  return 0;
}

struct CuspArgs {
  double a = -0.5;
  bool a_positive = false;
  bool unit_bar = false;
  int steps = 100;
  double step = 0.01;
  std::string out_dir = ".";
  std::uint64_t seed = 1;
};

template <class F>
auto stage(const std::string& name, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

int cmd_cusp_demo(const CuspArgs& args) {
  const double a = args.a_positive ? 0.5 : args.a;
  const double length = args.unit_bar ? 1.0 : 4.0;
  OrderTestOptions opts;
  opts.seed = args.seed;

  const Framework f = stage("build", [&] { return make_double_watt(length); });
  const Configuration x0 = f.rest();
  const FlexContext ctx(f, x0);

  Json report = header("cusp-demo");
  report["framework"] = framework_summary(f);
  report["bar_length"] = length;
  report["a"] = a;
  report["rigidity_matrix"] = spectrum_summary(ctx);

  report["classic"] = stage("classic", [&] {
    Json j = Json::array();
    for (int n = 1; n <= 3; ++n) j.push_back(verdict_to_json(n, classic_order_test(ctx, n, opts)));
    return j;
  });

  report["flexes"] = stage("solve", [&] {
    Json j = Json::array();
    for (int branch : {1, -1}) {
      const auto sol = solve_cusp_flexes(f, a, branch);
      const auto rep = verify_watt_relations(f, sol);
      if (!rep.ok) throw std::runtime_error("relation residual " + format_double(std::max(rep.max_relation, rep.max_level)));
      j.push_back(watt_report_to_json(sol, rep));
    }
    return j;
  });
  {
    Json rel;
    rel["form"] = "9*L*a^3 + (b_bar - b)^2 = 0";
    rel["L"] = length;
    rel["coefficient_of_a3"] = 9.0 * length;
    report["relation_constant"] = rel;
  }

  report["branches"] = stage("trace", [&] {
    std::error_code ec;
    fs::create_directories(args.out_dir, ec);
    const int qy = f.free_column(*f.index_of("q"), 1);
    const int qby = f.free_column(*f.index_of("qb"), 1);
    FitOptions fit;
    fit.noise_floor = noise_floor_for(x0);
    Json j = Json::array();
    for (const auto& b : trace_branches(f, x0, args.step, args.steps, std::nullopt, opts)) {
      const std::string csv = (fs::path(args.out_dir) / ("cusp_branch_" + branch_tag(b) + ".csv")).string();
      write_branch_csv(csv, f, b.result.path);
      Json e;
      e["label"] = b.label;
      e["csv"] = csv;
      e["trace"] = trace_summary(b.result);
      const auto& rec = b.result.path.records;
      if (rec.size() > 1) {
        const Vector& x1 = rec[1].x.values();
        e["first_step_bar_dy"] = 0.5 * (x1(qy) + x1(qby) - x0[qy] - x0[qby]);
        e["first_step_tilt"] = x1(qby) - x1(qy) - (x0[qby] - x0[qy]);
        e["estimate"] = fit_json(elongation_profile(b.result.path), fit, 6);
      }
      j.push_back(e);
    }
    return j;
  });
  print(report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rigidity analysis of bar-and-joint frameworks"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Parse and validate a framework file");
  validate->add_option("path", validate_path, "Framework JSON")->required();

  AnalyzeArgs analyze_args;
  auto* analyze = app.add_subcommand("analyze", "Classic order tests, flex/stress spaces and order estimates as JSON");
  analyze->add_option("path", analyze_args.path, "Framework JSON")->required();
  analyze->add_option("--max-order", analyze_args.max_order, "Highest classic order to test")->check(CLI::Range(1, 20));
  analyze->add_option("--seed", analyze_args.seed, "Seed for sampled searches");
  analyze->add_option("--steps", analyze_args.steps, "Trace steps per branch")->check(CLI::Range(1, 1000000));
  analyze->add_option("--step", analyze_args.step, "Trace step length")->check(CLI::PositiveNumber);

  TraceArgs trace_args;
  auto* trace = app.add_subcommand("trace", "Trace the finite motion and write CSV path data");
  trace->add_option("path", trace_args.path, "Framework JSON")->required();
  trace->add_option("--direction", trace_args.direction, "auto, or an index into the flex basis");
  trace->add_option("--steps", trace_args.steps, "Number of steps")->check(CLI::Range(1, 1000000));
  trace->add_option("--step", trace_args.step, "Step length")->check(CLI::PositiveNumber);
  trace->add_option("--out", trace_args.out, "CSV output; several branches get _plus/_minus suffixes");
  trace->add_option("--seed", trace_args.seed, "Seed for sampled searches");

  OrderArgs order_args;
  auto* order = app.add_subcommand("order", "Estimate the arclength order of a path");
  order->add_option("path", order_args.path, "Framework JSON");
  order->add_option("--from-flex", order_args.from_flex, "Polynomial path of a classic order-n flex");
  order->add_flag("--from-trace", order_args.from_trace, "Traced finite motion");
  order->add_option("--synthetic-alpha", order_args.synthetic_alpha, "Fit an exact power law s^alpha instead (test hook)");
  order->add_option("--max-order", order_args.max_order, "Classify for n up to this order")->check(CLI::Range(1, 20));
  order->add_option("--measure", order_args.measure, "squared or linear elongation");
  order->add_option("--seed", order_args.seed, "Seed for sampled searches");
  order->add_option("--steps", order_args.steps, "Trace steps")->check(CLI::Range(1, 1000000));
  order->add_option("--step", order_args.step, "Trace step length")->check(CLI::PositiveNumber);

  CuspArgs cusp_args;
  auto* cusp = app.add_subcommand("cusp-demo", "Double-Watt cusp mechanism, end to end");
  cusp->add_option("--a", cusp_args.a, "Vertical acceleration of p1 (must be negative)");
  cusp->add_flag("--a-positive", cusp_args.a_positive, "Use a = +0.5 to demonstrate infeasibility");
  cusp->add_flag("--with-unit-bar", cusp_args.unit_bar, "Connecting bar of length 1 instead of 4");
  cusp->add_option("--steps", cusp_args.steps, "Trace steps per branch")->check(CLI::Range(1, 1000000));
  cusp->add_option("--step", cusp_args.step, "Trace step length")->check(CLI::PositiveNumber);
  cusp->add_option("--out-dir", cusp_args.out_dir, "Directory for branch CSVs");
  cusp->add_option("--seed", cusp_args.seed, "Seed for sampled searches");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*validate) return cmd_validate(validate_path);
    if (*analyze) return cmd_analyze(analyze_args);
    if (*trace) return cmd_trace(trace_args);
    if (*order) return cmd_order(order_args);
    if (*cusp) return cmd_cusp_demo(cusp_args);
  } catch (const ValidationError& e) {
    for (const auto& v : e.violations()) std::cerr << "error: " << to_string(v.kind) << ": " << v.message << '\n';
    return kExitInput;
  } catch (const IoError& e) {
    std::cerr << "error: io: " << e.what() << '\n';
    return kExitInput;
  } catch (const InputError& e) {
    std::cerr << "error: input: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitRuntime;
}
