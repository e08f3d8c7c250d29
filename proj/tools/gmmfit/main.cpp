#include <cstdio>
#include <iostream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gmmfit/ak_metric.hpp"
#include "gmmfit/density_estimation.hpp"
#include "gmmfit/io.hpp"
#include "gmmfit/learner.hpp"
#include "gmmfit/mixtures.hpp"
#include "gmmfit/poly_system.hpp"
#include "gmmfit/shape_restricted.hpp"
#include "manifest.hpp"

namespace {

using namespace gmmfit;
using cli::RunManifest;
using ojson = nlohmann::ordered_json;

constexpr int kExitInfeasible = 1;
constexpr int kExitInput = 2;

struct SampleOpts {
  std::string model, out;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  double contaminate = 0.0;
  double lo = -10.0, hi = 10.0;
};

struct FitOpts {
  std::string samples, out, report;
  int k = 1;
  double eps = 0.1;
  std::string family = "gaussian";
  double gamma = 0.0;
  bool well_behaved = false;
  std::uint64_t seed = 0;
};

struct EstimateOpts {
  std::string samples, out;
  int k = 1;
  double eps = 0.1;
};

struct EvalOpts {
  std::string a, b, metric = "l1", out;
  int K = 0;
};

struct ExportOpts {
  std::string density, out, family = "gaussian";
  int k = 1;
  double eps = 0.1, nu = 0.1, gamma = 10.0;
  std::size_t max_items = 14;
};

void write_output(const std::string& path, const std::string& text) {
  write_text_file(path, !text.empty() && text.back() == '\n' ? text : text + "\n");
}

RunManifest cmd_sample(const SampleOpts& o) {
  if (!(o.contaminate >= 0.0 && o.contaminate < 1.0))
    throw std::invalid_argument("--contaminate must lie in [0, 1)");
  if (!(o.lo < o.hi)) throw std::invalid_argument("contaminant interval must have lo < hi");
  auto theta = mixture_from_json(read_text_file(o.model));
  auto xs = sample(theta, o.n, o.seed);
  if (o.contaminate > 0.0) {
    std::mt19937_64 rng(o.seed ^ 0x5bd1e9955bd1e995ULL);
    std::bernoulli_distribution pick(o.contaminate);
    std::uniform_real_distribution<double> unif(o.lo, o.hi);
    for (auto& x : xs)
      if (pick(rng)) x = unif(rng);
  }
  write_samples_csv(o.out, xs);
  RunManifest m;
  m.inputs = {o.model};
  m.outputs = {o.out};
  m.seed = o.seed;
  m.config = {{"n", o.n}, {"contaminate", o.contaminate}, {"contaminant_lo", o.lo},
              {"contaminant_hi", o.hi}};
  return m;
}

RunManifest cmd_fit(const FitOpts& o) {
  auto xs = read_samples_csv(o.samples);
  LearnConfig cfg;
  cfg.k = o.k;
  cfg.eps = o.eps;
  cfg.gamma = o.gamma;
  cfg.seed = o.seed;
  const Family fam = family_from_string(o.family);
  FitReport rep;
  if (o.well_behaved) {
    if (fam != Family::gaussian) throw std::invalid_argument("--well-behaved supports the gaussian family only");
    if (!(o.gamma > 0.0)) throw std::invalid_argument("--well-behaved needs --gamma > 0");
    rep = learn_well_behaved(xs, cfg);
  } else {
    rep = fam == Family::gaussian ? learn_gmm(xs, cfg) : learn_family(xs, cfg, fam);
  }
  write_output(o.out, to_json(rep.theta));
  if (!o.report.empty()) write_output(o.report, to_json(rep));
  RunManifest m;
  m.inputs = {o.samples};
  m.outputs = {o.out};
  if (!o.report.empty()) m.outputs.push_back(o.report);
  m.seed = o.seed;
  m.config = {{"k", o.k}, {"eps", o.eps}, {"family", o.family}, {"well_behaved", o.well_behaved},
              {"gamma", o.gamma}};
  return m;
}

RunManifest cmd_estimate(const EstimateOpts& o) {
  auto xs = read_samples_csv(o.samples);
  auto est = estimate_density(xs, o.k, o.eps);
  write_output(o.out, to_json(est));
  RunManifest m;
  m.inputs = {o.samples};
  m.outputs = {o.out};
  m.config = {{"k", o.k}, {"eps", o.eps}};
  return m;
}

RunManifest cmd_eval(const EvalOpts& o) {
  auto a = mixture_from_json(read_text_file(o.a));
  auto b = mixture_from_json(read_text_file(o.b));
  double value = 0.0;
  int K = 0;
  if (o.metric == "l1") {
    value = l1_distance(a, b);
  } else if (o.metric == "ak") {
    K = o.K > 0 ? o.K : 4 * std::max(a.k(), b.k());
    value = ak_from_integrals(difference_run_integrals(a, b), K);
  } else {
    throw std::invalid_argument("--metric must be l1 or ak");
  }
  ojson rec;
  rec["metric"] = o.metric;
  if (K > 0) rec["K"] = K;
  rec["value"] = value;
  const auto text = rec.dump(2) + "\n";
  std::cout << text;
  RunManifest m;
  m.inputs = {o.a, o.b};
  m.config = {{"metric", o.metric}, {"K", K}};
  if (!o.out.empty()) {
    write_output(o.out, text);
    m.outputs = {o.out};
  }
  return m;
}

RunManifest cmd_export(const ExportOpts& o) {
  auto est = rescale_to_unit(density_from_json(read_text_file(o.density)));
  auto shape = ShapePolyConfig::make(o.eps, family_from_string(o.family));
  auto box = well_behaved_box(o.k, o.gamma);
  EncodeOptions eo;
  eo.max_items = o.max_items;
  auto sys = encode_system(est.pp, shape, 4 * o.k, o.nu, box, eo);
  write_output(o.out, export_system(sys));
  if (!sys.materialized)
    std::fprintf(stderr, "t = %d exceeds --max-items %zu; disjuncts counted (%llu) but not listed\n", sys.t(),
                 o.max_items, static_cast<unsigned long long>(sys.permutation_count));
  RunManifest m;
  m.inputs = {o.density};
  m.outputs = {o.out};
  m.config = {{"k", o.k},     {"eps", o.eps},   {"nu", o.nu}, {"family", o.family},
              {"gamma", o.gamma}, {"max_items", o.max_items}};
  return m;
}

int run(const std::vector<std::string>& args);

int run_app(CLI::App& app, const std::vector<std::string>& args) {
  std::vector<char*> argv;
  std::string prog = "gmmfit";
  argv.push_back(prog.data());
  std::vector<std::string> copy = args;
  for (auto& a : copy) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }
  return -1;
}

int run(const std::vector<std::string>& args) {
  CLI::App app{"Proper learning of univariate Gaussian, exponential and Laplace mixtures"};
  app.set_version_flag("--version", GMMFIT_TOOL_VERSION);
  app.require_subcommand(1);

  SampleOpts so;
  auto* sc = app.add_subcommand("sample", "Draw samples from a mixture model, optionally contaminated");
  sc->add_option("--model", so.model, "Mixture JSON")->required();
  sc->add_option("--n", so.n, "Number of samples")->required();
  sc->add_option("--seed", so.seed, "RNG seed");
  sc->add_option("--contaminate", so.contaminate, "Fraction replaced by uniform noise");
  sc->add_option("--contaminant-lo", so.lo, "Lower end of the contaminant");
  sc->add_option("--contaminant-hi", so.hi, "Upper end of the contaminant");
  sc->add_option("--out", so.out, "Output CSV")->required();

  FitOpts fo;
  auto* fc = app.add_subcommand("fit", "Learn a k-component mixture from samples");
  fc->add_option("--samples", fo.samples, "Samples CSV")->required();
  fc->add_option("--k", fo.k, "Number of components")->required();
  fc->add_option("--eps", fo.eps, "Target accuracy")->required();
  fc->add_option("--family", fo.family, "gaussian, exponential or laplace")
      ->check(CLI::IsMember({"gaussian", "exponential", "laplace"}));
  fc->add_option("--gamma", fo.gamma, "Precision bound for --well-behaved");
  fc->add_flag("--well-behaved", fo.well_behaved, "Assume the truth is well behaved on [-1, 1]");
  fc->add_option("--out", fo.out, "Fitted mixture JSON")->required();
  fc->add_option("--report", fo.report, "Fit report JSON");
  fc->add_option("--seed", fo.seed, "Solver seed");

  EstimateOpts eo;
  auto* ec = app.add_subcommand("estimate-density", "Fit the piecewise-polynomial density estimate");
  ec->add_option("--samples", eo.samples, "Samples CSV")->required();
  ec->add_option("--k", eo.k, "Number of components")->required();
  ec->add_option("--eps", eo.eps, "Target accuracy")->required();
  ec->add_option("--out", eo.out, "Density JSON")->required();

  EvalOpts vo;
  auto* vc = app.add_subcommand("eval", "Distance between two mixture models");
  vc->add_option("--a", vo.a, "First mixture JSON")->required();
  vc->add_option("--b", vo.b, "Second mixture JSON")->required();
  vc->add_option("--metric", vo.metric, "l1 or ak")->check(CLI::IsMember({"l1", "ak"}));
  vc->add_option("--K", vo.K, "Number of intervals for ak (default 4 max(k_a, k_b))");
  vc->add_option("--out", vo.out, "Also write the JSON record here");

  ExportOpts xo;
  auto* xc = app.add_subcommand("export-system", "Export the polynomial system for a density estimate");
  xc->add_option("--density", xo.density, "Density JSON")->required();
  xc->add_option("--k", xo.k, "Number of components")->required();
  xc->add_option("--eps", xo.eps, "Target accuracy")->required();
  xc->add_option("--nu", xo.nu, "A_K threshold")->required();
  xc->add_option("--family", xo.family, "gaussian, exponential or laplace")
      ->check(CLI::IsMember({"gaussian", "exponential", "laplace"}));
  xc->add_option("--gamma", xo.gamma, "Precision bound of the parameter box");
  xc->add_option("--max-items", xo.max_items, "Largest t for which disjuncts are listed");
  xc->add_option("--out", xo.out, "System text")->required();

  std::string manifest_in;
  auto* rc = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
  rc->add_option("--manifest", manifest_in, "Manifest JSON")->required();

  if (int code = run_app(app, args); code >= 0) return code;

  try {
    if (*rc) {
      auto m = RunManifest::parse(read_text_file(manifest_in));
      if (!m.argv.empty() && m.argv.front() == "replay") throw std::invalid_argument("manifest replays itself");
      return run(m.argv);
    }
    RunManifest m;
    if (*sc) m = cmd_sample(so);
    else if (*fc) m = cmd_fit(fo);
    else if (*ec) m = cmd_estimate(eo);
    else if (*vc) m = cmd_eval(vo);
    else m = cmd_export(xo);
    m.subcommand = app.get_subcommands().front()->get_name();
    m.argv = args;
    cli::write_manifests(m);
    return 0;
  } catch (const InfeasibleError& e) {
    std::fprintf(stderr, "gmmfit: %s\n", e.what());
    return kExitInfeasible;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "gmmfit: %s\n", e.what());
    return kExitInput;
  }
}

}  // namespace

int main(int argc, char** argv) { return run(std::vector<std::string>(argv + 1, argv + argc)); }
