// Command-line front end; talks to the library exclusively through the
// C API in opkernel.h.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "opkernel.h"

namespace {

constexpr int kUsageError = 2;

std::string read_file(const std::string &path, bool &ok) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    ok = false;
    return {};
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  ok = true;
  return buffer.str();
}

std::vector<double> parse_times(const std::string &csv, bool &ok) {
  std::vector<double> out;
  std::stringstream stream(csv);
  std::string token;
  ok = true;
  while (std::getline(stream, token, ',')) {
    try {
      out.push_back(std::stod(token));
    } catch (...) {
      ok = false;
      return {};
    }
  }
  if (out.empty()) ok = false;
  return out;
}

int deliver(opk_ctx *ctx, int status, char *report,
            const std::string &out_path) {
  if (report) {
    if (out_path.empty()) {
      std::fputs(report, stdout);
      std::fputc('\n', stdout);
    } else {
      std::ofstream out(out_path, std::ios::binary);
      if (!out) {
        std::fprintf(stderr, "error: cannot write '%s'\n", out_path.c_str());
        opk_string_free(report);
        return kUsageError;
      }
      out << report << '\n';
    }
    opk_string_free(report);
  }
  if (status != OPK_OK) {
    const char *message = opk_last_error(ctx);
    if (message && *message) std::fprintf(stderr, "error: %s\n", message);
  }
  return status;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"finite-dimensional laboratory for operator-valued kernels, "
               "their dilations, and Schur semigroups"};
  app.require_subcommand(1);

  std::string out_path;
  double tol_override = 0.0;
  app.add_option("-o,--output", out_path, "write the report to a file");
  app.add_option("--tol", tol_override,
                 "relative tolerance override (also env OPKERNEL_TOL)");

  // check pd|cpd <file>
  auto *check = app.add_subcommand("check", "positivity checks for kernels");
  std::string check_kind, check_file;
  check->add_option("kind", check_kind, "pd or cpd")->required();
  check->add_option("file", check_file, "kernel JSON file")->required();

  auto *kolmogorov = app.add_subcommand(
      "kolmogorov", "minimal Kolmogorov decomposition of a PD kernel");
  std::string kolmogorov_file;
  kolmogorov->add_option("file", kolmogorov_file)->required();

  auto *gns = app.add_subcommand(
      "gns", "GNS correspondence of a CPD kernel of maps");
  std::string gns_file;
  gns->add_option("file", gns_file)->required();

  auto *compose = app.add_subcommand(
      "compose", "Schur composition with its GNS embedding");
  std::string compose_l, compose_k;
  compose->add_option("-l,--left", compose_l, "kernel L (B to C)")->required();
  compose->add_option("-k,--right", compose_k, "kernel K (A to B)")->required();

  auto *stinespring = app.add_subcommand(
      "stinespring", "Stinespring/KSGNS dilation of a CPD kernel");
  std::string stinespring_file, stinespring_module;
  stinespring->add_option("file", stinespring_file)->required();
  stinespring->add_option("--module", stinespring_module,
                          "representation module JSON (correspondence)");

  auto *phimap = app.add_subcommand(
      "phimap", "dilation sextuple of a phi-map into Hom(H1,H2)");
  std::string phimap_file;
  phimap->add_option("file", phimap_file)->required();

  auto *sandwich = app.add_subcommand(
      "sandwich", "tensor-sandwich over the operator algebra of a module");
  std::string sandwich_file;
  sandwich->add_option("file", sandwich_file)->required();

  auto *schoenberg = app.add_subcommand(
      "schoenberg", "Schur-semigroup generator analysis with Fock check");
  std::string schoenberg_file, schoenberg_base, schoenberg_times;
  int fock_n = 20;
  schoenberg->add_option("file", schoenberg_file)->required();
  schoenberg->add_option("--base", schoenberg_base, "base point label");
  schoenberg->add_option("--times", schoenberg_times,
                         "comma-separated times (default: the 2^-6..2^4 grid)");
  schoenberg->add_option("--fock-n", fock_n, "exponential truncation degree");

  auto *semigroup = app.add_subcommand(
      "semigroup", "subproduct-system checks for a CP(D) generator");
  std::string semigroup_file, semigroup_times = "0.5,0.5";
  semigroup->add_option("file", semigroup_file)->required();
  semigroup->add_option("--times", semigroup_times, "times s,t");

  auto *star = app.add_subcommand(
      "star", "positivity in abstract *-algebras");
  std::string star_sub, star_file;
  star->add_option("kind", star_sub,
                   "gns | separated | spositive | sqrt | kolmogorov")
      ->required();
  star->add_option("file", star_file)->required();

  auto *selftest = app.add_subcommand(
      "selftest", "run the full deterministic verification suite");
  unsigned long long seed = 424242ULL;
  selftest->add_option("--seed", seed, "PRNG seed");

  // let -o / --tol appear after the subcommand as in `kolmogorov k.json -o f`
  for (CLI::App *sub : app.get_subcommands([](const CLI::App *) { return true; }))
    sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &err) {
    app.exit(err);
    return kUsageError;
  }

  opk_ctx *ctx = opk_ctx_new();
  if (!ctx) {
    std::fprintf(stderr, "error: out of memory\n");
    return OPK_INTERNAL_ERROR;
  }

  if (const char *env = std::getenv("OPKERNEL_TOL"))
    tol_override = std::atof(env);
  if (tol_override > 0.0)
    opk_set_tolerance(ctx, tol_override, tol_override * 1e-3);

  auto load = [&](const std::string &path, std::string &text) {
    bool ok = false;
    text = read_file(path, ok);
    if (!ok) std::fprintf(stderr, "error: cannot read '%s'\n", path.c_str());
    return ok;
  };

  int status = kUsageError;
  char *report = nullptr;
  std::string text, text2;

  if (check->parsed()) {
    if (check_kind != "pd" && check_kind != "cpd") {
      std::fprintf(stderr, "error: check kind must be 'pd' or 'cpd'\n");
      opk_ctx_free(ctx);
      return kUsageError;
    }
    if (!load(check_file, text)) {
      opk_ctx_free(ctx);
      return kUsageError;
    }
    status = check_kind == "pd" ? opk_check_pd(ctx, text.c_str(), &report)
                                : opk_check_cpd(ctx, text.c_str(), &report);
  } else if (kolmogorov->parsed()) {
    if (!load(kolmogorov_file, text)) {
      opk_ctx_free(ctx);
      return kUsageError;
    }
    status = opk_kolmogorov(ctx, text.c_str(), &report);
  } else if (gns->parsed()) {
    if (!load(gns_file, text)) {
      opk_ctx_free(ctx);
      return kUsageError;
    }
    status = opk_gns(ctx, text.c_str(), &report);
  } else if (compose->parsed()) {
    if (!load(compose_l, text) || !load(compose_k, text2)) {
      opk_ctx_free(ctx);
      return kUsageError;
    }
    status = opk_compose(ctx, text.c_str(), text2.c_str(), &report);
  } else if (stinespring->parsed()) {
    if (!load(stinespring_file, text)) {
      opk_ctx_free(ctx);
      return kUsageError;
    }
    const char *module_text = nullptr;
    if (!stinespring_module.empty()) {
      if (!load(stinespring_module, text2)) {
        opk_ctx_free(ctx);
        return kUsageError;
      }
      module_text = text2.c_str();
    }
    status = opk_stinespring(ctx, text.c_str(), module_text, &report);
  } else if (phimap->parsed()) {
    if (!load(phimap_file, text)) {
      opk_ctx_free(ctx);
      return kUsageError;
    }
    status = opk_phimap(ctx, text.c_str(), &report);
  } else if (sandwich->parsed()) {
    if (!load(sandwich_file, text)) {
      opk_ctx_free(ctx);
      return kUsageError;
    }
    status = opk_sandwich(ctx, text.c_str(), &report);
  } else if (schoenberg->parsed()) {
    if (!load(schoenberg_file, text)) {
      opk_ctx_free(ctx);
      return kUsageError;
    }
    std::vector<double> times;
    if (!schoenberg_times.empty()) {
      bool ok = false;
      times = parse_times(schoenberg_times, ok);
      if (!ok) {
        std::fprintf(stderr, "error: cannot parse --times\n");
        opk_ctx_free(ctx);
        return kUsageError;
      }
    }
    status = opk_schoenberg(
        ctx, text.c_str(),
        schoenberg_base.empty() ? nullptr : schoenberg_base.c_str(),
        times.empty() ? nullptr : times.data(), times.size(), fock_n,
        &report);
  } else if (semigroup->parsed()) {
    if (!load(semigroup_file, text)) {
      opk_ctx_free(ctx);
      return kUsageError;
    }
    bool ok = false;
    const std::vector<double> times = parse_times(semigroup_times, ok);
    if (!ok || times.size() != 2) {
      std::fprintf(stderr, "error: --times needs exactly s,t\n");
      opk_ctx_free(ctx);
      return kUsageError;
    }
    status = opk_semigroup(ctx, text.c_str(), times[0], times[1], &report);
  } else if (star->parsed()) {
    if (!load(star_file, text)) {
      opk_ctx_free(ctx);
      return kUsageError;
    }
    status = opk_star(ctx, star_sub.c_str(), text.c_str(), &report);
  } else if (selftest->parsed()) {
    opk_set_seed(ctx, seed);
    status = opk_selftest(ctx, &report);
  }

  const int final_status = deliver(ctx, status, report, out_path);
  opk_ctx_free(ctx);
  return final_status;
}
