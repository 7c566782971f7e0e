#include "opkernel.h"

#include <chrono>
#include <cstring>
#include <functional>
#include <string>

#include "opkernel/json_io.hpp"
#include "opkernel/random_objects.hpp"
#include "opkernel/selftest.hpp"

using namespace opkernel;

struct opk_ctx {
  Tolerance tol;
  std::uint64_t seed = kDefaultSeed;
  std::string last_error;
};

namespace {

using clock_type = std::chrono::steady_clock;

char *dup_string(const std::string &s) {
  char *out = static_cast<char *>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void emit(char **slot, const json &doc) {
  if (slot) *slot = dup_string(doc.dump(2));
}

/**
 * Runs `body`, which fills a Report and returns true when every check
 * passed.  Thrown math errors become CHECK_FAILED reports; input errors
 * become INVALID_INPUT.
 */
int run_guarded(opk_ctx *ctx, const std::string &command, char **report_json,
                const std::function<bool(Report &)> &body) {
  if (!ctx) return OPK_INTERNAL_ERROR;
  ctx->last_error.clear();
  const auto start = clock_type::now();
  Report report(command);
  try {
    const bool ok = body(report);
    const double ms =
        std::chrono::duration<double, std::milli>(clock_type::now() - start)
            .count();
    emit(report_json, report.finalize(ms));
    return ok ? OPK_OK : OPK_CHECK_FAILED;
  } catch (const OpkError &err) {
    ctx->last_error = err.what();
    Report failed(command);
    failed.add_flag(std::string("error:") + err.code_name(), false,
                    err.what());
    const double ms =
        std::chrono::duration<double, std::milli>(clock_type::now() - start)
            .count();
    emit(report_json, failed.finalize(ms));
    return is_math_error(err.code()) ? OPK_CHECK_FAILED : OPK_INVALID_INPUT;
  } catch (const std::exception &err) {
    ctx->last_error = err.what();
    return OPK_INTERNAL_ERROR;
  }
}

json parse_input(const char *text, const char *what) {
  if (!text)
    throw OpkError(ErrorCode::InvalidInput,
                   std::string(what) + ": null input");
  return parse_json(text);
}

}  // namespace

extern "C" {

opk_ctx *opk_ctx_new(void) { return new (std::nothrow) opk_ctx; }

void opk_ctx_free(opk_ctx *ctx) { delete ctx; }

int opk_set_tolerance(opk_ctx *ctx, double rel_eps, double abs_floor) {
  if (!ctx || !(rel_eps > 0.0) || !(abs_floor >= 0.0)) return OPK_INVALID_INPUT;
  ctx->tol.rel_eps = rel_eps;
  ctx->tol.abs_floor = abs_floor;
  return OPK_OK;
}

int opk_set_seed(opk_ctx *ctx, unsigned long long seed) {
  if (!ctx) return OPK_INVALID_INPUT;
  ctx->seed = seed;
  return OPK_OK;
}

const char *opk_last_error(const opk_ctx *ctx) {
  return ctx ? ctx->last_error.c_str() : "null context";
}

void opk_string_free(char *str) { std::free(str); }

const char *opk_version(void) { return "opkernel 1.0.0"; }

int opk_check_pd(opk_ctx *ctx, const char *kernel_json, char **report_json) {
  return run_guarded(ctx, "check pd", report_json, [&](Report &report) {
    const OpKernel k = opkernel_from_json(parse_input(kernel_json, "kernel"));
    const PdReport pd = is_pd(k, ctx->tol);
    report.add_check("positive_definite", pd.pd, -pd.min_eigenvalue,
                     Tolerance{ctx->tol}.threshold(pd.scale),
                     "min eigenvalue " + std::to_string(pd.min_eigenvalue) +
                         " in block " + std::to_string(pd.witness_block));
    report.set_dimension("points", k.size());
    return pd.pd;
  });
}

int opk_check_cpd(opk_ctx *ctx, const char *kernel_json, char **report_json) {
  return run_guarded(ctx, "check cpd", report_json, [&](Report &report) {
    const MapKernel k =
        mapkernel_from_json(parse_input(kernel_json, "kernel"));
    const CpReport cp = is_cpd(k, ctx->tol);
    report.add_check("completely_positive_definite", cp.cp,
                     -cp.min_eigenvalue,
                     Tolerance{ctx->tol}.threshold(1.0 + cp.scale),
                     "min Choi eigenvalue " +
                         std::to_string(cp.min_eigenvalue));
    report.set_dimension("points", k.size());
    return cp.cp;
  });
}

int opk_kolmogorov(opk_ctx *ctx, const char *kernel_json,
                   char **result_json) {
  return run_guarded(ctx, "kolmogorov", result_json, [&](Report &report) {
    const OpKernel k = opkernel_from_json(parse_input(kernel_json, "kernel"));
    const Decomposition d = kolmogorov(k, ctx->tol);
    const double residual = decomposition_residual(d, k);
    report.add_check("reconstruction", residual <= 1e-10, residual, 1e-10);
    report.set_dimension("total_ambient", d.module.total_ambient());
    report.set_info("decomposition", decomposition_to_json(d, k.points()));
    return residual <= 1e-10;
  });
}

int opk_gns(opk_ctx *ctx, const char *kernel_json, char **result_json) {
  return run_guarded(ctx, "gns", result_json, [&](Report &report) {
    const MapKernel k =
        mapkernel_from_json(parse_input(kernel_json, "kernel"));
    const GnsData g = gns(k, ctx->tol);
    report.add_check("reconstruction", g.residual <= 1e-10, g.residual,
                     1e-10);
    report.set_dimension("total_ambient", g.corr.module.total_ambient());
    report.set_info("gns", gns_to_json(g, k.points()));
    return g.residual <= 1e-10;
  });
}

int opk_compose(opk_ctx *ctx, const char *l_json, const char *k_json,
                char **report_json) {
  return run_guarded(ctx, "compose", report_json, [&](Report &report) {
    const MapKernel l = mapkernel_from_json(parse_input(l_json, "kernel L"));
    const MapKernel k = mapkernel_from_json(parse_input(k_json, "kernel K"));
    const MapKernel composed = schur_compose(l, k);
    const CpReport cp = is_cpd(composed, ctx->tol);
    report.add_flag("composition_cpd", cp.cp,
                    "min Choi eigenvalue " +
                        std::to_string(cp.min_eigenvalue));
    const ComposeEmbedding emb = compose_embedding(l, k, ctx->tol);
    report.add_check("embedding_isometry", emb.residual <= 1e-10,
                     emb.residual, 1e-10);
    report.add_flag("dimension_inequality", emb.dim_gns <= emb.dim_tensor,
                    emb.strict ? "strict" : "equality");
    report.set_dimension("gns_composed", emb.dim_gns);
    report.set_dimension("gns_tensor", emb.dim_tensor);
    report.set_info("composed_kernel", to_json(composed));
    return cp.cp && emb.residual <= 1e-10 && emb.dim_gns <= emb.dim_tensor;
  });
}

int opk_stinespring(opk_ctx *ctx, const char *kernel_json,
                    const char *module_json, char **report_json) {
  return run_guarded(ctx, "stinespring", report_json, [&](Report &report) {
    const MapKernel k =
        mapkernel_from_json(parse_input(kernel_json, "kernel"));
    std::optional<Correspondence> f;
    if (module_json)
      f = correspondence_from_json(parse_input(module_json, "module"));
    const StinespringData st = stinespring(k, f, ctx->tol);
    report.add_check("dilation_identity", st.residual <= 1e-10, st.residual,
                     1e-10);
    report.set_dimension("dilation_space", st.h.module.total_ambient());
    return st.residual <= 1e-10;
  });
}

int opk_phimap(opk_ctx *ctx, const char *task_json, char **report_json) {
  return run_guarded(ctx, "phimap", report_json, [&](Report &report) {
    const json task = parse_input(task_json, "task");
    const HilbertModule e = module_from_json(task.at("module"));
    const CMatrix t_matrix = cmatrix_from_json(task.at("t_matrix"));
    const LinMap phi = linmap_from_json(task.at("phi"));
    const PhiMapData data = phi_map_sextuple(e, t_matrix, phi, ctx->tol);
    report.add_check("factorization", data.residual_factorization <= 1e-10,
                     data.residual_factorization, 1e-10);
    report.add_check("inner_products", data.residual_inner <= 1e-10,
                     data.residual_inner, 1e-10);
    report.add_check("coisometry", data.residual_coisometry <= 1e-10,
                     data.residual_coisometry, 1e-10);
    report.add_check("phi_map_identity", data.phi_map_defect <= 1e-10,
                     data.phi_map_defect, 1e-10);
    report.set_dimension("k1", data.k1.module.total_ambient());
    report.set_dimension("k2", data.k2.total_ambient());
    return data.residual_factorization <= 1e-10 &&
           data.residual_inner <= 1e-10 &&
           data.residual_coisometry <= 1e-10 && data.phi_map_defect <= 1e-10;
  });
}

int opk_sandwich(opk_ctx *ctx, const char *task_json, char **report_json) {
  return run_guarded(ctx, "sandwich", report_json, [&](Report &report) {
    const json task = parse_input(task_json, "task");
    const HilbertModule e = module_from_json(task.at("module"));
    const Correspondence big =
        correspondence_from_json(task.at("correspondence"));
    const MoritaSandwich ms = morita_sandwich(e, big, ctx->tol);
    validate_left_action(ms.result.action, ms.result.module.ambient,
                         ctx->tol);
    report.add_flag("result_action_valid", true);
    report.set_dimension("result_ambient",
                         ms.result.module.total_ambient());
    report.set_info("result", to_json(ms.result));
    return true;
  });
}

int opk_schoenberg(opk_ctx *ctx, const char *generator_json,
                   const char *base_point, const double *times,
                   size_t n_times, int fock_truncation, char **report_json) {
  return run_guarded(ctx, "schoenberg", report_json, [&](Report &report) {
    const ScalarGenerator gen =
        scalar_generator_from_json(parse_input(generator_json, "generator"));
    std::size_t base = 0;
    if (base_point) {
      bool found = false;
      for (std::size_t i = 0; i < gen.points.size(); ++i)
        if (gen.points[i] == base_point) {
          base = i;
          found = true;
        }
      if (!found)
        throw OpkError(ErrorCode::InvalidInput,
                       std::string("unknown base point '") + base_point + "'");
    }
    std::vector<double> grid;
    if (times && n_times > 0)
      grid.assign(times, times + n_times);
    else
      grid = default_time_grid();
    const std::size_t truncation =
        fock_truncation > 0 ? static_cast<std::size_t>(fock_truncation)
                            : kDefaultFockTruncation;

    const CondPdReport cond = is_cond_pd(gen, ctx->tol);
    report.add_check("conditionally_positive_definite", cond.cond_pd,
                     -cond.min_eigenvalue,
                     Tolerance{ctx->tol}.threshold(1.0), "");
    bool ok = cond.cond_pd;
    if (cond.cond_pd) {
      const SchoenbergData sd = schoenberg_normalize(gen, base, ctx->tol);
      report.set_dimension("one_particle_dim",
                           sd.one_particle.module.total_ambient());
      for (double t : grid) {
        const PdReport pd =
            is_pd(scalar_kernel(gen.points, schur_exp(gen, t)), ctx->tol);
        report.add_flag("pd_at_t=" + std::to_string(t), pd.pd,
                        "min eigenvalue " +
                            std::to_string(pd.min_eigenvalue));
        ok = ok && pd.pd;
        const FockReport fock =
            fock_exponential_check(sd, t, truncation, ctx->tol);
        report.add_check("fock_at_t=" + std::to_string(t), fock.within_bound,
                         fock.max_error, fock.tail_bound + 1e-12);
        ok = ok && fock.within_bound;
      }
    }
    return ok;
  });
}

int opk_semigroup(opk_ctx *ctx, const char *generator_json, double s,
                  double t, char **report_json) {
  return run_guarded(ctx, "semigroup", report_json, [&](Report &report) {
    const json doc = parse_input(generator_json, "generator");
    if (doc.contains("points")) {
      const MapKernel gen = mapkernel_from_json(doc);
      const CpdSemigroupReport rep =
          cpd_semigroup_check(gen, s, t, ctx->tol);
      report.add_flag("cpd_on_grid",
                      rep.cpd_at_s && rep.cpd_at_t && rep.cpd_at_sum);
      report.add_check("unit_relation", rep.unit_residual <= 1e-9,
                       rep.unit_residual, 1e-9);
      report.add_check("embedding", rep.embed_residual <= 1e-9,
                       rep.embed_residual, 1e-9);
      report.set_dimension("gns_s", rep.dim_s);
      report.set_dimension("gns_t", rep.dim_t);
      report.set_dimension("gns_sum", rep.dim_sum);
      report.set_dimension("tensor", rep.dim_tensor);
      return rep.unit_residual <= 1e-9 && rep.embed_residual <= 1e-9;
    }
    const LinMap gen = linmap_from_json(doc);
    const SubproductReport rep = subproduct_check(gen, s, t, ctx->tol);
    report.add_flag("cp_on_grid", rep.cp_at_s && rep.cp_at_t && rep.cp_at_sum);
    report.add_check("unit_relation", rep.unit_residual <= 1e-9,
                     rep.unit_residual, 1e-9);
    report.add_check("embedding", rep.embed_residual <= 1e-9,
                     rep.embed_residual, 1e-9);
    report.add_flag("embedding_unitary", rep.embedding_unitary,
                    rep.embedding_unitary ? "unitary" : "proper isometry");
    report.set_dimension("gns_s", rep.dim_s);
    report.set_dimension("gns_t", rep.dim_t);
    report.set_dimension("gns_sum", rep.dim_sum);
    report.set_dimension("tensor", rep.dim_tensor);
    // a strict embedding is not a failure; only residuals gate the verdict
    return rep.unit_residual <= 1e-9 && rep.embed_residual <= 1e-9;
  });
}

int opk_star(opk_ctx *ctx, const char *subcommand, const char *task_json,
             char **report_json) {
  const std::string sub = subcommand ? subcommand : "";
  return run_guarded(ctx, "star " + sub, report_json, [&](Report &report) {
    const json task = parse_input(task_json, "task");
    const StarAlgebra a = star_algebra_from_json(task.at("algebra"));
    if (sub == "gns") {
      const std::vector<StarFunctional> fs =
          functionals_from_json(json::array({task.at("functional")}));
      const StarGnsRep rep = gns_functional(a, fs.front(), ctx->tol);
      report.set_dimension("gns_dim", rep.dim);
      report.add_flag("positive_functional", true);
      return true;
    }
    if (sub == "separated") {
      const std::vector<StarFunctional> fs =
          functionals_from_json(task.at("functionals"));
      const SeparationReport rep = is_s_separated(a, fs, ctx->tol);
      report.add_flag("separated", rep.separated,
                      "joint rank " + std::to_string(rep.joint_rank) + "/" +
                          std::to_string(a.dim));
      report.set_dimension("kernel_dim", rep.kernel_basis.size());
      return rep.separated;
    }
    if (sub == "spositive") {
      const std::vector<StarFunctional> fs =
          functionals_from_json(task.at("functionals"));
      const CMatrix b = cmatrix_from_json(task.at("element"));
      const SPositivityReport rep = is_s_positive(b, a, fs, ctx->tol);
      report.add_flag("s_positive", rep.positive,
                      rep.hermitian
                          ? "min eigenvalue " +
                                std::to_string(rep.min_eigenvalue)
                          : "represented element is not hermitian");
      return rep.positive;
    }
    if (sub == "sqrt") {
      const std::vector<StarFunctional> fs =
          functionals_from_json(task.at("functionals"));
      const CMatrix b = cmatrix_from_json(task.at("element"));
      const SSquareRoot root = s_square_root(b, a, fs, ctx->tol);
      report.add_check("square_reconstruction", root.residual <= 1e-10,
                       root.residual, 1e-10);
      report.set_dimension("root_space", root.h_dim);
      report.set_info("beta", to_json(root.beta));
      return root.residual <= 1e-10;
    }
    if (sub == "kolmogorov") {
      const StarAlgebra cal_a = star_algebra_from_json(task.at("left_algebra"));
      const std::vector<StarFunctional> fs =
          functionals_from_json(task.at("functionals"));
      const StarMapKernel kernel = star_kernel_from_json(task.at("kernel"));
      const StarKolmogorov dec =
          kolmogorov_star(cal_a, kernel, a, fs, ctx->tol);
      report.add_check("display_identity", dec.residual <= 1e-9,
                       dec.residual, 1e-9);
      report.set_dimension("g_dim", dec.g_dim);
      report.set_dimension("h_dim", dec.h_dim);
      report.set_dimension("probe_family", dec.probe_family);
      return dec.residual <= 1e-9;
    }
    throw OpkError(ErrorCode::InvalidInput,
                   "unknown star subcommand '" + sub + "'");
  });
}

int opk_selftest(opk_ctx *ctx, char **report_json) {
  if (!ctx) return OPK_INTERNAL_ERROR;
  ctx->last_error.clear();
  try {
    const SelftestResult result = run_selftest(ctx->seed, ctx->tol);
    emit(report_json, selftest_report(result, ctx->seed));
    return result.all_pass ? OPK_OK : OPK_CHECK_FAILED;
  } catch (const OpkError &err) {
    ctx->last_error = err.what();
    return is_math_error(err.code()) ? OPK_CHECK_FAILED : OPK_INVALID_INPUT;
  } catch (const std::exception &err) {
    ctx->last_error = err.what();
    return OPK_INTERNAL_ERROR;
  }
}

}  // extern "C"
