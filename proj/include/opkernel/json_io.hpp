#ifndef OPKERNEL_JSON_IO_HPP
#define OPKERNEL_JSON_IO_HPP

#include <string>

#include "json.hpp"
#include "opkernel/cpd.hpp"
#include "opkernel/kernels.hpp"
#include "opkernel/semigroups.hpp"
#include "opkernel/starpos.hpp"

namespace opkernel {

// stable key order for machine-readable reports
using json = nlohmann::ordered_json;

json to_json(const CMatrix &m);
CMatrix cmatrix_from_json(const json &j);

json to_json(const AlgebraShape &shape);
AlgebraShape shape_from_json(const json &j);

json to_json(const AlgElement &a);
AlgElement element_from_json(const AlgebraShape &shape, const json &j);

json to_json(const Functional &phi);
Functional functional_from_json(const json &j);

json to_json(const HilbertModule &m);
HilbertModule module_from_json(const json &j);

json vector_to_json(const ModVector &x);
ModVector vector_from_json(const HilbertModule &module, const json &j);

json to_json(const Correspondence &corr);
Correspondence correspondence_from_json(const json &j);

json to_json(const OpKernel &k);
/// Ingestion symmetrizes the kernel entries.
OpKernel opkernel_from_json(const json &j);

json to_json(const LinMap &t);
LinMap linmap_from_json(const json &j);

json to_json(const MapKernel &k);
/// Ingestion symmetrizes the kernel entries.
MapKernel mapkernel_from_json(const json &j);

json to_json(const ScalarGenerator &gen);
ScalarGenerator scalar_generator_from_json(const json &j);

json to_json(const StarAlgebra &a);
/// Validates the algebra laws on load; invalid algebras are rejected.
StarAlgebra star_algebra_from_json(const json &j);

json to_json(const StarFunctional &phi);
std::vector<StarFunctional> functionals_from_json(const json &j);

StarMapKernel star_kernel_from_json(const json &j);

json decomposition_to_json(const Decomposition &d,
                           const std::vector<std::string> &points);
json gns_to_json(const GnsData &g, const std::vector<std::string> &points);

/// Parses a JSON document, mapping parse failures to InvalidInput.
json parse_json(const std::string &text);

//=========================================================================
// Reports
//=========================================================================

/**
 * Machine-readable check report with stable key order.  A check passes iff
 * its residual is within its tolerance (or it is a plain boolean verdict).
 */
class Report {
 public:
  explicit Report(std::string command);

  void add_check(const std::string &name, bool pass, double residual,
                 double tolerance, const std::string &witness = "");
  void add_flag(const std::string &name, bool pass,
                const std::string &witness = "");
  void set_dimension(const std::string &name, std::size_t value);
  void set_info(const std::string &name, const json &value);

  bool all_pass() const { return all_pass_; }
  /// Finalizes timing and returns the document.
  json finalize(double elapsed_ms);

 private:
  json doc_;
  bool all_pass_ = true;
};

}  // namespace opkernel

#endif
