#include "opkernel/json_io.hpp"

#include <sstream>

namespace opkernel {

namespace {

void require_fields(const json &j, std::initializer_list<const char *> keys,
                    const char *what) {
  if (!j.is_object())
    throw OpkError(ErrorCode::InvalidInput,
                   std::string(what) + ": expected a JSON object");
  for (const char *key : keys)
    if (!j.contains(key))
      throw OpkError(ErrorCode::InvalidInput,
                     std::string(what) + ": missing field '" + key + "'");
}

json complex_vector_to_json(const CMatrix &column) {
  json re = json::array(), im = json::array();
  for (std::size_t i = 0; i < column.rows(); ++i) {
    re.push_back(column(i, 0).real());
    im.push_back(column(i, 0).imag());
  }
  return json{{"re", re}, {"im", im}};
}

CMatrix complex_vector_from_json(const json &j, const char *what) {
  require_fields(j, {"re", "im"}, what);
  const auto &re = j.at("re");
  const auto &im = j.at("im");
  if (!re.is_array() || !im.is_array() || re.size() != im.size())
    throw OpkError(ErrorCode::InvalidInput,
                   std::string(what) + ": re/im must be arrays of equal size");
  CMatrix out(re.size(), 1);
  for (std::size_t i = 0; i < re.size(); ++i)
    out(i, 0) = cplx(re[i].get<double>(), im[i].get<double>());
  return out;
}

}  // namespace

json to_json(const CMatrix &m) {
  json re = json::array(), im = json::array();
  for (const auto &v : m.data()) {
    re.push_back(v.real());
    im.push_back(v.imag());
  }
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"re", re}, {"im", im}};
}

CMatrix cmatrix_from_json(const json &j) {
  require_fields(j, {"rows", "cols", "re", "im"}, "matrix");
  const std::size_t rows = j.at("rows").get<std::size_t>();
  const std::size_t cols = j.at("cols").get<std::size_t>();
  const auto &re = j.at("re");
  const auto &im = j.at("im");
  if (!re.is_array() || !im.is_array() || re.size() != rows * cols ||
      im.size() != rows * cols)
    throw OpkError(ErrorCode::InvalidInput,
                   "matrix: re/im must hold rows*cols entries");
  CMatrix out(rows, cols);
  for (std::size_t i = 0; i < rows * cols; ++i)
    out.data()[i] = cplx(re[i].get<double>(), im[i].get<double>());
  if (!out.is_finite())
    throw OpkError(ErrorCode::NonFinite, "matrix has non-finite entries");
  return out;
}

json to_json(const AlgebraShape &shape) {
  return json{{"blocks", shape.block_dims}};
}

AlgebraShape shape_from_json(const json &j) {
  require_fields(j, {"blocks"}, "shape");
  AlgebraShape shape;
  for (const auto &v : j.at("blocks")) {
    const long long n = v.get<long long>();
    if (n <= 0)
      throw OpkError(ErrorCode::InvalidInput,
                     "shape: block dimensions must be positive");
    shape.block_dims.push_back(static_cast<std::size_t>(n));
  }
  if (shape.block_dims.empty())
    throw OpkError(ErrorCode::InvalidInput, "shape: needs at least one block");
  return shape;
}

json to_json(const AlgElement &a) {
  json blocks = json::array();
  for (const auto &b : a.blocks()) blocks.push_back(to_json(b));
  return blocks;
}

AlgElement element_from_json(const AlgebraShape &shape, const json &j) {
  if (!j.is_array() || j.size() != shape.num_blocks())
    throw OpkError(ErrorCode::InvalidInput,
                   "element: expected one matrix per block");
  std::vector<CMatrix> blocks;
  for (const auto &b : j) blocks.push_back(cmatrix_from_json(b));
  return AlgElement(shape, std::move(blocks));
}

json to_json(const Functional &phi) {
  json densities = json::array();
  for (const auto &d : phi.densities) densities.push_back(to_json(d));
  return json{{"shape", to_json(phi.shape)}, {"densities", densities}};
}

Functional functional_from_json(const json &j) {
  require_fields(j, {"shape", "densities"}, "functional");
  Functional phi;
  phi.shape = shape_from_json(j.at("shape"));
  for (const auto &d : j.at("densities"))
    phi.densities.push_back(cmatrix_from_json(d));
  validate_functional(phi);
  return phi;
}

json to_json(const HilbertModule &m) {
  return json{{"right", to_json(m.right)}, {"ambient", m.ambient}};
}

HilbertModule module_from_json(const json &j) {
  require_fields(j, {"right", "ambient"}, "module");
  HilbertModule m;
  m.right = shape_from_json(j.at("right"));
  for (const auto &v : j.at("ambient"))
    m.ambient.push_back(v.get<std::size_t>());
  if (m.ambient.size() != m.right.num_blocks())
    throw OpkError(ErrorCode::InvalidInput,
                   "module: ambient size must match the block count");
  return m;
}

json vector_to_json(const ModVector &x) {
  json blocks = json::array();
  for (const auto &b : x.blocks()) blocks.push_back(to_json(b));
  return blocks;
}

ModVector vector_from_json(const HilbertModule &module, const json &j) {
  if (!j.is_array() || j.size() != module.right.num_blocks())
    throw OpkError(ErrorCode::InvalidInput,
                   "vector: expected one matrix per block");
  std::vector<CMatrix> blocks;
  for (const auto &b : j) blocks.push_back(cmatrix_from_json(b));
  return ModVector(module, std::move(blocks));
}

json to_json(const Correspondence &corr) {
  json action = json::array();
  for (const auto &per_block : corr.action.mats) {
    json mats = json::array();
    for (const auto &m : per_block) mats.push_back(to_json(m));
    action.push_back(mats);
  }
  return json{{"right", to_json(corr.module.right)},
              {"ambient", corr.module.ambient},
              {"left", to_json(corr.action.left)},
              {"action", action}};
}

Correspondence correspondence_from_json(const json &j) {
  require_fields(j, {"right", "ambient", "left", "action"}, "correspondence");
  Correspondence corr;
  corr.module = module_from_json(j);
  corr.action.left = shape_from_json(j.at("left"));
  const auto &action = j.at("action");
  if (!action.is_array() || action.size() != corr.module.right.num_blocks())
    throw OpkError(ErrorCode::InvalidInput,
                   "correspondence: action needs one entry per block");
  const std::size_t dim = corr.action.left.dim();
  for (const auto &per_block : action) {
    if (!per_block.is_array() || per_block.size() != dim)
      throw OpkError(ErrorCode::InvalidInput,
                     "correspondence: action needs one matrix per unit");
    std::vector<CMatrix> mats;
    for (const auto &m : per_block) mats.push_back(cmatrix_from_json(m));
    corr.action.mats.push_back(std::move(mats));
  }
  validate_left_action(corr.action, corr.module.ambient);
  return corr;
}

namespace {

std::vector<std::string> points_from_json(const json &j) {
  std::vector<std::string> points;
  for (const auto &p : j) points.push_back(p.get<std::string>());
  if (points.empty())
    throw OpkError(ErrorCode::InvalidInput, "kernel: empty point set");
  return points;
}

}  // namespace

json to_json(const OpKernel &k) {
  json entries = json::object();
  for (std::size_t i = 0; i < k.size(); ++i)
    for (std::size_t j2 = 0; j2 < k.size(); ++j2)
      entries[k.points()[i] + "|" + k.points()[j2]] = to_json(k.at(i, j2));
  return json{{"points", k.points()},
              {"shape", to_json(k.shape())},
              {"entries", entries}};
}

OpKernel opkernel_from_json(const json &j) {
  require_fields(j, {"points", "shape", "entries"}, "kernel");
  const std::vector<std::string> points = points_from_json(j.at("points"));
  const AlgebraShape shape = shape_from_json(j.at("shape"));
  std::vector<AlgElement> entries;
  for (const auto &p : points)
    for (const auto &q : points) {
      const std::string key = p + "|" + q;
      if (!j.at("entries").contains(key))
        throw OpkError(ErrorCode::InvalidInput,
                       "kernel: missing entry '" + key + "'");
      entries.push_back(element_from_json(shape, j.at("entries").at(key)));
    }
  return OpKernel::symmetrized(points, shape, std::move(entries));
}

json to_json(const LinMap &t) {
  return json{{"from", to_json(t.from)},
              {"to", to_json(t.to)},
              {"action", to_json(t.action)}};
}

LinMap linmap_from_json(const json &j) {
  require_fields(j, {"from", "to", "action"}, "map");
  LinMap t;
  t.from = shape_from_json(j.at("from"));
  t.to = shape_from_json(j.at("to"));
  t.action = cmatrix_from_json(j.at("action"));
  if (t.action.rows() != t.to.dim() || t.action.cols() != t.from.dim())
    throw OpkError(ErrorCode::InvalidInput,
                   "map: action must be dim(to) x dim(from)");
  return t;
}

json to_json(const MapKernel &k) {
  json entries = json::object();
  for (std::size_t i = 0; i < k.size(); ++i)
    for (std::size_t j2 = 0; j2 < k.size(); ++j2)
      entries[k.points()[i] + "|" + k.points()[j2]] = to_json(k.at(i, j2));
  return json{{"points", k.points()}, {"entries", entries}};
}

MapKernel mapkernel_from_json(const json &j) {
  require_fields(j, {"points", "entries"}, "map kernel");
  const std::vector<std::string> points = points_from_json(j.at("points"));
  std::vector<LinMap> entries;
  for (const auto &p : points)
    for (const auto &q : points) {
      const std::string key = p + "|" + q;
      if (!j.at("entries").contains(key))
        throw OpkError(ErrorCode::InvalidInput,
                       "map kernel: missing entry '" + key + "'");
      entries.push_back(linmap_from_json(j.at("entries").at(key)));
    }
  return MapKernel::symmetrized(points, std::move(entries));
}

json to_json(const ScalarGenerator &gen) {
  return json{{"points", gen.points}, {"matrix", to_json(gen.matrix)}};
}

ScalarGenerator scalar_generator_from_json(const json &j) {
  require_fields(j, {"points", "matrix"}, "generator");
  ScalarGenerator gen;
  gen.points = points_from_json(j.at("points"));
  gen.matrix = cmatrix_from_json(j.at("matrix"));
  if (gen.matrix.rows() != gen.points.size() ||
      gen.matrix.cols() != gen.points.size())
    throw OpkError(ErrorCode::InvalidInput,
                   "generator: matrix must be |S| x |S|");
  return gen;
}

json to_json(const StarAlgebra &a) {
  json mult = json::array();
  for (const auto &row : a.mult) {
    json jrow = json::array();
    for (const auto &col : row) jrow.push_back(complex_vector_to_json(col));
    mult.push_back(jrow);
  }
  return json{{"dim", a.dim},
              {"mult", mult},
              {"star", to_json(a.star)},
              {"unit", complex_vector_to_json(a.unit)}};
}

StarAlgebra star_algebra_from_json(const json &j) {
  require_fields(j, {"dim", "mult", "star", "unit"}, "star algebra");
  StarAlgebra a;
  a.dim = j.at("dim").get<std::size_t>();
  const auto &mult = j.at("mult");
  if (!mult.is_array() || mult.size() != a.dim)
    throw OpkError(ErrorCode::InvalidInput,
                   "star algebra: mult must be dim x dim");
  for (const auto &row : mult) {
    if (!row.is_array() || row.size() != a.dim)
      throw OpkError(ErrorCode::InvalidInput,
                     "star algebra: mult must be dim x dim");
    std::vector<CMatrix> cols;
    for (const auto &c : row) {
      CMatrix v = complex_vector_from_json(c, "structure constants");
      if (v.rows() != a.dim)
        throw OpkError(ErrorCode::InvalidInput,
                       "star algebra: structure constant length");
      cols.push_back(std::move(v));
    }
    a.mult.push_back(std::move(cols));
  }
  a.star = cmatrix_from_json(j.at("star"));
  a.unit = complex_vector_from_json(j.at("unit"), "unit");
  validate_star_algebra(a);
  return a;
}

json to_json(const StarFunctional &phi) {
  CMatrix col(phi.covector.cols(), 1);
  for (std::size_t i = 0; i < phi.covector.cols(); ++i)
    col(i, 0) = phi.covector(0, i);
  return complex_vector_to_json(col);
}

std::vector<StarFunctional> functionals_from_json(const json &j) {
  if (!j.is_array())
    throw OpkError(ErrorCode::InvalidInput,
                   "functionals: expected an array of covectors");
  std::vector<StarFunctional> out;
  for (const auto &f : j) {
    const CMatrix col = complex_vector_from_json(f, "functional");
    StarFunctional phi;
    phi.covector = CMatrix(1, col.rows());
    for (std::size_t i = 0; i < col.rows(); ++i) phi.covector(0, i) = col(i, 0);
    out.push_back(std::move(phi));
  }
  return out;
}

StarMapKernel star_kernel_from_json(const json &j) {
  require_fields(j, {"points", "entries"}, "star kernel");
  StarMapKernel k;
  k.points = points_from_json(j.at("points"));
  for (const auto &p : k.points)
    for (const auto &q : k.points) {
      const std::string key = p + "|" + q;
      if (!j.at("entries").contains(key))
        throw OpkError(ErrorCode::InvalidInput,
                       "star kernel: missing entry '" + key + "'");
      k.entries.push_back(cmatrix_from_json(j.at("entries").at(key)));
    }
  return k;
}

json decomposition_to_json(const Decomposition &d,
                           const std::vector<std::string> &points) {
  json pts = json::object();
  for (std::size_t i = 0; i < points.size(); ++i)
    pts[points[i]] = vector_to_json(d.point_map[i]);
  return json{{"module", to_json(d.module)},
              {"points", pts},
              {"minimal", d.minimal}};
}

json gns_to_json(const GnsData &g, const std::vector<std::string> &points) {
  json pts = json::object();
  for (std::size_t i = 0; i < points.size(); ++i)
    pts[points[i]] = vector_to_json(g.point_map[i]);
  return json{{"correspondence", to_json(g.corr)},
              {"points", pts},
              {"minimal", g.minimal},
              {"residual", g.residual}};
}

json parse_json(const std::string &text) {
  try {
    return json::parse(text);
  } catch (const std::exception &err) {
    throw OpkError(ErrorCode::InvalidInput,
                   std::string("JSON parse failure: ") + err.what());
  }
}

//=========================================================================
// Reports
//=========================================================================

Report::Report(std::string command) {
  doc_["command"] = std::move(command);
  doc_["checks"] = json::array();
  doc_["dimensions"] = json::object();
}

void Report::add_check(const std::string &name, bool pass, double residual,
                       double tolerance, const std::string &witness) {
  json rec{{"name", name},
           {"pass", pass},
           {"residual", residual},
           {"tolerance", tolerance}};
  if (!witness.empty()) rec["witness"] = witness;
  doc_["checks"].push_back(std::move(rec));
  all_pass_ = all_pass_ && pass;
}

void Report::add_flag(const std::string &name, bool pass,
                      const std::string &witness) {
  json rec{{"name", name}, {"pass", pass}};
  if (!witness.empty()) rec["witness"] = witness;
  doc_["checks"].push_back(std::move(rec));
  all_pass_ = all_pass_ && pass;
}

void Report::set_dimension(const std::string &name, std::size_t value) {
  doc_["dimensions"][name] = value;
}

void Report::set_info(const std::string &name, const json &value) {
  doc_[name] = value;
}

json Report::finalize(double elapsed_ms) {
  doc_["pass"] = all_pass_;
  doc_["timing_ms"] = elapsed_ms;
  return doc_;
}

}  // namespace opkernel
