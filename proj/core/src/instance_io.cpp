#include "dualpath/instance_io.hpp"

#include <fstream>

#include "dualpath/barriers.hpp"
#include "dualpath/rpc.hpp"

namespace dualpath::io {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& what) {
  throw Error(ErrorKind::kInvalidInstance, "instance: " + what);
}

json vec_json(const Vec& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json mat_json(const Mat& M) {
  json a = json::array();
  for (Index i = 0; i < M.rows(); ++i) {
    for (Index j = 0; j < M.cols(); ++j) a.push_back(M(i, j));
  }
  return a;
}

Vec vec_from(const json& j, const char* name) {
  if (!j.contains(name) || !j.at(name).is_array()) bad(std::string("missing array '") + name + "'");
  const json& a = j.at(name);
  Vec v(static_cast<Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i].is_number()) bad(std::string("non-numeric entry in '") + name + "'");
    v(static_cast<Index>(i)) = a[i].get<double>();
  }
  return v;
}

Mat mat_from(const json& j, const char* name, Index rows, Index cols) {
  if (!j.contains(name) || !j.at(name).is_array()) bad(std::string("missing matrix '") + name + "'");
  const json& a = j.at(name);
  Mat M(rows, cols);
  const bool nested = !a.empty() && a[0].is_array();
  if (nested) {
    if (static_cast<Index>(a.size()) != rows) bad(std::string("row count of '") + name + "'");
    for (Index i = 0; i < rows; ++i) {
      const json& r = a[static_cast<std::size_t>(i)];
      if (!r.is_array() || static_cast<Index>(r.size()) != cols) {
        bad(std::string("column count of '") + name + "'");
      }
      for (Index k = 0; k < cols; ++k) M(i, k) = r[static_cast<std::size_t>(k)].get<double>();
    }
  } else {
    if (static_cast<Index>(a.size()) != rows * cols) bad(std::string("size of '") + name + "'");
    for (Index i = 0; i < rows; ++i) {
      for (Index k = 0; k < cols; ++k) M(i, k) = a[static_cast<std::size_t>(i * cols + k)].get<double>();
    }
  }
  return M;
}

}  // namespace

json barrier_to_json(const Barrier& barrier) {
  if (auto* b = dynamic_cast<const OrthantBarrier*>(&barrier)) {
    return {{"kind", "orthant"}, {"n", b->dim()}};
  }
  if (auto* b = dynamic_cast<const IntervalBarrier*>(&barrier)) {
    return {{"kind", "interval"}, {"lower", vec_json(b->lower())}, {"upper", vec_json(b->upper())}};
  }
  if (auto* b = dynamic_cast<const HalfspaceBarrier*>(&barrier)) {
    return {{"kind", "halfspace"}, {"a", vec_json(b->a())}, {"d", b->d()}};
  }
  if (dynamic_cast<const LogEpigraphBarrier*>(&barrier)) return {{"kind", "log_epigraph"}};
  if (dynamic_cast<const EntropyEpigraphBarrier*>(&barrier)) return {{"kind", "entropy_epigraph"}};
  if (auto* b = dynamic_cast<const QuadEpigraphBarrier*>(&barrier)) {
    return {{"kind", "quad_epigraph"}, {"Q", mat_json(b->Q())}, {"q", vec_json(b->q())}, {"r", b->r()}};
  }
  if (auto* b = dynamic_cast<const ProductBarrier*>(&barrier)) {
    json f = json::array();
    for (const auto& p : b->factors()) f.push_back(barrier_to_json(*p));
    return {{"kind", "product"}, {"factors", f}};
  }
  if (auto* b = dynamic_cast<const SumBarrier*>(&barrier)) {
    json terms = json::array();
    for (const auto& t : b->terms()) {
      terms.push_back({{"barrier", barrier_to_json(*t.barrier)}, {"indices", t.indices}});
    }
    return {{"kind", "sum"}, {"dim", b->dim()}, {"terms", terms}};
  }
  bad("barrier kind '" + barrier.kind() + "' has no file descriptor");
}

BarrierPtr barrier_from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) bad("barrier without kind");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "orthant") {
    const Index n = j.value("n", Index{0});
    if (n <= 0) bad("orthant needs n > 0");
    return std::make_shared<OrthantBarrier>(n);
  }
  if (kind == "interval") return std::make_shared<IntervalBarrier>(vec_from(j, "lower"), vec_from(j, "upper"));
  if (kind == "halfspace") {
    if (!j.contains("d")) bad("halfspace needs d");
    return std::make_shared<HalfspaceBarrier>(vec_from(j, "a"), j.at("d").get<double>());
  }
  if (kind == "log_epigraph") return std::make_shared<LogEpigraphBarrier>();
  if (kind == "entropy_epigraph") return std::make_shared<EntropyEpigraphBarrier>();
  if (kind == "quad_epigraph") {
    Vec q = vec_from(j, "q");
    Mat Q = mat_from(j, "Q", q.size(), q.size());
    return std::make_shared<QuadEpigraphBarrier>(std::move(Q), std::move(q), j.value("r", 0.0));
  }
  if (kind == "product") {
    std::vector<BarrierPtr> factors;
    if (!j.contains("factors")) bad("product needs factors");
    for (const auto& f : j.at("factors")) factors.push_back(barrier_from_json(f));
    return std::make_shared<ProductBarrier>(std::move(factors));
  }
  if (kind == "sum") {
    const Index dim = j.value("dim", Index{0});
    std::vector<SumBarrier::Term> terms;
    if (!j.contains("terms")) bad("sum needs terms");
    for (const auto& t : j.at("terms")) {
      SumBarrier::Term term;
      term.barrier = barrier_from_json(t.at("barrier"));
      term.indices = t.at("indices").get<std::vector<Index>>();
      for (Index i : term.indices) {
        if (i < 0 || i >= dim) bad("sum term index out of range");
      }
      terms.push_back(std::move(term));
    }
    return std::make_shared<SumBarrier>(dim, std::move(terms));
  }
  bad("unknown barrier kind '" + kind + "'");
}

json problem_to_json(const SeparableProblem& problem) {
  json blocks = json::array();
  for (const auto& blk : problem.blocks) {
    json b = {{"n", blk.dim()},
              {"c", vec_json(blk.c)},
              {"A", mat_json(blk.A)},
              {"barrier", barrier_to_json(*blk.barrier)},
              {"x_start", vec_json(blk.x_start)}};
    if (blk.equality) {
      b["E"] = mat_json(blk.equality->E);
      b["f"] = vec_json(blk.equality->f);
    }
    blocks.push_back(std::move(b));
  }
  return {{"m", problem.m()}, {"b", vec_json(problem.b)}, {"blocks", blocks}};
}

SeparableProblem problem_from_json(const json& j) {
  if (!j.is_object()) bad("document is not an object");
  if (j.contains("links") || (j.contains("format") && j.at("format") == "rpc")) {
    return rpc::to_problem(rpc::from_json(j));
  }
  SeparableProblem p;
  p.b = vec_from(j, "b");
  const Index m = j.value("m", p.b.size());
  if (m != p.b.size()) bad("m does not match the length of b");
  if (!j.contains("blocks") || !j.at("blocks").is_array()) bad("missing blocks");
  for (const auto& jb : j.at("blocks")) {
    Block blk;
    blk.c = vec_from(jb, "c");
    const Index n = jb.value("n", blk.c.size());
    if (n != blk.c.size()) bad("block n does not match the length of c");
    blk.A = mat_from(jb, "A", m, n);
    blk.barrier = barrier_from_json(jb.at("barrier"));
    blk.x_start = vec_from(jb, "x_start");
    if (jb.contains("E")) {
      LocalEquality eq;
      eq.f = vec_from(jb, "f");
      eq.E = mat_from(jb, "E", eq.f.size(), n);
      blk.equality = std::move(eq);
    }
    p.blocks.push_back(std::move(blk));
  }
  return p;
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) bad("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    bad("parse error in '" + path + "': " + e.what());
  }
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kInvalidInstance, "cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

SeparableProblem load_problem(const std::string& path) {
  try {
    return problem_from_json(read_json(path));
  } catch (const json::exception& e) {
    bad(std::string("malformed document: ") + e.what());
  }
}

}  // namespace dualpath::io
