#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "sradam/model.hpp"
#include "sradam/optim.hpp"
#include "sradam/risk.hpp"
#include "sradam/rng.hpp"
#include "sradam/stats.hpp"
#include "sradam/stein.hpp"
#include "sradam/vec.hpp"

namespace py = pybind11;
using namespace sradam;

namespace {

std::string vec_repr(const ParamVector& v) {
  std::ostringstream os;
  os << "ParamVector([";
  const std::size_t shown = std::min<std::size_t>(v.size(), 8);
  for (std::size_t i = 0; i < shown; ++i) {
    if (i) os << ", ";
    os << v[i];
  }
  if (shown < v.size()) os << ", ...";
  os << "], size=" << v.size() << ")";
  return os.str();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Shrunk-gradient optimizer core: vectors, rng, shrinkage, "
            "optimizer steps, estimator risk lab, and paired statistics.";
  m.attr("__version__") = "0.1.0";

  // ---- vectors and groups ----
  py::class_<ParamVector>(m, "ParamVector",
                          "Immutable dense vector of finite doubles.")
      .def(py::init<std::vector<double>>(), py::arg("values"))
      .def_static("zeros", &ParamVector::zeros, py::arg("n"))
      .def_static("constant", &ParamVector::constant, py::arg("n"),
                  py::arg("value"))
      .def("__len__", &ParamVector::size)
      .def("__getitem__",
           [](const ParamVector& v, std::size_t i) {
             if (i >= v.size()) throw py::index_error();
             return v[i];
           })
      .def("values", [](const ParamVector& v) { return v.values(); },
           "Copy out the underlying list of doubles.")
      .def("__eq__",
           [](const ParamVector& a, const ParamVector& b) { return a == b; })
      .def("__repr__", &vec_repr);
  py::implicitly_convertible<py::list, ParamVector>();
  py::implicitly_convertible<py::tuple, ParamVector>();

  py::enum_<GroupKind>(m, "GroupKind")
      .value("ConvWeight", GroupKind::ConvWeight)
      .value("DenseWeight", GroupKind::DenseWeight)
      .value("Bias", GroupKind::Bias)
      .value("Other", GroupKind::Other);
  m.def("group_kind_label",
        [](GroupKind k) { return std::string(to_string(k)); });

  py::class_<ParamGroup>(m, "ParamGroup")
      .def(py::init<>())
      .def(py::init<std::string, std::size_t, GroupKind>(), py::arg("id"),
           py::arg("dim"), py::arg("kind"))
      .def_readwrite("id", &ParamGroup::id)
      .def_readwrite("dim", &ParamGroup::dim)
      .def_readwrite("kind", &ParamGroup::kind)
      .def_readwrite("shrinkage_enabled", &ParamGroup::shrinkage_enabled);

  m.def("axpy", &axpy, py::arg("a"), py::arg("x"), py::arg("y"),
        "a*x + y elementwise.");
  m.def("sq_norm", &sq_norm, py::arg("x"));
  m.def("dot", &dot, py::arg("x"), py::arg("y"));

  // ---- rng ----
  py::class_<Rng>(m, "Rng", "Deterministic xoshiro256++ stream.")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def("next_u64", &Rng::next_u64)
      .def("uniform", &Rng::uniform)
      .def("normal", &Rng::normal)
      .def_property_readonly("seed", &Rng::seed)
      .def("child",
           [](const Rng& r, std::uint64_t stream) { return r.child(stream); },
           py::arg("stream"))
      .def("child",
           [](const Rng& r, const std::string& tag) { return r.child(tag); },
           py::arg("tag"));
  m.def("mix64", &mix64, py::arg("z"));
  m.def("fnv1a64", [](const std::string& s) { return fnv1a64(s); },
        py::arg("bytes"));
  m.def("inverse_normal_cdf", &inverse_normal_cdf, py::arg("p"));
  m.def("gauss_vec", &gauss_vec, py::arg("rng"), py::arg("dim"),
        py::arg("mean"), py::arg("std"));

  // ---- shrinkage ----
  py::class_<ShrinkageConfig>(m, "ShrinkageConfig")
      .def(py::init<>())
      .def_readwrite("clip_floor", &ShrinkageConfig::clip_floor)
      .def_readwrite("clip_ceil", &ShrinkageConfig::clip_ceil)
      .def_readwrite("whiten", &ShrinkageConfig::whiten)
      .def_readwrite("eps", &ShrinkageConfig::eps)
      .def_readwrite("min_dim", &ShrinkageConfig::min_dim)
      .def("validate", &ShrinkageConfig::validate);

  py::class_<ShrinkageReport>(m, "ShrinkageReport")
      .def(py::init<>())
      .def_readonly("d_n", &ShrinkageReport::d_n)
      .def_readonly("sigma2_hat", &ShrinkageReport::sigma2_hat)
      .def_readonly("c_raw", &ShrinkageReport::c_raw)
      .def_readonly("c_clipped", &ShrinkageReport::c_clipped)
      .def_readonly("applied", &ShrinkageReport::applied)
      .def("__repr__", [](const ShrinkageReport& r) {
        std::ostringstream os;
        os << "ShrinkageReport(c_clipped=" << r.c_clipped
           << ", applied=" << (r.applied ? "True" : "False") << ")";
        return os.str();
      });

  m.def("divergence", &divergence, py::arg("g"), py::arg("m_prev"));
  m.def("sigma2_global", &sigma2_global, py::arg("m"), py::arg("v"));
  m.def("shrink_factor", &shrink_factor, py::arg("p"), py::arg("sigma2"),
        py::arg("d_n"), py::arg("cfg"));
  m.def("stein_estimate", &stein_estimate, py::arg("g"), py::arg("m_prev"),
        py::arg("c"));
  m.def("whitened_shrink", &whitened_shrink, py::arg("g"), py::arg("m_prev"),
        py::arg("v_prev"), py::arg("cfg"));
  m.def("apply_shrinkage", &apply_shrinkage, py::arg("g"), py::arg("m_prev"),
        py::arg("v_prev"), py::arg("cfg"),
        "Returns (shrunk_gradient, report).");

  // ---- optimizer steps ----
  py::enum_<Scope>(m, "Scope")
      .value("ConvOnly", Scope::ConvOnly)
      .value("AllWeights", Scope::AllWeights)
      .value("NoGroups", Scope::None);  // `None` is reserved in python
  m.def("scope_label", [](Scope s) { return std::string(to_string(s)); });

  py::class_<MomentState>(m, "MomentState")
      .def_static("zeros", &MomentState::zeros, py::arg("dim"))
      .def_readwrite("m", &MomentState::m)
      .def_readwrite("v", &MomentState::v)
      .def_readwrite("t", &MomentState::t);

  py::class_<MomentumState>(m, "MomentumState")
      .def_static("zeros", &MomentumState::zeros, py::arg("dim"))
      .def_readwrite("buf", &MomentumState::buf)
      .def_readwrite("t", &MomentumState::t);

  py::class_<OptimConfig>(m, "OptimConfig")
      .def(py::init<>())
      .def_readwrite("alpha", &OptimConfig::alpha)
      .def_readwrite("beta1", &OptimConfig::beta1)
      .def_readwrite("beta2", &OptimConfig::beta2)
      .def_readwrite("eps", &OptimConfig::eps)
      .def_readwrite("weight_decay", &OptimConfig::weight_decay)
      .def_readwrite("momentum", &OptimConfig::momentum)
      .def_readwrite("tau", &OptimConfig::tau)
      .def_readwrite("bias_correction", &OptimConfig::bias_correction)
      .def_readwrite("v_uses_raw_grad", &OptimConfig::v_uses_raw_grad)
      .def_readwrite("shrinkage", &OptimConfig::shrinkage)
      .def_readwrite("scope", &OptimConfig::scope)
      .def("validate", &OptimConfig::validate);

  py::class_<StepTrace>(m, "StepTrace")
      .def_readonly("group_id", &StepTrace::group_id)
      .def_readonly("shrinkage", &StepTrace::shrinkage)
      .def_readonly("update_norm", &StepTrace::update_norm);

  py::class_<AdamResult>(m, "AdamResult")
      .def_readonly("theta", &AdamResult::theta)
      .def_readonly("state", &AdamResult::state)
      .def_readonly("trace", &AdamResult::trace);

  m.def("sgd_step", &sgd_step, py::arg("theta"), py::arg("g"),
        py::arg("alpha"));
  m.def("momentum_step", &momentum_step, py::arg("theta"), py::arg("g"),
        py::arg("state"), py::arg("alpha"), py::arg("mu"),
        "Returns (theta, state).");
  m.def("adam_step", &adam_step, py::arg("theta"), py::arg("g"),
        py::arg("state"), py::arg("cfg"));
  m.def("sr_adam_step", &sr_adam_step, py::arg("theta"), py::arg("g"),
        py::arg("state"), py::arg("cfg"), py::arg("group"));
  m.def("apply_scope", &apply_scope, py::arg("groups"), py::arg("scope"));

  py::enum_<OptimizerKind>(m, "OptimizerKind")
      .value("Sgd", OptimizerKind::Sgd)
      .value("Momentum", OptimizerKind::Momentum)
      .value("Adam", OptimizerKind::Adam)
      .value("SrAdam", OptimizerKind::SrAdam);
  m.def("optimizer_kind_label",
        [](OptimizerKind k) { return std::string(to_string(k)); });

  py::class_<Optimizer>(m, "Optimizer")
      .def(py::init<OptimizerKind, OptimConfig,
                    const std::vector<ParamGroup>&>(),
           py::arg("kind"), py::arg("cfg"), py::arg("groups"))
      .def("step",
           [](Optimizer& opt, std::vector<ParamVector> params,
              const std::vector<ParamVector>& grads) {
             auto traces = opt.step(params, grads);
             return std::make_pair(std::move(params), std::move(traces));
           },
           py::arg("params"), py::arg("grads"),
           "Steps every group; returns (updated_params, traces).")
      .def_property_readonly("kind", &Optimizer::kind)
      .def_property_readonly("config", &Optimizer::config)
      .def_property_readonly("groups", &Optimizer::groups);

  // ---- statistics ----
  m.def("mean", [](const std::vector<double>& xs) { return mean(xs); },
        py::arg("xs"));
  m.def("sample_std",
        [](const std::vector<double>& xs) { return sample_std(xs); },
        py::arg("xs"));
  m.def("std_error",
        [](const std::vector<double>& xs) { return std_error(xs); },
        py::arg("xs"));
  m.def("regularized_incomplete_beta", &regularized_incomplete_beta,
        py::arg("a"), py::arg("b"), py::arg("x"));
  m.def("student_t_cdf", &student_t_cdf, py::arg("t"), py::arg("dof"));
  m.def("student_t_two_sided_p", &student_t_two_sided_p, py::arg("t"),
        py::arg("dof"));

  py::class_<TTestResult>(m, "TTestResult")
      .def_readonly("t", &TTestResult::t)
      .def_readonly("p", &TTestResult::p)
      .def_readonly("mean_diff", &TTestResult::mean_diff)
      .def_readonly("n", &TTestResult::n)
      .def_readonly("degenerate", &TTestResult::degenerate);
  m.def("paired_ttest",
        [](const std::vector<double>& a, const std::vector<double>& b) {
          return paired_ttest(a, b);
        },
        py::arg("a"), py::arg("b"));

  // ---- estimator risk lab ----
  py::enum_<EstimatorKind>(m, "EstimatorKind")
      .value("UE", EstimatorKind::UE)
      .value("JS", EstimatorKind::JS)
      .value("JSPlus", EstimatorKind::JSPlus)
      .value("Bayes", EstimatorKind::Bayes);
  m.def("estimator_label", &estimator_label, py::arg("kind"), py::arg("tau2"));

  py::class_<RiskEstimate>(m, "RiskEstimate")
      .def_readonly("estimator", &RiskEstimate::estimator)
      .def_readonly("tau2", &RiskEstimate::tau2)
      .def_readonly("p", &RiskEstimate::p)
      .def_readonly("sigma2", &RiskEstimate::sigma2)
      .def_readonly("mu_norm", &RiskEstimate::mu_norm)
      .def_readonly("trials", &RiskEstimate::trials)
      .def_readonly("mse", &RiskEstimate::mse)
      .def_readonly("std_err", &RiskEstimate::std_err);

  m.def("estimate_risk", &estimate_risk, py::arg("est"), py::arg("p"),
        py::arg("sigma2"), py::arg("mu"), py::arg("trials"), py::arg("rng"),
        py::arg("tau2") = 1.0);
  m.def("bayes_risk_closed_form", &bayes_risk_closed_form, py::arg("p"),
        py::arg("tau2"), py::arg("sigma2"));
  m.def("bayes_estimator", &bayes_estimator, py::arg("y"), py::arg("tau2"),
        py::arg("sigma2"));
  m.def("bayes_risk_mc", &bayes_risk_mc, py::arg("p"), py::arg("tau2"),
        py::arg("sigma2"), py::arg("trials"), py::arg("rng"));
  m.def("risk_curve",
        [](EstimatorKind est, std::size_t p, double sigma2,
           const std::vector<double>& grid, std::size_t trials,
           std::uint64_t seed, double tau2) {
          return risk_curve(est, p, sigma2, grid, trials, seed, tau2);
        },
        py::arg("est"), py::arg("p"), py::arg("sigma2"), py::arg("grid"),
        py::arg("trials"), py::arg("seed"), py::arg("tau2") = 1.0);
  m.def("risk_csv",
        [](const std::vector<RiskEstimate>& rows) { return risk_csv(rows); },
        py::arg("rows"));

  // ---- moment-EMA and convergence simulations ----
  py::class_<VarianceTrace>(m, "VarianceTrace")
      .def_readonly("step", &VarianceTrace::step)
      .def_readonly("sigma2_hat", &VarianceTrace::sigma2_hat)
      .def_readonly("rel_err", &VarianceTrace::rel_err)
      .def_readonly("final_sigma2", &VarianceTrace::final_sigma2)
      .def_readonly("final_rel_err", &VarianceTrace::final_rel_err);
  m.def("variance_consistency_sim", &variance_consistency_sim, py::arg("p"),
        py::arg("beta1"), py::arg("beta2"), py::arg("steps"),
        py::arg("true_var"), py::arg("rng"), py::arg("mean_g") = 1.0,
        py::arg("log_every") = 0);

  py::class_<QuadObjective>(m, "QuadObjective")
      .def(py::init<ParamVector, ParamVector>(), py::arg("optimum"),
           py::arg("curvature"))
      .def_static("log_spaced", &QuadObjective::log_spaced, py::arg("p"),
                  py::arg("a_min"), py::arg("a_max"))
      .def_readonly("optimum", &QuadObjective::optimum)
      .def_readonly("curvature", &QuadObjective::curvature)
      .def("validate", &QuadObjective::validate)
      .def("value", &QuadObjective::value, py::arg("theta"))
      .def("grad", &QuadObjective::grad, py::arg("theta"));

  py::class_<Schedule> schedule(m, "Schedule");
  py::enum_<Schedule::Kind>(schedule, "Kind")
      .value("Constant", Schedule::Kind::Constant)
      .value("Power", Schedule::Kind::Power);
  schedule.def(py::init<>())
      .def_readwrite("kind", &Schedule::kind)
      .def_readwrite("alpha0", &Schedule::alpha0)
      .def_readwrite("r", &Schedule::r)
      .def("validate", &Schedule::validate)
      .def("at", &Schedule::at, py::arg("t"))
      .def("robbins_monro", &Schedule::robbins_monro);

  py::enum_<SimOptimizer>(m, "SimOptimizer")
      .value("Sgd", SimOptimizer::Sgd)
      .value("Adam", SimOptimizer::Adam)
      .value("SrAdam", SimOptimizer::SrAdam);

  py::class_<ConvergenceTrace>(m, "ConvergenceTrace")
      .def_readonly("grad_norm", &ConvergenceTrace::grad_norm)
      .def_readonly("min_grad_norm", &ConvergenceTrace::min_grad_norm)
      .def_readonly("argmin_step", &ConvergenceTrace::argmin_step);
  m.def("convergence_sim", &convergence_sim, py::arg("obj"), py::arg("opt"),
        py::arg("sched"), py::arg("noise_sigma"), py::arg("steps"),
        py::arg("rng"), py::arg("cfg") = OptimConfig{});

  // ---- model structure ----
  py::class_<ModelSpec>(m, "ModelSpec")
      .def_static("simple_cnn", &ModelSpec::simple_cnn, py::arg("in_ch") = 3,
                  py::arg("hw") = 32, py::arg("classes") = 10)
      .def_static("mlp", &ModelSpec::mlp, py::arg("in_dim"), py::arg("hidden"),
                  py::arg("classes"))
      .def_static("logistic", &ModelSpec::logistic, py::arg("in_dim"),
                  py::arg("classes"))
      .def_readonly("id", &ModelSpec::id)
      .def_readonly("in_ch", &ModelSpec::in_ch)
      .def_readonly("in_h", &ModelSpec::in_h)
      .def_readonly("in_w", &ModelSpec::in_w)
      .def_readonly("num_classes", &ModelSpec::num_classes)
      .def("validate", &ModelSpec::validate)
      .def("param_groups", &ModelSpec::param_groups)
      .def("param_count", &ModelSpec::param_count);
  m.def("init_params", &init_params, py::arg("spec"), py::arg("rng"));
}
