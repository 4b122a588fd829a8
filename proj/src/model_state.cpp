#include "sparsedp/model_state.hpp"

#include <cmath>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace sparsedp {

ClusterMeanVector::ClusterMeanVector(std::size_t p) : inner(p) {
  for (std::size_t j = 0; j < p; ++j)
    inner.attach_spike(j);
}

double ClusterMeanVector::component(std::size_t j) const {
  const ClusterId id = inner.cluster_of(j);
  return id == kSpike ? 0.0 : inner.value(id);
}

std::vector<double> ClusterMeanVector::dense() const {
  std::vector<double> out(p());
  dense_into(out);
  return out;
}

void ClusterMeanVector::dense_into(std::span<double> out) const {
  for (std::size_t j = 0; j < p(); ++j)
    out[j] = component(j);
}

void ClusterMeanVector::validate() const {
  inner.validate();
  for (std::size_t j = 0; j < p(); ++j)
    if (!inner.is_assigned(j))
      throw std::logic_error(fmt::format("cluster mean: component {} unassigned", j));
  for (ClusterId id : inner.live_ids())
    if (!std::isfinite(inner.value(id)))
      throw std::logic_error(fmt::format("cluster mean: inner cluster {} has non-finite value", id));
}

std::vector<double> ModelState::baseline_means() const {
  std::vector<double> out(p());
  for (std::size_t j = 0; j < p(); ++j)
    out[j] = mean_of(j);
  return out;
}

std::vector<double> ModelState::baseline_vars() const {
  std::vector<double> out(p());
  for (std::size_t j = 0; j < p(); ++j)
    out[j] = var_of(j);
  return out;
}

void ModelState::validate() const {
  const std::size_t np = p();
  auto positive = [](double v, const char *name) {
    if (!(std::isfinite(v) && v > 0.0))
      throw std::logic_error(fmt::format("state: {} must be positive and finite, got {}", name, v));
  };
  positive(eta_sq, "eta_sq");
  positive(tau, "tau");
  positive(alpha, "alpha");
  positive(beta, "beta");
  positive(gamma, "gamma");

  if (baseline_mean.items() != np || baseline_var.items() != np)
    throw std::logic_error("state: baseline partitions must cover every attribute");
  baseline_mean.validate();
  baseline_var.validate();
  for (std::size_t j = 0; j < np; ++j) {
    const ClusterId m = baseline_mean.cluster_of(j);
    const ClusterId v = baseline_var.cluster_of(j);
    if (m < 0 || v < 0)
      throw std::logic_error(fmt::format("state: attribute {} lacks a baseline cluster", j));
  }
  for (ClusterId id : baseline_mean.live_ids())
    if (!std::isfinite(baseline_mean.value(id)))
      throw std::logic_error(fmt::format("state: baseline mean cluster {} not finite", id));
  for (ClusterId id : baseline_var.live_ids()) {
    const double s = baseline_var.value(id);
    if (!(std::isfinite(s) && s > 0.0))
      throw std::logic_error(fmt::format("state: baseline variance cluster {} = {}", id, s));
  }

  for (std::size_t j = 0; j < np; ++j)
    if (!(rho[j] > 0.0 && rho[j] < 1.0))
      throw std::logic_error(fmt::format("state: rho[{}] = {} outside (0,1)", j, rho[j]));

  clusters.validate();
  for (std::size_t i = 0; i < n(); ++i)
    if (clusters.cluster_of(i) < 0)
      throw std::logic_error(fmt::format("state: sample {} lacks a cluster", i));
  for (ClusterId c : clusters.live_ids()) {
    const SampleCluster &sc = clusters.value(c);
    if (sc.mean.p() != np || sc.pi.size() != np)
      throw std::logic_error(fmt::format("state: cluster {} has wrong dimension", c));
    sc.mean.validate();
    for (std::size_t j = 0; j < np; ++j) {
      const double pi = sc.pi[j];
      if (!(pi >= 0.0 && pi < 1.0))
        throw std::logic_error(fmt::format("state: pi[{}][{}] = {} outside [0,1)", c, j, pi));
      if (!sc.mean.is_zero(j) && !(pi > 0.0))
        throw std::logic_error(fmt::format("state: nonzero mean[{}][{}] with pi = 0", c, j));
    }
  }
}

namespace {

using nlohmann::json;

template <class T> json partition_to_json(const Partition<T> &part, auto &&value_to_json) {
  auto raw = part.raw();
  json values = json::array();
  for (const auto &v : raw.values)
    values.push_back(value_to_json(v));
  return json{{"assignments", raw.assignments},
              {"counts", raw.counts},
              {"live", raw.live},
              {"free", raw.free_list},
              {"values", values}};
}

template <class T> Partition<T> partition_from_json(const json &j, auto &&value_from_json) {
  typename Partition<T>::Raw raw;
  raw.assignments = j.at("assignments").get<std::vector<ClusterId>>();
  raw.counts = j.at("counts").get<std::vector<int>>();
  raw.live = j.at("live").get<std::vector<char>>();
  raw.free_list = j.at("free").get<std::vector<ClusterId>>();
  for (const auto &v : j.at("values"))
    raw.values.push_back(value_from_json(v));
  return Partition<T>::from_raw(std::move(raw));
}

json scalar(double v) { return v; }
double scalar_back(const json &j) { return j.get<double>(); }

json cluster_to_json(const SampleCluster &sc) {
  return json{{"inner", partition_to_json(sc.mean.inner, scalar)}, {"pi", sc.pi}};
}

SampleCluster cluster_from_json(const json &j) {
  SampleCluster sc;
  if (j.is_null())
    return sc;
  sc.mean.inner = partition_from_json<double>(j.at("inner"), scalar_back);
  sc.pi = j.at("pi").get<std::vector<double>>();
  return sc;
}

} // namespace

std::string ModelState::to_json() const {
  json j;
  j["baseline_mean"] = partition_to_json(baseline_mean, scalar);
  j["baseline_var"] = partition_to_json(baseline_var, scalar);
  j["clusters"] = partition_to_json(clusters, [](const SampleCluster &sc) {
    return sc.mean.inner.items() == 0 && sc.pi.empty() ? json(nullptr) : cluster_to_json(sc);
  });
  j["rho"] = rho;
  j["eta_sq"] = eta_sq;
  j["tau"] = tau;
  j["alpha"] = alpha;
  j["beta"] = beta;
  j["gamma"] = gamma;
  // nlohmann prints doubles with the shortest representation that round-trips.
  return j.dump();
}

ModelState ModelState::from_json(const std::string &text) {
  const json j = json::parse(text);
  ModelState s;
  s.baseline_mean = partition_from_json<double>(j.at("baseline_mean"), scalar_back);
  s.baseline_var = partition_from_json<double>(j.at("baseline_var"), scalar_back);
  s.clusters = partition_from_json<SampleCluster>(j.at("clusters"), cluster_from_json);
  s.rho = j.at("rho").get<std::vector<double>>();
  s.eta_sq = j.at("eta_sq").get<double>();
  s.tau = j.at("tau").get<double>();
  s.alpha = j.at("alpha").get<double>();
  s.beta = j.at("beta").get<double>();
  s.gamma = j.at("gamma").get<double>();
  return s;
}

} // namespace sparsedp
