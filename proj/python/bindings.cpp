#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pricewar/config_io.hpp"
#include "pricewar/dp.hpp"
#include "pricewar/error.hpp"
#include "pricewar/lda.hpp"
#include "pricewar/metrics.hpp"
#include "pricewar/simulator.hpp"
#include "pricewar/tournament.hpp"

namespace py = pybind11;
using namespace pricewar;

namespace {

Json parse(const std::string& text) {
    try {
        return text.empty() ? Json::object() : Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid JSON: ") + e.what());
    }
}

py::array_t<double> pref_array(const lda::PreferenceMatrix& p) {
    py::array_t<double> out({p.own_arity(), p.opp_arity(), p.acc()});
    std::copy(p.flat().begin(), p.flat().end(), out.mutable_data());
    return out;
}

py::array_t<double> theta_array(const lda::StrategyDistribution& t) {
    py::array_t<double> out({t.num_docs(), t.opp_arity()});
    for (int d = 0; d < t.num_docs(); ++d)
        for (int k = 0; k < t.opp_arity(); ++k) out.mutable_at(d, k) = t.at(d, k);
    return out;
}

py::dict simulate(const std::string& market_json, const std::string& policy1, const std::string& policy2,
                  const std::string& policies_json, int threads) {
    const auto market = market_from_json(parse(market_json));
    const auto settings = policy_settings_from_json(parse(policies_json));
    auto first = make_policy(policy1, settings, market, 0, market.seed, threads);
    auto second = make_policy(policy2, settings, market, 1, market.seed, threads);
    GameResult result;
    {
        py::gil_scoped_release release;
        result = run_game(market, *first, *second, {.threads = threads});
    }
    std::vector<double> share1;
    for (const auto& p : result.trajectory) share1.push_back(p.share1);
    py::dict out;
    out["final_share"] = py::make_tuple(result.final_share[0], result.final_share[1]);
    out["trajectory"] = share1;
    out["coerced"] = py::make_tuple(result.coerced[0], result.coerced[1]);
    return out;
}

py::dict infer(const std::vector<std::tuple<int, int, int, int>>& records, int num_docs,
               const std::string& config_json, int threads) {
    const auto config = lda_from_json(parse(config_json));
    std::vector<lda::LdaRecord> recs;
    recs.reserve(records.size());
    for (const auto& [doc, own, count, demand] : records) {
        if (doc < 0 || doc >= num_docs) throw DataError("document index out of range");
        if (own < 0 || own >= config.own_arity) throw DataError("own award out of range");
        if (demand < 1 || count < 0 || count > demand) throw DataError("count must lie in [0, demand]");
        lda::LdaRecord r;
        r.doc = doc;
        r.own_award = own;
        r.count = count;
        r.bin = discretize(count, demand, config.acc);
        recs.push_back(r);
    }
    lda::InferenceResult result;
    {
        py::gil_scoped_release release;
        result = lda::run_inference(recs, num_docs, config, nullptr, threads);
    }
    py::dict out;
    out["preference"] = pref_array(result.estimates.pref);
    out["strategy"] = theta_array(result.estimates.theta);
    return out;
}

py::dict allocate(py::array_t<double, py::array::c_style | py::array::forcecast> psi,
                  const std::vector<int>& costs, int budget) {
    if (psi.ndim() != 2) throw DataError("psi must be a 2-d array (customers x awards)");
    BenefitTable table;
    table.customers = static_cast<int>(psi.shape(0));
    table.awards = static_cast<int>(psi.shape(1));
    table.values.assign(psi.data(), psi.data() + psi.size());
    const auto a = dp_allocate(table, costs, budget);
    py::dict out;
    out["awards"] = a.awards;
    out["objective"] = a.objective;
    out["total_cost"] = a.total_cost;
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Price-war game simulator, LDA inference and award policies";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
    py::register_exception<StateError>(m, "StateError", PyExc_RuntimeError);

    m.def("sigmoid_preference", &sigmoid_preference, py::arg("d"), py::arg("sigma"));
    m.def("update_sigma", &update_sigma, py::arg("sigma"), py::arg("usage_rate"), py::arg("gamma"));
    m.def("discretize", &discretize, py::arg("count"), py::arg("demand"), py::arg("acc"));
    m.def(
        "market_share",
        [](const std::vector<int>& captured, const std::vector<int>& demand) {
            const auto s = market_share(captured, demand);
            return py::make_tuple(s[0], s[1]);
        },
        py::arg("captured_by_first"), py::arg("demand"));
    m.def(
        "wasserstein1",
        [](const std::vector<double>& p, const std::vector<double>& q, const std::vector<double>& support) {
            return wasserstein1(p, q, support);
        },
        py::arg("p"), py::arg("q"), py::arg("support") = std::vector<double>{});
    m.def("policy_names", &policy_names);
    m.def("simulate", &simulate, py::arg("market") = "", py::arg("policy1") = "random",
          py::arg("policy2") = "random", py::arg("policies") = "", py::arg("threads") = 1,
          "Plays one game. Configs are JSON strings; returns final share, the share-1 trajectory and coercion counts.");
    m.def("infer", &infer, py::arg("records"), py::arg("num_docs"), py::arg("config") = "",
          py::arg("threads") = 1,
          "Runs the Gibbs sampler on (doc, own_award, count, demand) tuples; returns aligned estimates.");
    m.def("dp_allocate", &allocate, py::arg("psi"), py::arg("costs"), py::arg("budget"));
}
