/*
 * Copyright 2026 The seduq Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "seduq/dispatch.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "seduq/common.hpp"
#include "seduq/json_util.hpp"
#include "seduq/qp.hpp"

namespace seduq::dispatch {

void DispatchCase::validate() const {
    if (buses.empty()) throw InvalidInput("case: no buses");
    if (generators.empty()) throw InvalidInput("case: no generators");
    std::set<int> ids;
    for (const Bus& b : buses) {
        if (!ids.insert(b.id).second)
            throw InvalidInput("case: duplicate bus id " + std::to_string(b.id));
        if (b.load.size() != wind::kHoursPerDay)
            throw InvalidInput("case: bus " + std::to_string(b.id) +
                               " needs 24 hourly loads");
        if (!b.load.allFinite())
            throw InvalidInput("case: non-finite load at bus " +
                               std::to_string(b.id));
    }
    for (const Generator& g : generators) {
        if (!ids.count(g.bus))
            throw InvalidInput("case: generator at unknown bus " +
                               std::to_string(g.bus));
        if (g.a < 0.0)
            throw InvalidInput("case: negative quadratic cost coefficient");
        if (g.g_min > g.g_max)
            throw InvalidInput("case: generator bounds reversed at bus " +
                               std::to_string(g.bus));
    }
    for (const Line& l : lines) {
        if (!ids.count(l.from) || !ids.count(l.to))
            throw InvalidInput("case: line endpoints must be buses");
        if (l.from == l.to) throw InvalidInput("case: line loops a bus");
        if (!(l.susceptance > 0.0))
            throw InvalidInput("case: susceptance must be > 0");
        if (l.limit && !(*l.limit > 0.0))
            throw InvalidInput("case: line limit must be > 0");
    }
    for (const auto& [farm, bus] : wind_buses)
        if (!ids.count(bus))
            throw InvalidInput("case: wind farm '" + farm +
                               "' at unknown bus " + std::to_string(bus));

    if (buses.size() > 1) {
        std::map<int, std::vector<int>> adj;
        for (const Line& l : lines) {
            adj[l.from].push_back(l.to);
            adj[l.to].push_back(l.from);
        }
        std::set<int> seen{buses[0].id};
        std::vector<int> stack{buses[0].id};
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            for (int w : adj[v])
                if (seen.insert(w).second) stack.push_back(w);
        }
        if (seen.size() != buses.size())
            throw InvalidInput("case: network graph is not connected");
    }

    double cap = 0.0, floor_sum = 0.0;
    for (const Generator& g : generators) {
        cap += g.g_max;
        floor_sum += g.g_min;
    }
    double peak = 0.0;
    for (int h = 0; h < wind::kHoursPerDay; ++h) {
        double tot = 0.0;
        for (const Bus& b : buses) tot += b.load[h];
        peak = std::max(peak, tot);
    }
    if (cap < peak)
        throw InvalidInput("case: total capacity " + std::to_string(cap) +
                           " MW below peak load " + std::to_string(peak));
    (void)floor_sum;
}

Network::Network(const DispatchCase& c) {
    c.validate();
    int nb = static_cast<int>(c.buses.size());
    for (int i = 0; i < nb; ++i) index_[c.buses[i].id] = i;
    const int nl = static_cast<int>(c.lines.size());

    Eigen::MatrixXd bmat = Eigen::MatrixXd::Zero(nb, nb);
    for (const Line& l : c.lines) {
        int f = index_.at(l.from), t = index_.at(l.to);
        bmat(f, f) += l.susceptance;
        bmat(t, t) += l.susceptance;
        bmat(f, t) -= l.susceptance;
        bmat(t, f) -= l.susceptance;
        if (l.limit) has_limits_ = true;
    }

    // Bus 0 is the angle reference; its PTDF column stays zero.
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(nb, nb);
    if (nb > 1) {
        Eigen::MatrixXd br = bmat.bottomRightCorner(nb - 1, nb - 1);
        Eigen::LLT<Eigen::MatrixXd> llt(br);
        if (llt.info() != Eigen::Success)
            throw InvalidInput("case: singular susceptance matrix");
        x.bottomRightCorner(nb - 1, nb - 1) =
            llt.solve(Eigen::MatrixXd::Identity(nb - 1, nb - 1));
    }

    ptdf_.resize(nl, nb);
    for (int l = 0; l < nl; ++l) {
        int f = index_.at(c.lines[l].from), t = index_.at(c.lines[l].to);
        ptdf_.row(l) = c.lines[l].susceptance * (x.row(f) - x.row(t));
    }
}

int Network::bus_index(int bus_id) const {
    auto it = index_.find(bus_id);
    if (it == index_.end())
        throw InvalidInput("unknown bus id " + std::to_string(bus_id));
    return it->second;
}

std::map<std::string, Eigen::VectorXd>
wind_injection(const std::map<std::string, wind::PowerCurveTree>& curves,
               const std::map<std::string, kle::KleBasis>& bases,
               const std::map<std::string, Eigen::VectorXd>& latent) {
    std::map<std::string, Eigen::VectorXd> out;
    for (const auto& [farm, xi] : latent) {
        auto bit = bases.find(farm);
        auto cit = curves.find(farm);
        if (bit == bases.end() || cit == curves.end())
            throw InvalidInput("wind_injection: unknown farm '" + farm + "'");
        Eigen::VectorXd speed = bit->second.reconstruct(xi).cwiseMax(0.0);
        Eigen::VectorXd power(speed.size());
        for (Eigen::Index t = 0; t < speed.size(); ++t)
            power[t] = cit->second.predict(speed[t]);
        out[farm] = std::move(power);
    }
    return out;
}

namespace {

/// Equal-marginal-cost dispatch without network limits: bisection on the
/// balance dual. Zero-curvature generators switch at lambda = b; ties are
/// split proportional to remaining capacity.
HourSolution solve_lambda(const DispatchCase& c, int hour, double demand) {
    const int ng = static_cast<int>(c.generators.size());
    auto g_at = [&](double lambda) {
        Eigen::VectorXd g(ng);
        for (int i = 0; i < ng; ++i) {
            const Generator& gen = c.generators[i];
            if (gen.a > 0.0)
                g[i] = std::clamp((lambda - gen.b) / (2.0 * gen.a), gen.g_min,
                                  gen.g_max);
            else
                g[i] = lambda > gen.b ? gen.g_max : gen.g_min;
        }
        return g;
    };

    double lo = std::numeric_limits<double>::max();
    double hi = std::numeric_limits<double>::lowest();
    for (const Generator& gen : c.generators) {
        lo = std::min(lo, 2.0 * gen.a * gen.g_min + gen.b);
        hi = std::max(hi, 2.0 * gen.a * gen.g_max + gen.b);
    }
    lo -= 1.0;
    hi += 1.0;

    double lambda = 0.5 * (lo + hi);
    for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, std::abs(hi));
         ++it) {
        lambda = 0.5 * (lo + hi);
        if (g_at(lambda).sum() < demand)
            lo = lambda;
        else
            hi = lambda;
    }
    lambda = 0.5 * (lo + hi);

    Eigen::VectorXd g = g_at(lambda);
    double resid = demand - g.sum();
    if (std::abs(resid) > 1e-9) {
        // Flat-cost generators jump at lambda = b; spread the gap over the
        // switching set proportional to the room each one has left.
        double tol = 1e-6 * std::max(1.0, std::abs(lambda));
        Eigen::VectorXd room = Eigen::VectorXd::Zero(ng);
        for (int i = 0; i < ng; ++i) {
            const Generator& gen = c.generators[i];
            if (gen.a == 0.0 && std::abs(gen.b - lambda) <= tol)
                room[i] = resid > 0.0 ? gen.g_max - g[i] : g[i] - gen.g_min;
        }
        double total_room = room.sum();
        if (total_room > 0.0) {
            double frac = std::clamp(std::abs(resid) / total_room, 0.0, 1.0);
            for (int i = 0; i < ng; ++i)
                g[i] += (resid > 0.0 ? 1.0 : -1.0) * frac * room[i];
            resid = demand - g.sum();
        }
        if (std::abs(resid) > 1e-9)
            throw Infeasible("hour " + std::to_string(hour) +
                                 ": balance gap " + std::to_string(resid) +
                                 " MW",
                             hour);
    }

    HourSolution sol;
    sol.g = std::move(g);
    sol.lambda = lambda;
    return sol;
}

HourSolution solve_qp(const DispatchCase& c, const Network& net, int hour,
                      double demand, const Eigen::VectorXd& fixed_injection) {
    const int ng = static_cast<int>(c.generators.size());

    double amax = 0.0;
    for (const Generator& gen : c.generators) amax = std::max(amax, 2.0 * gen.a);
    const double curvature_floor = 1e-10 * std::max(1.0, amax);

    Eigen::MatrixXd gmat = Eigen::MatrixXd::Zero(ng, ng);
    Eigen::VectorXd g0(ng);
    for (int i = 0; i < ng; ++i) {
        gmat(i, i) = std::max(2.0 * c.generators[i].a, curvature_floor);
        g0[i] = c.generators[i].b;
    }

    Eigen::MatrixXd ce = Eigen::MatrixXd::Ones(ng, 1);
    Eigen::VectorXd ce0(1);
    ce0[0] = -demand;

    std::vector<int> limited;
    for (int l = 0; l < static_cast<int>(c.lines.size()); ++l)
        if (c.lines[l].limit) limited.push_back(l);

    const int mi = 2 * ng + 2 * static_cast<int>(limited.size());
    Eigen::MatrixXd ci = Eigen::MatrixXd::Zero(ng, mi);
    Eigen::VectorXd ci0(mi);
    for (int i = 0; i < ng; ++i) {
        ci(i, 2 * i) = 1.0; // g - g_min >= 0
        ci0[2 * i] = -c.generators[i].g_min;
        ci(i, 2 * i + 1) = -1.0; // g_max - g >= 0
        ci0[2 * i + 1] = c.generators[i].g_max;
    }
    Eigen::VectorXd flow0 = net.ptdf() * fixed_injection;
    for (std::size_t k = 0; k < limited.size(); ++k) {
        int l = limited[k];
        double lim = *c.lines[l].limit;
        Eigen::VectorXd coef = Eigen::VectorXd::Zero(ng);
        for (int i = 0; i < ng; ++i)
            coef[i] = net.ptdf()(l, net.bus_index(c.generators[i].bus));
        int col = 2 * ng + 2 * static_cast<int>(k);
        ci.col(col) = -coef; // lim - flow >= 0
        ci0[col] = lim - flow0[l];
        ci.col(col + 1) = coef; // flow + lim >= 0
        ci0[col + 1] = lim + flow0[l];
    }

    qp::QpResult qr = qp::solve(gmat, g0, ce, ce0, ci, ci0);
    if (!qr.feasible)
        throw Infeasible("hour " + std::to_string(hour) +
                             ": no schedule satisfies the network limits",
                         hour);

    HourSolution sol;
    sol.g = qr.x;
    sol.lambda = qr.eq_duals[0];
    return sol;
}

/// QP over [generators; spillable wind]. Wind columns carry zero cost, so
/// the curvature floor picks the minimum-norm allocation among equal-cost
/// spills. wind_used enters with the available MW per bus and leaves with
/// the amount actually injected.
HourSolution solve_qp_curtail(const DispatchCase& c, const Network& net,
                              int hour, const Eigen::VectorXd& load_bus,
                              Eigen::VectorXd& wind_used) {
    const int ng = static_cast<int>(c.generators.size());
    std::vector<int> wbus;
    for (Eigen::Index i = 0; i < wind_used.size(); ++i)
        if (wind_used[i] > 0.0) wbus.push_back(static_cast<int>(i));
    const int nw = static_cast<int>(wbus.size());
    const int nv = ng + nw;

    double amax = 0.0;
    for (const Generator& gen : c.generators) amax = std::max(amax, 2.0 * gen.a);
    const double curvature_floor = 1e-10 * std::max(1.0, amax);

    Eigen::MatrixXd gmat = Eigen::MatrixXd::Zero(nv, nv);
    Eigen::VectorXd g0 = Eigen::VectorXd::Zero(nv);
    for (int i = 0; i < ng; ++i) {
        gmat(i, i) = std::max(2.0 * c.generators[i].a, curvature_floor);
        g0[i] = c.generators[i].b;
    }
    for (int k = 0; k < nw; ++k) gmat(ng + k, ng + k) = curvature_floor;

    Eigen::MatrixXd ce = Eigen::MatrixXd::Ones(nv, 1);
    Eigen::VectorXd ce0(1);
    ce0[0] = -load_bus.sum();

    std::vector<int> limited;
    for (int l = 0; l < static_cast<int>(c.lines.size()); ++l)
        if (c.lines[l].limit) limited.push_back(l);

    const int mi = 2 * nv + 2 * static_cast<int>(limited.size());
    Eigen::MatrixXd ci = Eigen::MatrixXd::Zero(nv, mi);
    Eigen::VectorXd ci0(mi);
    for (int i = 0; i < ng; ++i) {
        ci(i, 2 * i) = 1.0;
        ci0[2 * i] = -c.generators[i].g_min;
        ci(i, 2 * i + 1) = -1.0;
        ci0[2 * i + 1] = c.generators[i].g_max;
    }
    for (int k = 0; k < nw; ++k) {
        int col = 2 * (ng + k);
        ci(ng + k, col) = 1.0; // w >= 0
        ci0[col] = 0.0;
        ci(ng + k, col + 1) = -1.0; // available - w >= 0
        ci0[col + 1] = wind_used[wbus[k]];
    }
    Eigen::VectorXd flow0 = net.ptdf() * (-load_bus);
    for (std::size_t k = 0; k < limited.size(); ++k) {
        int l = limited[k];
        double lim = *c.lines[l].limit;
        Eigen::VectorXd coef = Eigen::VectorXd::Zero(nv);
        for (int i = 0; i < ng; ++i)
            coef[i] = net.ptdf()(l, net.bus_index(c.generators[i].bus));
        for (int w = 0; w < nw; ++w) coef[ng + w] = net.ptdf()(l, wbus[w]);
        int col = 2 * nv + 2 * static_cast<int>(k);
        ci.col(col) = -coef;
        ci0[col] = lim - flow0[l];
        ci.col(col + 1) = coef;
        ci0[col + 1] = lim + flow0[l];
    }

    qp::QpResult qr = qp::solve(gmat, g0, ce, ce0, ci, ci0);
    if (!qr.feasible)
        throw Infeasible("hour " + std::to_string(hour) +
                             ": no schedule satisfies the network limits",
                         hour);

    HourSolution sol;
    sol.g = qr.x.head(ng);
    sol.lambda = qr.eq_duals[0];
    double avail = wind_used.sum();
    wind_used.setZero();
    for (int k = 0; k < nw; ++k)
        wind_used[wbus[k]] = std::clamp(qr.x[ng + k], 0.0, ci0[2 * (ng + k) + 1]);
    sol.spilled_mw = std::max(0.0, avail - wind_used.sum());
    return sol;
}

} // namespace

HourSolution solve_hour(const DispatchCase& c, const Network& net, int hour,
                        const Eigen::VectorXd& wind_bus_mw,
                        bool allow_curtailment) {
    if (hour < 0 || hour >= wind::kHoursPerDay)
        throw InvalidInput("solve_hour: hour index out of range");
    const int nb = static_cast<int>(c.buses.size());
    if (wind_bus_mw.size() != nb)
        throw InvalidInput("solve_hour: wind vector length != bus count");
    if (allow_curtailment && (wind_bus_mw.array() < 0.0).any())
        throw InvalidInput("solve_hour: negative wind cannot be curtailed");

    Eigen::VectorXd load_bus(nb);
    for (int i = 0; i < nb; ++i) load_bus[i] = c.buses[i].load[hour];
    Eigen::VectorXd wind_used = wind_bus_mw;
    double total_wind = wind_used.sum();
    double demand = load_bus.sum() - total_wind;

    double cap = 0.0, floor_sum = 0.0;
    for (const Generator& g : c.generators) {
        cap += g.g_max;
        floor_sum += g.g_min;
    }
    // Spilling wind only raises net demand, so an overloaded hour stays
    // infeasible with or without curtailment.
    if (demand > cap + 1e-9)
        throw Infeasible("hour " + std::to_string(hour) + ": net load " +
                             std::to_string(demand) + " MW exceeds capacity",
                         hour);
    if (demand < floor_sum - 1e-9) {
        if (!allow_curtailment)
            throw Infeasible("hour " + std::to_string(hour) + ": net load " +
                                 std::to_string(demand) +
                                 " MW below minimum generation",
                             hour);
        if (load_bus.sum() < floor_sum - 1e-9)
            throw Infeasible("hour " + std::to_string(hour) +
                                 ": load below minimum generation even with "
                                 "all wind spilled",
                             hour);
    }

    HourSolution sol;
    if (net.has_line_limits()) {
        sol = allow_curtailment
                  ? solve_qp_curtail(c, net, hour, load_bus, wind_used)
                  : solve_qp(c, net, hour, demand, wind_used - load_bus);
    } else {
        if (allow_curtailment) {
            double spill = std::max(0.0, floor_sum - demand);
            // Output level where marginal cost crosses zero; with negative
            // b coefficients extra spill pays for itself up to this point.
            double d_free = 0.0;
            for (const Generator& gen : c.generators)
                d_free += gen.a > 0.0 ? std::clamp(-gen.b / (2.0 * gen.a),
                                                   gen.g_min, gen.g_max)
                                      : (gen.b < 0.0 ? gen.g_max : gen.g_min);
            if (d_free > demand + spill)
                spill = std::min(total_wind, d_free - demand);
            if (spill > 0.0) {
                wind_used *= (total_wind - spill) / total_wind;
                demand += spill;
            }
            sol = solve_lambda(c, hour, demand);
            sol.spilled_mw = spill;
        } else {
            sol = solve_lambda(c, hour, demand);
        }
    }

    Eigen::VectorXd injection = wind_used - load_bus;
    for (int i = 0; i < static_cast<int>(c.generators.size()); ++i)
        injection[net.bus_index(c.generators[i].bus)] += sol.g[i];
    sol.flows = net.ptdf() * injection;

    sol.cost = 0.0;
    for (int i = 0; i < static_cast<int>(c.generators.size()); ++i) {
        const Generator& gen = c.generators[i];
        sol.cost += gen.a * sol.g[i] * sol.g[i] + gen.b * sol.g[i] + gen.c;
    }
    return sol;
}

DispatchResult solve_day(const DispatchCase& c, const Network& net,
                         const std::map<std::string, Eigen::VectorXd>& wind,
                         bool allow_curtailment) {
    const int nb = static_cast<int>(c.buses.size());
    const int ng = static_cast<int>(c.generators.size());

    for (const auto& [farm, bus] : c.wind_buses)
        if (!wind.count(farm))
            throw InvalidInput("solve_day: missing wind series for farm '" +
                               farm + "'");
    Eigen::MatrixXd wind_bus = Eigen::MatrixXd::Zero(nb, wind::kHoursPerDay);
    for (const auto& [farm, series] : wind) {
        auto it = c.wind_buses.find(farm);
        if (it == c.wind_buses.end())
            throw InvalidInput("solve_day: farm '" + farm +
                               "' has no bus in the case");
        if (series.size() != wind::kHoursPerDay)
            throw InvalidInput("solve_day: wind series must cover 24 hours");
        wind_bus.row(net.bus_index(it->second)) += series.transpose();
    }

    DispatchResult res;
    res.setpoints = Eigen::MatrixXd::Zero(ng, wind::kHoursPerDay);
    res.lambda = Eigen::VectorXd::Zero(wind::kHoursPerDay);
    for (int h = 0; h < wind::kHoursPerDay; ++h) {
        try {
            HourSolution sol =
                solve_hour(c, net, h, wind_bus.col(h), allow_curtailment);
            res.setpoints.col(h) = sol.g;
            res.lambda[h] = sol.lambda;
        } catch (const Infeasible&) {
            res.optimal = false;
            res.infeasible_hour = h;
            res.cost = 0.0;
            return res;
        }
    }
    res.optimal = true;
    res.cost = day_cost(c, res.setpoints);
    return res;
}

double day_cost(const DispatchCase& c, const Eigen::MatrixXd& setpoints) {
    if (setpoints.rows() != static_cast<Eigen::Index>(c.generators.size()) ||
        setpoints.cols() != wind::kHoursPerDay)
        throw InvalidInput("day_cost: setpoint shape mismatch");
    double q = 0.0;
    for (Eigen::Index i = 0; i < setpoints.rows(); ++i) {
        const Generator& gen = c.generators[i];
        for (int h = 0; h < wind::kHoursPerDay; ++h) {
            double g = setpoints(i, h);
            q += gen.a * g * g + gen.b * g + gen.c;
        }
    }
    return q;
}

nlohmann::json DispatchCase::to_json() const {
    nlohmann::json j;
    j["mva_base"] = mva_base;
    j["buses"] = nlohmann::json::array();
    for (const Bus& b : buses) {
        nlohmann::json jb;
        jb["id"] = b.id;
        jb["load"] = seduq::to_json(b.load);
        j["buses"].push_back(std::move(jb));
    }
    j["generators"] = nlohmann::json::array();
    for (const Generator& g : generators) {
        nlohmann::json jg;
        jg["bus"] = g.bus;
        jg["a"] = g.a;
        jg["b"] = g.b;
        jg["c"] = g.c;
        jg["g_min"] = g.g_min;
        jg["g_max"] = g.g_max;
        j["generators"].push_back(std::move(jg));
    }
    j["lines"] = nlohmann::json::array();
    for (const Line& l : lines) {
        nlohmann::json jl;
        jl["from"] = l.from;
        jl["to"] = l.to;
        jl["susceptance"] = l.susceptance;
        if (l.limit) jl["limit"] = *l.limit;
        j["lines"].push_back(std::move(jl));
    }
    j["wind_buses"] = nlohmann::json::array();
    for (const auto& [farm, bus] : wind_buses) {
        nlohmann::json jw;
        jw["farm_id"] = farm;
        jw["bus"] = bus;
        j["wind_buses"].push_back(std::move(jw));
    }
    return j;
}

DispatchCase DispatchCase::from_json(const nlohmann::json& j) {
    DispatchCase c;
    c.mva_base = j.value("mva_base", 100.0);
    for (const auto& jb : require_key(j, "buses", "case")) {
        Bus b;
        b.id = require_key(jb, "id", "case.buses").get<int>();
        b.load = vector_from_json(require_key(jb, "load", "case.buses"),
                                  "case.buses.load");
        c.buses.push_back(std::move(b));
    }
    for (const auto& jg : require_key(j, "generators", "case")) {
        Generator g;
        g.bus = require_key(jg, "bus", "case.generators").get<int>();
        g.a = require_key(jg, "a", "case.generators").get<double>();
        g.b = require_key(jg, "b", "case.generators").get<double>();
        g.c = jg.value("c", 0.0);
        g.g_min = require_key(jg, "g_min", "case.generators").get<double>();
        g.g_max = require_key(jg, "g_max", "case.generators").get<double>();
        c.generators.push_back(g);
    }
    if (j.contains("lines"))
        for (const auto& jl : j["lines"]) {
            Line l;
            l.from = require_key(jl, "from", "case.lines").get<int>();
            l.to = require_key(jl, "to", "case.lines").get<int>();
            l.susceptance =
                require_key(jl, "susceptance", "case.lines").get<double>();
            if (jl.contains("limit") && !jl["limit"].is_null())
                l.limit = jl["limit"].get<double>();
            c.lines.push_back(l);
        }
    if (j.contains("wind_buses"))
        for (const auto& jw : j["wind_buses"]) {
            std::string farm =
                require_key(jw, "farm_id", "case.wind_buses").get<std::string>();
            int bus = require_key(jw, "bus", "case.wind_buses").get<int>();
            if (!c.wind_buses.emplace(farm, bus).second)
                throw SchemaError("case: farm '" + farm + "' listed twice");
        }
    c.validate();
    return c;
}

DispatchCase DispatchCase::load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw InvalidInput("cannot open case file " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(is);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(std::string("case file ") + path + ": " + e.what());
    }
    return from_json(j);
}

} // namespace seduq::dispatch
