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

#include "seduq/latent_stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <set>

#include "seduq/common.hpp"
#include "seduq/json_util.hpp"

namespace seduq::latent {

namespace {
constexpr double kInvSqrt2Pi = 0.3989422804014327;
} // namespace

Eigen::VectorXd silverman_bandwidth(const Eigen::MatrixXd& samples) {
    const Eigen::Index n = samples.rows();
    const Eigen::Index d = samples.cols();
    if (n < 2) throw InsufficientData("silverman_bandwidth: need n >= 2");
    if (d < 1) throw InvalidInput("silverman_bandwidth: no coordinates");
    double factor = std::pow(4.0 / ((d + 2.0) * static_cast<double>(n)),
                             1.0 / (d + 4.0));
    Eigen::VectorXd h(d);
    for (Eigen::Index j = 0; j < d; ++j) {
        double mean = samples.col(j).mean();
        double ss = (samples.col(j).array() - mean).square().sum();
        double sd = std::sqrt(ss / static_cast<double>(n - 1));
        if (!(sd > 0.0))
            throw DegenerateCoordinate("silverman_bandwidth: coordinate " +
                                       std::to_string(j) + " is constant");
        h[j] = sd * factor;
    }
    return h;
}

KdeModel kde_fit(const std::string& farm_id, const Eigen::MatrixXd& samples) {
    if (!samples.allFinite())
        throw InvalidInput("kde_fit: non-finite samples");
    KdeModel m;
    m.farm_id = farm_id;
    m.samples = samples;
    m.bandwidth = silverman_bandwidth(samples);
    return m;
}

KdeModel kde_fit(const Eigen::MatrixXd& samples) {
    return kde_fit(std::string(), samples);
}

double kde_pdf(const KdeModel& model, const Eigen::VectorXd& x) {
    const Eigen::Index n = model.samples.rows();
    const Eigen::Index d = model.samples.cols();
    if (x.size() != d) throw InvalidInput("kde_pdf: dimension mismatch");
    double norm = 1.0;
    for (Eigen::Index j = 0; j < d; ++j) norm *= kInvSqrt2Pi / model.bandwidth[j];
    double acc = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
        double q = 0.0;
        for (Eigen::Index j = 0; j < d; ++j) {
            double u = (x[j] - model.samples(k, j)) / model.bandwidth[j];
            q += u * u;
        }
        acc += std::exp(-0.5 * q);
    }
    return acc * norm / static_cast<double>(n);
}

Eigen::MatrixXd kde_sample(const KdeModel& model, int count, RngStream& rng) {
    const Eigen::Index n = model.samples.rows();
    const Eigen::Index d = model.samples.cols();
    if (n < 1) throw InvalidInput("kde_sample: empty model");
    if (count < 0) throw InvalidInput("kde_sample: negative count");
    Eigen::MatrixXd out(count, d);
    for (int i = 0; i < count; ++i) {
        std::uint64_t row = rng.index(static_cast<std::uint64_t>(n));
        for (Eigen::Index j = 0; j < d; ++j)
            out(i, j) = model.samples(static_cast<Eigen::Index>(row), j) +
                        model.bandwidth[j] * rng.normal();
    }
    return out;
}

double distance_correlation(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    const Eigen::Index n = x.size();
    if (y.size() != n) throw InvalidInput("distance_correlation: length mismatch");
    if (n < 2) throw InsufficientData("distance_correlation: need n >= 2");

    bool identical =
        std::memcmp(x.data(), y.data(), sizeof(double) * n) == 0;

    auto centered = [n](const Eigen::VectorXd& v) {
        Eigen::MatrixXd a(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                a(i, j) = std::abs(v[i] - v[j]);
        Eigen::VectorXd rm = a.rowwise().mean();
        double gm = rm.mean();
        a.colwise() -= rm;
        a.rowwise() -= rm.transpose();
        a.array() += gm;
        return a;
    };

    Eigen::MatrixXd A = centered(x);
    double dvarx = A.cwiseProduct(A).mean();
    if (!(dvarx > 0.0)) return 0.0;
    if (identical) return 1.0; // exact by definition, skip roundoff

    Eigen::MatrixXd B = centered(y);
    double dvary = B.cwiseProduct(B).mean();
    if (!(dvary > 0.0)) return 0.0;

    double dcov = A.cwiseProduct(B).mean();
    if (dcov <= 0.0) return 0.0; // sample dCov^2 can round below zero
    return std::sqrt(dcov / std::sqrt(dvarx * dvary));
}

DependencyLink fit_dependency(const Eigen::VectorXd& xi_source,
                              const Eigen::VectorXd& xi_target) {
    const Eigen::Index n = xi_source.size();
    if (xi_target.size() != n)
        throw InvalidInput("fit_dependency: length mismatch");
    if (n < 3) throw InsufficientData("fit_dependency: need n >= 3");
    double mx = xi_source.mean();
    double my = xi_target.mean();
    Eigen::VectorXd cx = xi_source.array() - mx;
    Eigen::VectorXd cy = xi_target.array() - my;
    double sxx = cx.squaredNorm();
    if (!(sxx > 0.0))
        throw DegenerateCoordinate("fit_dependency: constant source");
    DependencyLink link;
    link.slope = cx.dot(cy) / sxx;
    link.intercept = my - link.slope * mx;
    double sse = (cy - link.slope * cx).squaredNorm();
    link.residual_var = std::max(0.0, sse / static_cast<double>(n));
    return link;
}

std::vector<DependencyLink>
select_links(const std::vector<std::string>& farm_ids,
             const std::vector<Eigen::MatrixXd>& scores, double threshold) {
    if (farm_ids.size() != scores.size())
        throw InvalidInput("select_links: farm/score count mismatch");
    const std::size_t nf = farm_ids.size();
    for (std::size_t i = 1; i < nf; ++i)
        if (scores[i].rows() != scores[0].rows())
            throw InvalidInput("select_links: farms disagree on day count");

    struct Candidate {
        double dcor;
        std::size_t sf, tf;
        int sm, tm;
    };
    std::vector<Candidate> cands;
    for (std::size_t a = 0; a < nf; ++a) {
        for (std::size_t b = a + 1; b < nf; ++b) {
            // Direction fixed by farm-id order, which keeps links acyclic.
            std::size_t sf = a, tf = b;
            if (farm_ids[b] < farm_ids[a]) std::swap(sf, tf);
            for (int sm = 0; sm < scores[sf].cols(); ++sm) {
                for (int tm = 0; tm < scores[tf].cols(); ++tm) {
                    double d = distance_correlation(scores[sf].col(sm),
                                                    scores[tf].col(tm));
                    if (d > threshold)
                        cands.push_back({d, sf, tf, sm, tm});
                }
            }
        }
    }
    std::sort(cands.begin(), cands.end(), [&](const Candidate& l,
                                              const Candidate& r) {
        if (l.dcor != r.dcor) return l.dcor > r.dcor;
        auto lk = std::tie(farm_ids[l.sf], l.sm, farm_ids[l.tf], l.tm);
        auto rk = std::tie(farm_ids[r.sf], r.sm, farm_ids[r.tf], r.tm);
        return lk < rk;
    });

    std::vector<DependencyLink> links;
    std::set<std::pair<std::string, int>> taken;
    for (const Candidate& c : cands) {
        std::pair<std::string, int> tgt{farm_ids[c.tf], c.tm};
        if (taken.count(tgt)) continue; // one parent per coordinate
        taken.insert(tgt);
        DependencyLink link =
            fit_dependency(scores[c.sf].col(c.sm), scores[c.tf].col(c.tm));
        link.source_farm = farm_ids[c.sf];
        link.source_mode = c.sm;
        link.target_farm = farm_ids[c.tf];
        link.target_mode = c.tm;
        link.dcor = c.dcor;
        links.push_back(std::move(link));
    }
    return links;
}

std::map<std::string, Eigen::MatrixXd>
sample_joint(const std::map<std::string, KdeModel>& models,
             const std::vector<DependencyLink>& links, int count,
             RngStream& rng) {
    for (const DependencyLink& l : links) {
        auto src = models.find(l.source_farm);
        auto tgt = models.find(l.target_farm);
        if (src == models.end() || tgt == models.end())
            throw InvalidConfig("sample_joint: link names unknown farm '" +
                                (src == models.end() ? l.source_farm
                                                     : l.target_farm) + "'");
        if (l.source_mode < 0 || l.source_mode >= src->second.dim() ||
            l.target_mode < 0 || l.target_mode >= tgt->second.dim())
            throw InvalidConfig("sample_joint: link coordinate out of range");
        if (l.residual_var < 0.0)
            throw InvalidConfig("sample_joint: negative residual variance");
    }

    std::set<std::pair<std::string, int>> targets;
    for (const DependencyLink& l : links) {
        if (!targets.insert({l.target_farm, l.target_mode}).second)
            throw InvalidConfig("sample_joint: coordinate targeted twice");
    }

    // Topological order over coordinates; the edge list is tiny, so walk
    // until no link is pending or no progress is made (cycle).
    std::vector<const DependencyLink*> pending;
    for (const DependencyLink& l : links) pending.push_back(&l);
    std::vector<const DependencyLink*> ordered;
    std::set<std::pair<std::string, int>> unresolved = targets;
    while (!pending.empty()) {
        std::size_t before = pending.size();
        for (auto it = pending.begin(); it != pending.end();) {
            const DependencyLink* l = *it;
            if (unresolved.count({l->source_farm, l->source_mode})) {
                ++it;
                continue;
            }
            ordered.push_back(l);
            unresolved.erase({l->target_farm, l->target_mode});
            it = pending.erase(it);
        }
        if (pending.size() == before)
            throw InvalidConfig("sample_joint: cyclic dependency links");
    }

    std::map<std::string, Eigen::MatrixXd> out;
    for (const auto& [farm, model] : models)
        out[farm] = kde_sample(model, count, rng);

    for (const DependencyLink* l : ordered) {
        const Eigen::MatrixXd& src = out[l->source_farm];
        Eigen::MatrixXd& tgt = out[l->target_farm];
        double sd = std::sqrt(l->residual_var);
        for (int i = 0; i < count; ++i)
            tgt(i, l->target_mode) = l->intercept +
                                     l->slope * src(i, l->source_mode) +
                                     sd * rng.normal();
    }
    return out;
}

nlohmann::json KdeModel::to_json() const {
    nlohmann::json j;
    j["farm_id"] = farm_id;
    j["samples"] = seduq::to_json(samples);
    j["bandwidth"] = seduq::to_json(bandwidth);
    return j;
}

KdeModel KdeModel::from_json(const nlohmann::json& j) {
    KdeModel m;
    m.farm_id = require_key(j, "farm_id", "KdeModel").get<std::string>();
    m.samples = matrix_from_json(require_key(j, "samples", "KdeModel"),
                                 "KdeModel.samples");
    m.bandwidth = vector_from_json(require_key(j, "bandwidth", "KdeModel"),
                                   "KdeModel.bandwidth");
    if (m.bandwidth.size() != m.samples.cols())
        throw SchemaError("KdeModel: bandwidth/sample dimension mismatch");
    return m;
}

nlohmann::json DependencyLink::to_json() const {
    nlohmann::json j;
    j["source_farm"] = source_farm;
    j["source_mode"] = source_mode;
    j["target_farm"] = target_farm;
    j["target_mode"] = target_mode;
    j["intercept"] = intercept;
    j["slope"] = slope;
    j["residual_var"] = residual_var;
    j["dcor"] = dcor;
    return j;
}

DependencyLink DependencyLink::from_json(const nlohmann::json& j) {
    DependencyLink l;
    l.source_farm = require_key(j, "source_farm", "DependencyLink").get<std::string>();
    l.source_mode = require_key(j, "source_mode", "DependencyLink").get<int>();
    l.target_farm = require_key(j, "target_farm", "DependencyLink").get<std::string>();
    l.target_mode = require_key(j, "target_mode", "DependencyLink").get<int>();
    l.intercept = require_key(j, "intercept", "DependencyLink").get<double>();
    l.slope = require_key(j, "slope", "DependencyLink").get<double>();
    l.residual_var = require_key(j, "residual_var", "DependencyLink").get<double>();
    l.dcor = j.value("dcor", 0.0);
    return l;
}

} // namespace seduq::latent
