#include "profiling/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include "profiling/errors.hpp"

namespace profiling {

namespace {

// Position of `truth` in the ranking used by top_k (descending, lower index first on ties).
std::size_t rank_of(std::span<const double> dist, ValueIndex truth) {
    std::size_t rank = 0;
    for (std::size_t j = 0; j < dist.size(); ++j)
        if (dist[j] > dist[truth] || (dist[j] == dist[truth] && j < truth)) ++rank;
    return rank;
}

std::uint64_t row_seed(std::uint64_t seed, std::size_t row) {
    return seed ^ ((static_cast<std::uint64_t>(row) + 1) * 0x9E3779B97F4A7C15ull);
}

std::string format_optional(const std::optional<double>& v) {
    if (!v) return "N/A";
    std::ostringstream s;
    s.precision(6);
    s << std::fixed << *v;
    return s.str();
}

nlohmann::json optional_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json("N/A"); }

}  // namespace

std::optional<double> FacetAccuracy::accuracy(std::size_t i) const {
    if (evaluated == 0) return std::nullopt;
    return static_cast<double>(hits.at(i)) / static_cast<double>(evaluated);
}

std::optional<double> AccuracyReport::accuracy(std::size_t facet, std::size_t k) const {
    const auto kit = std::find(ks.begin(), ks.end(), k);
    if (kit == ks.end()) throw ValidationError("k=" + std::to_string(k) + " was not evaluated");
    for (const auto& fa : facets)
        if (fa.facet == facet) return fa.accuracy(static_cast<std::size_t>(kit - ks.begin()));
    return std::nullopt;
}

AccuracyReport evaluate_accuracy(const Profiler& model, const ExemplarTable& table, const EvalOptions& options) {
    const FacetSchema& schema = model.schema();
    if (schema.fingerprint() != table.schema().fingerprint())
        throw FingerprintMismatchError("model and table were built from different schemas");
    if (options.ks.empty()) throw ValidationError("no k values to evaluate");
    for (std::size_t k : options.ks)
        if (k == 0) throw ValidationError("k must be at least 1");
    if (!(options.input_mask_rate >= 0.0 && options.input_mask_rate <= 1.0))
        throw ValidationError("input mask rate must be in [0, 1]");

    std::vector<std::size_t> targets;
    if (options.only_facet) {
        if (*options.only_facet >= schema.size()) throw ValidationError("target facet outside schema");
        targets.push_back(*options.only_facet);
    } else {
        for (std::size_t f = 0; f < schema.size(); ++f) targets.push_back(f);
    }
    const std::size_t nk = options.ks.size();
    const auto rows = table.rows_in(options.split);
    const bool vector_model = model.uses_entity_vector();

    struct Partial {
        std::vector<std::size_t> evaluated;
        std::vector<std::size_t> hits;
    };
    auto work = [&](std::size_t begin, std::size_t end, Partial& out) {
        out.evaluated.assign(schema.size(), 0);
        out.hits.assign(schema.size() * nk, 0);
        std::vector<ValueIndex> input;
        for (std::size_t i = begin; i < end; ++i) {
            const std::size_t r = rows[i];
            if (vector_model && !table.has_vector(r)) continue;
            const auto cells = table.row(r);
            input.assign(cells.begin(), cells.end());
            if (options.input_mask_rate > 0.0) {
                Rng rng(row_seed(options.seed, r));
                for (auto& v : input)
                    if (v != kMissing && rng.bernoulli(options.input_mask_rate)) v = kMissing;
            }
            const std::span<const double> vec = vector_model ? table.vector(r) : std::span<const double>{};
            for (std::size_t f : targets) {
                if (cells[f] == kMissing || schema.training_count(f) == 0) continue;
                if (options.require_known && (*options.require_known == f || input[*options.require_known] == kMissing))
                    continue;
                const ValueIndex saved = input[f];
                input[f] = kMissing;
                const auto dist = model.predict_facet({input, vec}, f);
                input[f] = saved;
                if (dist.empty()) continue;
                const std::size_t rank = rank_of(dist, cells[f]);
                ++out.evaluated[f];
                for (std::size_t j = 0; j < nk; ++j)
                    if (rank < options.ks[j]) ++out.hits[f * nk + j];
            }
        }
    };

    std::size_t threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::max<std::size_t>(1, std::min(threads, rows.size()));
    std::vector<Partial> partials(threads);
    if (threads == 1) {
        work(0, rows.size(), partials[0]);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (rows.size() + threads - 1) / threads;
        for (std::size_t t = 0; t < threads; ++t) {
            const std::size_t b = std::min(rows.size(), t * chunk), e = std::min(rows.size(), b + chunk);
            pool.emplace_back(work, b, e, std::ref(partials[t]));
        }
        for (auto& th : pool) th.join();
    }

    AccuracyReport report;
    report.model = to_string(model.kind());
    report.ks = options.ks;
    for (std::size_t f : targets) {
        FacetAccuracy fa{f, 0, std::vector<std::size_t>(nk, 0)};
        for (const auto& p : partials) {
            if (p.evaluated.empty()) continue;
            fa.evaluated += p.evaluated[f];
            for (std::size_t j = 0; j < nk; ++j) fa.hits[j] += p.hits[f * nk + j];
        }
        report.facets.push_back(std::move(fa));
    }
    return report;
}

AccuracyReport topk_accuracy(const Profiler& model, const ExemplarTable& table, std::size_t k) {
    EvalOptions options;
    options.ks = {k};
    return evaluate_accuracy(model, table, options);
}

nlohmann::json to_json(const AccuracyReport& report, const FacetSchema& schema) {
    nlohmann::json facets = nlohmann::json::array();
    for (const auto& fa : report.facets) {
        nlohmann::json entry = {{"facet", schema.facet(fa.facet).name}, {"evaluated", fa.evaluated}};
        for (std::size_t j = 0; j < report.ks.size(); ++j)
            entry["top" + std::to_string(report.ks[j])] = optional_json(fa.accuracy(j));
        facets.push_back(std::move(entry));
    }
    return {{"model", report.model}, {"ks", report.ks}, {"facets", std::move(facets)}};
}

std::string to_csv(const AccuracyReport& report, const FacetSchema& schema) {
    std::ostringstream out;
    out << "model,facet,evaluated";
    for (std::size_t k : report.ks) out << ",top" << k;
    out << '\n';
    for (const auto& fa : report.facets) {
        out << report.model << ',' << schema.facet(fa.facet).name << ',' << fa.evaluated;
        for (std::size_t j = 0; j < report.ks.size(); ++j) out << ',' << format_optional(fa.accuracy(j));
        out << '\n';
    }
    return out.str();
}

std::string to_string(Regime regime) {
    switch (regime) {
        case Regime::Positive: return "positive";
        case Regime::None: return "none";
        case Regime::Negative: return "negative";
    }
    return "?";
}

Regime classify_regime(double rho) {
    if (rho > 0.3) return Regime::Positive;
    if (rho < -0.3) return Regime::Negative;
    return Regime::None;
}

std::size_t ShiftCurve::evaluated() const {
    std::size_t n = 0;
    for (const auto& b : buckets) n += b.evaluated;
    return n;
}

ShiftCurve shift_curve(const Profiler& model, const ExemplarTable& table, std::size_t facet,
                       std::optional<std::size_t> require_known, Split split) {
    const FacetSchema& schema = model.schema();
    if (schema.fingerprint() != table.schema().fingerprint())
        throw FingerprintMismatchError("model and table were built from different schemas");
    if (facet >= schema.size()) throw ValidationError("target facet outside schema");
    if (require_known && (*require_known >= schema.size() || *require_known == facet))
        throw ValidationError("required facet must be a different facet of the schema");

    const bool vector_model = model.uses_entity_vector();
    std::map<std::size_t, ShiftBucket> buckets;
    std::vector<ValueIndex> input;
    for (std::size_t r : table.rows_in(split)) {
        const auto cells = table.row(r);
        if (cells[facet] == kMissing) continue;
        if (require_known && cells[*require_known] == kMissing) continue;
        if (vector_model && !table.has_vector(r)) continue;
        input.assign(cells.begin(), cells.end());
        input[facet] = kMissing;
        const std::size_t known =
            static_cast<std::size_t>(std::count_if(input.begin(), input.end(), [](ValueIndex v) { return v != kMissing; }));
        const std::span<const double> vec = vector_model ? table.vector(r) : std::span<const double>{};
        const auto dist = model.predict_facet({input, vec}, facet);
        if (dist.empty()) continue;
        const std::size_t rank = rank_of(dist, cells[facet]);
        auto& b = buckets[known];
        b.known_facets = known;
        ++b.evaluated;
        if (rank < 1) ++b.top1_hits;
        if (rank < 3) ++b.top3_hits;
    }

    ShiftCurve curve;
    curve.facet = facet;
    std::vector<double> xs, ys;
    for (const auto& [k, b] : buckets) {
        curve.buckets.push_back(b);
        xs.push_back(static_cast<double>(k));
        ys.push_back(b.top1());
    }
    curve.spearman = xs.size() >= 2 ? spearman(xs, ys) : 0.0;
    curve.regime = classify_regime(curve.spearman);
    return curve;
}

std::string to_csv(const std::vector<ShiftCurve>& curves, const FacetSchema& schema) {
    std::ostringstream out;
    out << "facet,known_facets,top1,top3,n,low_confidence\n";
    out.precision(6);
    out << std::fixed;
    for (const auto& c : curves)
        for (const auto& b : c.buckets)
            out << schema.facet(c.facet).name << ',' << b.known_facets << ',' << b.top1() << ',' << b.top3() << ','
                << b.evaluated << ',' << (b.low_confidence() ? "true" : "false") << '\n';
    return out.str();
}

JudgmentSet parse_judgments(std::istream& in) {
    JudgmentSet out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            JudgmentProfile p;
            p.id = j.value("id", "line" + std::to_string(line_no));
            if (j.contains("known"))
                for (const auto& [facet, label] : j.at("known").items()) p.known.emplace_back(facet, label.get<std::string>());
            p.target = j.at("target").get<std::string>();
            p.options = j.at("options").get<std::vector<std::string>>();
            p.choices = j.at("judgments").get<std::vector<std::string>>();
            if (p.choices.empty()) throw ParseError("profile has no judgments", line_no);
            if (p.options.empty()) throw ParseError("profile has no value options", line_no);
            out.push_back(std::move(p));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("malformed judgment record: ") + e.what(), line_no);
        }
    }
    if (out.empty()) throw EmptyInputError("judgment file holds no profiles");
    return out;
}

JudgmentSet read_judgments_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    return parse_judgments(in);
}

std::vector<double> aggregate_judgments(const std::vector<std::string>& choices, const std::vector<std::string>& options) {
    if (choices.empty()) throw ValidationError("no judgments to aggregate");
    const std::size_t n = options.size() + 1;
    std::vector<double> mass(n, 0.0);
    for (const auto& c : choices) {
        if (c == kNoneOfTheAbove) {
            mass[n - 1] += 1.0;
        } else if (c == kCannotDecide) {
            for (double& m : mass) m += 1.0 / static_cast<double>(n);
        } else {
            const auto it = std::find(options.begin(), options.end(), c);
            if (it == options.end()) throw ValidationError("judgment '" + c + "' is not one of the offered options");
            mass[static_cast<std::size_t>(it - options.begin())] += 1.0;
        }
    }
    for (double& m : mass) m /= static_cast<double>(choices.size());
    return mass;
}

std::vector<double> project_to_options(const FacetSchema& schema, std::size_t facet, std::span<const double> full,
                                       const std::vector<std::string>& options) {
    if (full.size() != schema.vocabulary_size(facet))
        throw ShapeError("distribution for facet '" + schema.facet(facet).name + "'", schema.vocabulary_size(facet),
                         full.size());
    std::vector<double> out;
    std::vector<ValueIndex> seen;
    double listed = 0.0;
    for (const auto& label : options) {
        const ValueIndex v = schema.value_index(facet, label);
        if (std::find(seen.begin(), seen.end(), v) != seen.end())
            throw ValidationError("option '" + label + "' offered twice");
        seen.push_back(v);
        out.push_back(full[v]);
        listed += full[v];
    }
    out.push_back(std::max(0.0, 1.0 - listed));
    return out;
}

std::vector<std::size_t> classes_above_threshold(std::span<const double> distribution) {
    std::vector<std::size_t> out;
    if (distribution.empty()) return out;
    const double threshold = 1.0 / static_cast<double>(distribution.size());
    for (std::size_t i = 0; i < distribution.size(); ++i)
        if (distribution[i] > threshold) out.push_back(i);
    return out;
}

Prf class_overlap_prf(const std::vector<std::size_t>& system, const std::vector<std::size_t>& human) {
    std::size_t overlap = 0;
    for (std::size_t c : system)
        if (std::find(human.begin(), human.end(), c) != human.end()) ++overlap;
    Prf out;
    if (!system.empty()) out.precision = static_cast<double>(overlap) / static_cast<double>(system.size());
    if (!human.empty()) out.recall = static_cast<double>(overlap) / static_cast<double>(human.size());
    if (out.precision && out.recall)
        out.f1 = (*out.precision + *out.recall) > 0.0
                     ? 2.0 * *out.precision * *out.recall / (*out.precision + *out.recall)
                     : 0.0;
    return out;
}

HumanEvalReport human_evaluation(const Profiler& model, const JudgmentSet& judgments) {
    const FacetSchema& schema = model.schema();
    if (model.uses_entity_vector())
        throw ValidationError("human evaluation queries by facet values; " + to_string(model.kind()) +
                              " models need entity vectors");
    const std::string outside = "\x1f<outside>";

    struct Accumulator {
        HumanFacetSummary summary;
        double divergence_sum = 0.0;
        double p_sum = 0.0, r_sum = 0.0, f_sum = 0.0;
        std::size_t p_n = 0, r_n = 0, f_n = 0;
        std::map<std::string, double> human, system;
    };
    std::map<std::string, Accumulator> by_facet;
    HumanEvalReport report;

    for (const auto& jp : judgments) {
        const std::size_t f = schema.facet_index(jp.target);
        const GroupQuery query = GroupQuery::from_labels(schema, jp.known);
        if (query.cells(schema)[f] != kMissing)
            throw ValidationError("profile '" + jp.id + "' fixes its own target facet '" + jp.target + "'");
        const auto prof = profile(model, query);
        const auto& full = prof.facets[f].distribution;
        if (full.empty()) throw ValidationError("model has no trained distribution for facet '" + jp.target + "'");
        const auto sys = project_to_options(schema, f, full, jp.options);
        const auto hum = aggregate_judgments(jp.choices, jp.options);
        const double js = js_divergence(sys, hum);
        report.per_profile_divergence.push_back(js);

        auto& acc = by_facet[jp.target];
        acc.summary.facet = jp.target;
        ++acc.summary.profiles;
        acc.divergence_sum += js;
        const Prf prf = class_overlap_prf(classes_above_threshold(sys), classes_above_threshold(hum));
        if (prf.precision) acc.p_sum += *prf.precision, ++acc.p_n;
        if (prf.recall) acc.r_sum += *prf.recall, ++acc.r_n;
        if (prf.f1) acc.f_sum += *prf.f1, ++acc.f_n;
        for (std::size_t i = 0; i < jp.options.size(); ++i) {
            acc.human[jp.options[i]] += hum[i];
            acc.system[jp.options[i]] += sys[i];
        }
        acc.human[outside] += hum.back();
        acc.system[outside] += sys.back();
    }

    double total = 0.0;
    for (auto& [name, acc] : by_facet) {
        auto& s = acc.summary;
        const double n = static_cast<double>(s.profiles);
        s.mean_divergence = acc.divergence_sum / n;
        if (acc.p_n) s.precision = acc.p_sum / static_cast<double>(acc.p_n);
        if (acc.r_n) s.recall = acc.r_sum / static_cast<double>(acc.r_n);
        if (acc.f_n) s.f1 = acc.f_sum / static_cast<double>(acc.f_n);
        std::vector<double> h, y;
        for (const auto& [label, mass] : acc.human) {
            h.push_back(mass / n);
            y.push_back(acc.system[label] / n);
        }
        s.pooled_divergence = js_divergence(h, y);
        total += acc.divergence_sum;
        report.facets.push_back(s);
    }
    report.mean_divergence = total / static_cast<double>(judgments.size());
    return report;
}

nlohmann::json to_json(const HumanEvalReport& report) {
    nlohmann::json facets = nlohmann::json::array();
    for (const auto& s : report.facets)
        facets.push_back({{"facet", s.facet},
                          {"profiles", s.profiles},
                          {"mean_js_divergence", s.mean_divergence},
                          {"pooled_js_divergence", s.pooled_divergence},
                          {"precision", optional_json(s.precision)},
                          {"recall", optional_json(s.recall)},
                          {"f1", optional_json(s.f1)}});
    return {{"mean_js_divergence", report.mean_divergence},
            {"profiles", report.per_profile_divergence.size()},
            {"facets", std::move(facets)}};
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
    std::vector<std::size_t> order(v.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = avg;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ValidationError("spearman: samples differ in length");
    if (x.size() < 2) throw ValidationError("spearman needs at least two points");
    const auto rx = average_ranks(x), ry = average_ranks(y);
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < rx.size(); ++i) mx += rx[i], my += ry[i];
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

std::vector<double> random_simplex(std::size_t k, Rng& rng) {
    if (k == 0) throw ValidationError("simplex dimension must be at least 1");
    std::vector<double> p(k);
    double sum = 0.0;
    for (double& v : p) {
        v = -std::log(1.0 - rng.uniform());
        sum += v;
    }
    for (double& v : p) v /= sum;
    return p;
}

}  // namespace profiling
