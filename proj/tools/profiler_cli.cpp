// Command-line entry points: ingest, stats, train, evaluate, human-eval, profile, serve, synth.

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "profiling/autoencoder.hpp"
#include "profiling/baselines.hpp"
#include "profiling/checkpoint.hpp"
#include "profiling/dataspace.hpp"
#include "profiling/embedding_predictor.hpp"
#include "profiling/errors.hpp"
#include "profiling/evaluation.hpp"
#include "profiling/ingest.hpp"
#include "profiling/service.hpp"
#include "profiling/store_io.hpp"
#include "profiling/synthetic.hpp"

using namespace profiling;
using nlohmann::json;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << text;
    if (!out) throw IoError("failed writing '" + path + "'");
}

// ---- ingest ----

struct IngestArgs {
    std::string input, out, vectors;
    std::size_t cap = kDefaultVocabularyCap;
    std::uint64_t seed = 0;
};

int run_ingest(const IngestArgs& a) {
    IngestOptions opts;
    opts.cap = a.cap;
    opts.seed = a.seed;
    auto result = ingest(read_triples_file(a.input), opts);
    for (const auto& w : result.warnings) spdlog::warn("{}", w);
    if (!a.vectors.empty()) {
        const std::size_t without = attach_vectors(result.table, read_vector_sidecar(a.vectors));
        spdlog::info("attached vectors of width {}; {} rows have none", result.table.vector_dim(), without);
    }
    save_store(result.table, a.out);
    std::cout << "ingested " << result.table.rows() << " entities, " << result.table.facets() << " facets into "
              << a.out << "\n";
    for (const auto& s : stats(result.table))
        std::cout << "  " << s.name << ": " << s.examples << " examples, " << s.vocabulary_size << " values"
                  << (s.empty ? " (empty)" : "") << "\n";
    return 0;
}

// ---- stats ----

struct StatsArgs {
    std::string store;
    bool json = false;
};

int run_stats(const StatsArgs& a) {
    const auto store = load_store(a.store);
    const auto report = dataspace_report(*store.table);
    if (a.json)
        std::cout << to_json(report).dump(2) << "\n";
    else
        std::cout << to_text(report);
    return 0;
}

// ---- train ----

struct TrainArgs {
    std::string store, model = "ae", out, log;
    std::uint64_t seed = 0;
    std::size_t epochs = 100, patience = 10, batch = 64, embedding = 30, hidden = 128, input_dim = 0;
    double dropout = 0.5, lr = 1e-3, alpha = 1.0;
    std::string activation = "tanh";
};

int run_train(const TrainArgs& a) {
    const auto store = load_store(a.store);
    const ExemplarTable& table = *store.table;
    const ModelKind kind = model_kind_from_string(a.model);
    std::unique_ptr<Profiler> model;
    std::optional<TrainingLog> log;
    switch (kind) {
        case ModelKind::MFV: model = std::make_unique<MfvModel>(MfvModel::fit(table)); break;
        case ModelKind::NB: model = std::make_unique<NbModel>(NbModel::fit(table, a.alpha)); break;
        case ModelKind::AE: {
            AeConfig c;
            c.embedding_size = a.embedding;
            c.hidden_units = a.hidden;
            c.dropout = a.dropout;
            c.batch_size = a.batch;
            c.max_epochs = a.epochs;
            c.patience = a.patience;
            c.learning_rate = a.lr;
            c.seed = a.seed;
            c.activation = neural::activation_from_string(a.activation);
            auto r = train_autoencoder(table, c);
            model = std::make_unique<AeModel>(std::move(r.model));
            log = std::move(r.log);
            break;
        }
        case ModelKind::EMB: {
            EmbConfig c;
            c.input_dim = a.input_dim;
            c.hidden_units = a.hidden;
            c.batch_size = a.batch;
            c.max_epochs = a.epochs;
            c.patience = a.patience;
            c.learning_rate = a.lr;
            c.seed = a.seed;
            c.activation = neural::activation_from_string(a.activation);
            auto r = train_embedding_predictor(table, c);
            model = std::make_unique<EmbModel>(std::move(r.model));
            log = std::move(r.log);
            break;
        }
    }
    save_model(*model, a.out);
    std::cout << "trained " << to_string(kind) << " -> " << a.out << " (" << file_digest(a.out) << ")\n";
    if (log) {
        std::cout << "epochs " << log->epochs.size() << ", best epoch " << log->best_epoch << ", best dev loss "
                  << log->best_dev_loss << (log->stopped_early ? ", stopped early" : "") << "\n";
        for (const auto& f : log->untrained_facets) spdlog::warn("facet '{}' has no training values; head untrained", f);
        if (log->skipped_rows) spdlog::warn("{} rows skipped for lack of an entity vector", log->skipped_rows);
        if (!a.log.empty()) write_text(a.log, to_json(*log).dump(2) + "\n");
    }
    return 0;
}

// ---- evaluate ----

struct EvaluateArgs {
    std::string store, checkpoint, report, shift_csv, split = "test";
    std::vector<std::size_t> ks{1, 3};
    std::vector<std::string> curve_facets;
    std::string require_known;
    double mask_rate = 0.0;
    std::uint64_t seed = 0;
    bool json = false;
};

Split parse_split(const std::string& s) {
    if (s == "train") return Split::Train;
    if (s == "dev") return Split::Dev;
    if (s == "test") return Split::Test;
    throw ValidationError("unknown split '" + s + "' (expected train, dev, or test)");
}

int run_evaluate(const EvaluateArgs& a) {
    const auto store = load_store(a.store);
    const auto model = load_model(a.checkpoint, store.schema.get());
    const FacetSchema& schema = *store.schema;
    EvalOptions o;
    o.ks = a.ks;
    o.split = parse_split(a.split);
    o.input_mask_rate = a.mask_rate;
    o.seed = a.seed;
    if (!a.require_known.empty()) o.require_known = schema.facet_index(a.require_known);
    const auto report = evaluate_accuracy(*model, *store.table, o);
    if (a.json)
        std::cout << to_json(report, schema).dump(2) << "\n";
    else
        std::cout << to_csv(report, schema);
    if (!a.report.empty()) write_text(a.report, to_json(report, schema).dump(2) + "\n");

    if (!a.shift_csv.empty()) {
        std::vector<std::size_t> facets;
        for (const auto& name : a.curve_facets) facets.push_back(schema.facet_index(name));
        if (facets.empty())
            for (std::size_t f = 0; f < schema.size(); ++f) facets.push_back(f);
        std::vector<ShiftCurve> curves;
        for (std::size_t f : facets) {
            std::optional<std::size_t> req;
            if (o.require_known && *o.require_known != f) req = o.require_known;
            curves.push_back(shift_curve(*model, *store.table, f, req, o.split));
            spdlog::info("shift curve {}: spearman {:.3f}, regime {}", schema.facet(f).name, curves.back().spearman,
                         to_string(curves.back().regime));
        }
        write_text(a.shift_csv, to_csv(curves, schema));
    }
    return 0;
}

// ---- human-eval ----

struct HumanArgs {
    std::string checkpoint, judgments, out;
};

int run_human_eval(const HumanArgs& a) {
    const auto model = load_model(a.checkpoint);
    const auto report = human_evaluation(*model, read_judgments_file(a.judgments));
    const std::string text = to_json(report).dump(2) + "\n";
    std::cout << text;
    if (!a.out.empty()) write_text(a.out, text);
    return 0;
}

// ---- profile ----

struct ProfileArgs {
    std::string checkpoint, vector;
    std::vector<std::string> known;
    std::size_t top_n = 10;
};

int run_profile(const ProfileArgs& a) {
    std::shared_ptr<const Profiler> model = load_model(a.checkpoint);
    json req = {{"top_n", a.top_n}, {"known", json::object()}};
    for (const auto& kv : a.known) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) throw ValidationError("--known expects facet=value, got '" + kv + "'");
        req["known"][kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    if (!a.vector.empty()) {
        std::istringstream in(a.vector);
        std::vector<double> v;
        for (double x; in >> x;) v.push_back(x);
        req["vector"] = v;
    }
    ServiceOptions so;
    so.top_n_cap = std::max<std::size_t>(a.top_n, 1);
    const ProfileService svc(model, file_digest(a.checkpoint), so);
    const auto r = svc.profile(req.dump());
    std::cout << json::parse(r.body).dump(2) << "\n";
    return r.status == 200 ? 0 : kExitValidation;
}

// ---- serve ----

struct ServeArgs {
    std::string checkpoint;
    ServiceOptions options;
};

ProfileService* g_running = nullptr;

int run_serve(ServeArgs a) {
    auto svc = ProfileService::from_checkpoint(a.checkpoint, a.options);
    const int port = svc->bind();
    std::cout << "listening on http://" << a.options.host << ":" << port << std::endl;
    g_running = svc.get();
    std::signal(SIGINT, [](int) {
        if (g_running) g_running->stop();
    });
    std::signal(SIGTERM, [](int) {
        if (g_running) g_running->stop();
    });
    svc->listen();
    g_running = nullptr;
    return 0;
}

// ---- synth ----

struct SynthArgs {
    std::string store, triples, vectors_out;
    std::string kind = "deterministic";
    std::size_t rows = 1000, dim = 1000;
    std::uint64_t seed = 0;
    double a_missing = 0.0;
};

int run_synth(const SynthArgs& a) {
    ExemplarTable table = [&] {
        if (a.kind == "deterministic") {
            SyntheticOptions o;
            o.rows = a.rows;
            o.seed = a.seed;
            o.a_missing = a.a_missing;
            return deterministic_corpus(o);
        }
        if (a.kind == "separable") return separable_vector_corpus(a.rows, a.dim, a.seed);
        throw ValidationError("unknown corpus kind '" + a.kind + "' (expected deterministic or separable)");
    }();
    if (!a.store.empty()) save_store(table, a.store);
    if (!a.triples.empty()) {
        std::ofstream out(a.triples, std::ios::trunc);
        if (!out) throw IoError("cannot write '" + a.triples + "'");
        write_triples(table, out);
    }
    if (!a.vectors_out.empty()) {
        if (table.vector_dim() == 0) throw ValidationError("this corpus has no entity vectors");
        std::map<std::string, std::vector<double>> vectors;
        for (std::size_t r = 0; r < table.rows(); ++r) {
            const auto v = table.vector(r);
            vectors[table.entity_id(r)] = std::vector<double>(v.begin(), v.end());
        }
        write_vector_sidecar(vectors, a.vectors_out);
    }
    std::cout << "generated " << table.rows() << " rows\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    spdlog::set_default_logger(spdlog::stderr_color_mt("profiler"));

    CLI::App app{"Knowledge profiling: ingest facts, train profilers, evaluate, and serve profiles."};
    app.require_subcommand(1);
    std::string log_level = "info";
    app.add_option("--log-level", log_level, "trace, debug, info, warn, error, off")->capture_default_str();

    IngestArgs ingest_args;
    auto* ingest_cmd = app.add_subcommand("ingest", "Build a store from entity<TAB>facet<TAB>value triples (plain or gzip)");
    ingest_cmd->add_option("input", ingest_args.input, "Triples file")->required();
    ingest_cmd->add_option("--out", ingest_args.out, "Store directory")->required();
    ingest_cmd->add_option("--cap", ingest_args.cap, "Vocabulary cap per facet")->capture_default_str();
    ingest_cmd->add_option("--seed", ingest_args.seed, "Split seed")->capture_default_str();
    ingest_cmd->add_option("--vectors", ingest_args.vectors, "Entity vector sidecar (id<TAB>v1 v2 ...)");

    StatsArgs stats_args;
    auto* stats_cmd = app.add_subcommand("stats", "Per-facet entropy and dataspace size");
    stats_cmd->add_option("--store", stats_args.store, "Store directory")->required();
    stats_cmd->add_flag("--json", stats_args.json, "Emit JSON");

    TrainArgs train_args;
    auto* train_cmd = app.add_subcommand("train", "Train a profiler and write a checkpoint");
    train_cmd->add_option("--store", train_args.store, "Store directory")->required();
    train_cmd->add_option("--model", train_args.model, "ae, emb, nb, or mfv")
        ->check(CLI::IsMember({"ae", "emb", "nb", "mfv"}, CLI::ignore_case))
        ->capture_default_str();
    train_cmd->add_option("--out", train_args.out, "Checkpoint path")->required();
    train_cmd->add_option("--seed", train_args.seed)->capture_default_str();
    train_cmd->add_option("--epochs", train_args.epochs)->capture_default_str();
    train_cmd->add_option("--patience", train_args.patience)->capture_default_str();
    train_cmd->add_option("--batch", train_args.batch)->capture_default_str();
    train_cmd->add_option("--embedding-size", train_args.embedding)->capture_default_str();
    train_cmd->add_option("--hidden", train_args.hidden)->capture_default_str();
    train_cmd->add_option("--input-dim", train_args.input_dim, "EMB vector width; 0 takes it from the store")
        ->capture_default_str();
    train_cmd->add_option("--dropout", train_args.dropout)->capture_default_str();
    train_cmd->add_option("--lr", train_args.lr)->capture_default_str();
    train_cmd->add_option("--alpha", train_args.alpha, "NB smoothing")->capture_default_str();
    train_cmd->add_option("--activation", train_args.activation, "tanh or relu")->capture_default_str();
    train_cmd->add_option("--log", train_args.log, "Write the training log as JSON");

    EvaluateArgs eval_args;
    auto* eval_cmd = app.add_subcommand("evaluate", "Top-k accuracy and accuracy by number of known facets");
    eval_cmd->add_option("--store", eval_args.store, "Store directory")->required();
    eval_cmd->add_option("--checkpoint", eval_args.checkpoint, "Checkpoint path")->required();
    eval_cmd->add_option("--topk", eval_args.ks, "k values")->delimiter(',')->capture_default_str();
    eval_cmd->add_option("--shift-curve", eval_args.shift_csv, "Write accuracy-by-known-facets CSV here");
    eval_cmd->add_option("--facet", eval_args.curve_facets, "Facets for the shift curve (default: all)")
        ->delimiter(',');
    eval_cmd->add_option("--require-known", eval_args.require_known, "Only rows where this facet is known");
    eval_cmd->add_option("--mask-rate", eval_args.mask_rate, "Hide known inputs with this probability")
        ->capture_default_str();
    eval_cmd->add_option("--seed", eval_args.seed, "Masking seed")->capture_default_str();
    eval_cmd->add_option("--split", eval_args.split, "train, dev, or test")->capture_default_str();
    eval_cmd->add_option("--report", eval_args.report, "Write the accuracy report as JSON");
    eval_cmd->add_flag("--json", eval_args.json, "Print JSON instead of CSV");

    HumanArgs human_args;
    auto* human_cmd = app.add_subcommand("human-eval", "Compare model distributions with crowd judgments");
    human_cmd->add_option("--checkpoint", human_args.checkpoint, "Checkpoint path")->required();
    human_cmd->add_option("--judgments", human_args.judgments, "JSON-lines judgment file")->required();
    human_cmd->add_option("--out", human_args.out, "Write the report here as well");

    ProfileArgs profile_args;
    auto* profile_cmd = app.add_subcommand("profile", "Print the profile of a group");
    profile_cmd->add_option("--checkpoint", profile_args.checkpoint, "Checkpoint path")->required();
    profile_cmd->add_option("--known", profile_args.known, "facet=value pairs")->delimiter(',');
    profile_cmd->add_option("--top-n", profile_args.top_n)->capture_default_str();
    profile_cmd->add_option("--vector", profile_args.vector, "Entity vector, space separated (EMB)");

    ServeArgs serve_args;
    auto* serve_cmd = app.add_subcommand("serve", "Serve /schema, /profile, /shift, /health over HTTP");
    serve_cmd->add_option("--checkpoint", serve_args.checkpoint, "Checkpoint path")->required();
    serve_cmd->add_option("--host", serve_args.options.host)->capture_default_str();
    serve_cmd->add_option("--port", serve_args.options.port)->capture_default_str();
    serve_cmd->add_option("--top-n", serve_args.options.default_top_n, "Default top_n")->capture_default_str();
    serve_cmd->add_option("--top-n-cap", serve_args.options.top_n_cap)->capture_default_str();
    serve_cmd->add_option("--cors-origin", serve_args.options.cors_origin, "Empty disables CORS")
        ->capture_default_str();
    serve_cmd->add_option("--threads", serve_args.options.threads)->capture_default_str();

    SynthArgs synth_args;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic corpus");
    synth_cmd->add_option("--kind", synth_args.kind, "deterministic or separable")->capture_default_str();
    synth_cmd->add_option("--rows", synth_args.rows)->capture_default_str();
    synth_cmd->add_option("--dim", synth_args.dim, "Vector width (separable)")->capture_default_str();
    synth_cmd->add_option("--seed", synth_args.seed)->capture_default_str();
    synth_cmd->add_option("--a-missing", synth_args.a_missing)->capture_default_str();
    synth_cmd->add_option("--store", synth_args.store, "Write a store directory");
    synth_cmd->add_option("--triples", synth_args.triples, "Write triples");
    synth_cmd->add_option("--vectors", synth_args.vectors_out, "Write the vector sidecar");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return kExitValidation;
    }
    spdlog::set_level(spdlog::level::from_str(log_level));

    try {
        if (*ingest_cmd) return run_ingest(ingest_args);
        if (*stats_cmd) return run_stats(stats_args);
        if (*train_cmd) return run_train(train_args);
        if (*eval_cmd) return run_evaluate(eval_args);
        if (*human_cmd) return run_human_eval(human_args);
        if (*profile_cmd) return run_profile(profile_args);
        if (*serve_cmd) return run_serve(serve_args);
        if (*synth_cmd) return run_synth(synth_args);
    } catch (const IoError& e) {
        spdlog::error("{}", e.what());
        return kExitIo;
    } catch (const ValidationError& e) {
        spdlog::error("{}", e.what());
        return kExitValidation;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return kExitValidation;
    }
    return kExitValidation;
}
