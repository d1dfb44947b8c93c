#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dtp/attacks.hpp"
#include "dtp/classifier.hpp"
#include "dtp/dataset.hpp"
#include "dtp/harness.hpp"
#include "dtp/kmeans.hpp"
#include "dtp/metrics.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitPolicy = 2;

json schema_to_json(const dtp::FeatureSchema& schema) {
    json features = json::array();
    for (const dtp::Feature& f : schema.features) {
        if (f.kind == dtp::FeatureKind::Categorical) {
            features.push_back({{"name", f.name}, {"kind", "categorical"}, {"values", f.values}});
        } else {
            features.push_back(
                {{"name", f.name}, {"kind", "numeric"}, {"min", f.min}, {"max", f.max}});
        }
    }
    return {{"features", features}, {"class_labels", schema.class_labels}};
}

dtp::FeatureSchema schema_from_json(const json& j) {
    dtp::FeatureSchema schema;
    for (const auto& jf : j.at("features")) {
        dtp::Feature f;
        f.name = jf.at("name").get<std::string>();
        std::string kind = jf.at("kind").get<std::string>();
        if (kind == "categorical") {
            f.kind = dtp::FeatureKind::Categorical;
            f.values = jf.at("values").get<std::vector<std::string>>();
        } else if (kind == "numeric") {
            f.kind = dtp::FeatureKind::Numeric;
            f.min = jf.at("min").get<double>();
            f.max = jf.at("max").get<double>();
        } else {
            throw std::runtime_error("schema: unknown feature kind " + kind);
        }
        schema.features.push_back(std::move(f));
    }
    schema.class_labels = j.at("class_labels").get<std::vector<std::string>>();
    schema.validate();
    return schema;
}

struct CliOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<double> lipschitz;
    std::size_t workers = 1;
    bool enforce_dtp1 = false;
    std::string targets = "all";
    std::string attack_kind = "distance";
    std::size_t removals = 0;
};

struct RunContext {
    json config;
    std::uint64_t seed = 0;
    fs::path out_dir;
    std::size_t workers = 1;
};

RunContext load_context(const CliOptions& opt) {
    RunContext ctx;
    if (opt.config_path.empty()) {
        throw std::runtime_error("missing --config");
    }
    std::ifstream in(opt.config_path);
    if (!in) {
        throw std::runtime_error("cannot open config " + opt.config_path);
    }
    in >> ctx.config;
    if (opt.seed) {
        ctx.seed = *opt.seed;
    } else if (ctx.config.contains("seed")) {
        ctx.seed = ctx.config.at("seed").get<std::uint64_t>();
    } else {
        throw std::runtime_error("config needs a seed (no wall-clock default)");
    }
    std::string out = opt.out ? *opt.out : ctx.config.value("out", std::string("out"));
    ctx.out_dir = out;
    fs::create_directories(ctx.out_dir);
    ctx.workers = opt.workers;
    return ctx;
}

dtp::Dataset load_dataset(const RunContext& ctx) {
    const json& dataset = ctx.config.at("dataset");
    if (dataset.contains("synth")) {
        const json& synth = dataset.at("synth");
        return dtp::synth_purchase(synth.at("records").get<std::size_t>(),
                                   synth.at("features").get<std::size_t>(),
                                   synth.at("classes").get<std::size_t>(),
                                   dtp::derive_seed(ctx.seed, 0xda7a));
    }
    if (dataset.contains("csv")) {
        auto schema = std::make_shared<dtp::FeatureSchema>(
            schema_from_json(dataset.at("schema")));
        return dtp::load_csv(dataset.at("csv").get<std::string>(), schema);
    }
    throw std::runtime_error("config dataset needs either 'synth' or 'csv'");
}

dtp::ClassifierSpec load_classifier(const RunContext& ctx) {
    dtp::ClassifierSpec spec = dtp::ClassifierSpec::from_json(ctx.config.at("classifier"));
    if (!ctx.config.at("classifier").contains("seed")) {
        spec.seed = dtp::derive_seed(ctx.seed, 0xc1a5);
    }
    return spec;
}

std::vector<std::int64_t> parse_targets(const std::string& targets, const dtp::Dataset& d) {
    std::vector<std::int64_t> ids;
    if (targets == "all") {
        ids = d.ids();
        return ids;
    }
    std::stringstream ss(targets);
    std::string item;
    while (std::getline(ss, item, ',')) {
        ids.push_back(std::stoll(item));
    }
    return ids;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << content;
}

int cmd_synth(const CliOptions& opt) {
    RunContext ctx = load_context(opt);
    dtp::Dataset d = load_dataset(ctx);
    fs::path csv_path = ctx.out_dir / "synth.csv";
    dtp::save_csv(d, csv_path.string());
    write_file(ctx.out_dir / "synth_schema.json", schema_to_json(d.schema()).dump(2) + "\n");
    std::cout << csv_path.string() << "\n";
    return kExitOk;
}

int cmd_pdtp(const CliOptions& opt) {
    RunContext ctx = load_context(opt);
    dtp::Dataset t_set = load_dataset(ctx);
    dtp::ClassifierSpec spec = load_classifier(ctx);
    std::vector<std::int64_t> ids = parse_targets(opt.targets, t_set);

    dtp::ClassifierPtr full = dtp::train(spec, t_set);
    json measurements = json::array();
    std::ostringstream csv;
    csv << "record_id,epsilon,ratio\n";
    bool violation = false;
    for (std::int64_t id : ids) {
        dtp::PdtpMeasurement m = dtp::measure_pdtp(spec, t_set, id, *full);
        measurements.push_back(m.to_json());
        csv << id << ',' << m.epsilon << ',' << m.max_ratio << '\n';
        if (m.epsilon > 1.0) {
            violation = true;
        }
    }
    write_file(ctx.out_dir / "pdtp.json", measurements.dump(2) + "\n");
    write_file(ctx.out_dir / "pdtp.csv", csv.str());
    if (opt.enforce_dtp1 && violation) {
        std::cerr << "dtp: PDTP above 1 found; DTP-1 policy violated\n";
        return kExitPolicy;
    }
    return kExitOk;
}

int cmd_dtp(const CliOptions& opt) {
    RunContext ctx = load_context(opt);
    dtp::Dataset t_set = load_dataset(ctx);
    dtp::ClassifierSpec spec = load_classifier(ctx);
    std::vector<std::int64_t> ids = parse_targets(opt.targets, t_set);
    dtp::DtpOptions options;
    options.feature_space_cap = ctx.config.value("dtp_cap", std::uint64_t{1000000});
    json out = json::array();
    for (std::int64_t id : ids) {
        out.push_back(dtp::measure_dtp_exhaustive(spec, t_set, id, options).to_json());
    }
    write_file(ctx.out_dir / "dtp.json", out.dump(2) + "\n");
    return kExitOk;
}

int cmd_attack(const CliOptions& opt) {
    RunContext ctx = load_context(opt);
    dtp::Dataset candidate = load_dataset(ctx);
    dtp::ClassifierSpec spec = load_classifier(ctx);
    dtp::AttackKind kind = dtp::attack_kind_from_name(opt.attack_kind);
    std::size_t train_size = ctx.config.value("train_size", candidate.size() / 2);
    std::vector<std::int64_t> ids = parse_targets(opt.targets, candidate);

    dtp::Dataset t_set = dtp::sample_subset(candidate, train_size,
                                            dtp::derive_seed(ctx.seed, 0x7a12));
    dtp::ClassifierSpec target_spec = spec;
    target_spec.seed = dtp::derive_seed(ctx.seed, 0x7a13);
    dtp::ClassifierPtr target_model = dtp::train(target_spec, t_set);

    dtp::UntargetedAttack untargeted;
    if (kind == dtp::AttackKind::Untargeted) {
        dtp::ShadowEnsemble pool = dtp::build_shadows_untargeted(
            candidate, spec, ctx.config.value("untargeted_models", std::size_t{20}), train_size,
            dtp::derive_seed(ctx.seed, 0xa77));
        untargeted = dtp::untargeted_attack_train(
            pool, candidate, dtp::default_attack_net_spec(dtp::derive_seed(ctx.seed, 0xa778)));
    }

    std::ostringstream lines;
    for (std::int64_t id : ids) {
        const dtp::Record& target = candidate.record(candidate.index_of(id));
        dtp::PredictionVector q = target_model->predict(target.x);
        dtp::AttackVerdict verdict;
        if (kind == dtp::AttackKind::Untargeted) {
            verdict = dtp::untargeted_attack_decide(untargeted, id, target, q);
        } else {
            dtp::ShadowEnsemble ensemble = dtp::build_shadows_paired(
                candidate, spec, ctx.config.value("paired_models", std::size_t{5}), train_size,
                id, dtp::derive_seed(ctx.seed, 0xe5b, static_cast<std::uint64_t>(id)));
            verdict = kind == dtp::AttackKind::Distance ? dtp::distance_attack(ensemble, q)
                                                        : dtp::frequency_attack(ensemble, q);
        }
        lines << verdict.to_json().dump() << '\n';
    }
    write_file(ctx.out_dir / "verdicts.jsonl", lines.str());
    return kExitOk;
}

int cmd_experiment(const CliOptions& opt) {
    RunContext ctx = load_context(opt);
    dtp::Dataset candidate = load_dataset(ctx);
    dtp::ProtocolConfig cfg = dtp::ProtocolConfig::from_json(
        ctx.config.value("protocol", json::object()));
    cfg.classifier = load_classifier(ctx);
    cfg.seed = ctx.seed;
    cfg.workers = ctx.workers;
    if (cfg.targets_per_iteration > candidate.size()) {
        cfg.targets_per_iteration = candidate.size();
    }
    auto started = std::chrono::steady_clock::now();
    dtp::ExperimentReport report = dtp::run_protocol(candidate, cfg);
    auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started);
    write_file(ctx.out_dir / "report.json", report.to_json().dump(2) + "\n");
    write_file(ctx.out_dir / "per_target.csv", report.per_target_csv());
    write_file(ctx.out_dir / "summary.txt", report.summary_table());
    std::cerr << "experiment finished in " << elapsed.count() << " s\n";
    std::cout << (ctx.out_dir / "report.json").string() << "\n";
    return kExitOk;
}

int cmd_stability(const CliOptions& opt) {
    RunContext ctx = load_context(opt);
    dtp::Dataset t_set = load_dataset(ctx);
    dtp::ClassifierSpec spec = load_classifier(ctx);
    std::optional<double> lipschitz = opt.lipschitz;
    if (!lipschitz && ctx.config.contains("lipschitz")) {
        lipschitz = ctx.config.at("lipschitz").get<double>();
    }
    json out;
    try {
        dtp::StabilityBound bound = dtp::stability_bound(spec, t_set);
        out = bound.to_json();
    } catch (const std::invalid_argument& e) {
        if (!lipschitz) {
            throw;  // no analytic stability bound and no L supplied
        }
        dtp::ClassifierPtr full = dtp::train(spec, t_set);
        std::vector<std::pair<std::int64_t, dtp::ClassifierPtr>> loo;
        loo.reserve(t_set.size());
        for (std::int64_t id : t_set.ids()) {
            loo.emplace_back(id, dtp::train(spec, t_set.without(id)));
        }
        dtp::DtpMeasurement bound = dtp::dtp_lipschitz_bound(*lipschitz, *full, loo);
        out = bound.to_json();
        out["lipschitz_constant"] = *lipschitz;
    }
    write_file(ctx.out_dir / "stability.json", out.dump(2) + "\n");
    std::cout << out.dump(2) << "\n";
    return kExitOk;
}

int cmd_reduce(const CliOptions& opt) {
    RunContext ctx = load_context(opt);
    dtp::Dataset t_set = load_dataset(ctx);
    dtp::ClassifierSpec spec = load_classifier(ctx);
    dtp::ReduceTrajectory trajectory = dtp::reduce_dtp(t_set, spec, opt.removals, ctx.workers);
    write_file(ctx.out_dir / "reduce.csv", trajectory.csv());
    write_file(ctx.out_dir / "reduce.json", trajectory.to_json().dump(2) + "\n");
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"membership-privacy auditing toolkit"};
    app.require_subcommand(1);

    CliOptions opt;
    app.add_option("--config", opt.config_path, "JSON run configuration")->required();
    app.add_option("--seed", opt.seed, "master seed override");
    app.add_option("--out", opt.out, "output directory override");
    app.add_option("--workers", opt.workers, "worker thread count");

    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic purchase-style dataset");
    CLI::App* pdtp = app.add_subcommand("pdtp", "leave-one-out PDTP measurements");
    pdtp->add_option("--targets", opt.targets, "comma separated record ids or 'all'");
    pdtp->add_flag("--enforce-dtp1", opt.enforce_dtp1,
                   "exit 2 when any record has epsilon above 1");
    CLI::App* dtp_cmd = app.add_subcommand("dtp", "exhaustive DTP over the feature space");
    dtp_cmd->add_option("--targets", opt.targets, "comma separated record ids or 'all'");
    CLI::App* attack = app.add_subcommand("attack", "run a membership attack");
    attack->add_option("--attack", opt.attack_kind, "untargeted | distance | frequency");
    attack->add_option("--targets", opt.targets, "comma separated record ids or 'all'");
    CLI::App* experiment = app.add_subcommand("experiment", "full evaluation protocol");
    CLI::App* stability = app.add_subcommand("stability", "analytic or Lipschitz DTP bound");
    stability->add_option("--lipschitz", opt.lipschitz, "Lipschitz constant for parametric models");
    CLI::App* reduce = app.add_subcommand("reduce", "iterative high-risk record removal");
    reduce->add_option("--removals", opt.removals, "number of records to remove")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) return cmd_synth(opt);
        if (pdtp->parsed()) return cmd_pdtp(opt);
        if (dtp_cmd->parsed()) return cmd_dtp(opt);
        if (attack->parsed()) return cmd_attack(opt);
        if (experiment->parsed()) return cmd_experiment(opt);
        if (stability->parsed()) return cmd_stability(opt);
        if (reduce->parsed()) return cmd_reduce(opt);
    } catch (const std::exception& e) {
        std::cerr << "dtp: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
