#include "dtp/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "dtp/parallel.hpp"

namespace dtp {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt4(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

bool has_attack(const std::vector<AttackKind>& attacks, AttackKind kind) {
    return std::find(attacks.begin(), attacks.end(), kind) != attacks.end();
}

double model_accuracy(const TrainedClassifier& model, const Dataset& ds) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        PredictionVector p = model.predict(ds.record(i).x);
        std::size_t argmax =
            static_cast<std::size_t>(std::max_element(p.probs.begin(), p.probs.end()) -
                                     p.probs.begin());
        if (static_cast<int>(argmax) == ds.record(i).y) {
            ++correct;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(ds.size());
}

struct Confusion {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;
    std::size_t fn = 0;

    std::size_t total() const { return tp + fp + tn + fn; }
};

}  // namespace

void ProtocolConfig::validate(const Dataset& candidate) const {
    if (candidate.size() % 2 != 0) {
        throw std::invalid_argument("run_protocol: candidate size must be even");
    }
    if (iterations == 0) {
        throw std::invalid_argument("run_protocol: needs at least one iteration");
    }
    if (pdtp_iterations > iterations) {
        throw std::invalid_argument("run_protocol: pdtp_iterations exceeds iterations");
    }
    if (targets_per_iteration == 0 || targets_per_iteration > candidate.size()) {
        throw std::invalid_argument("run_protocol: target count out of range");
    }
    if (attacks.empty()) {
        throw std::invalid_argument("run_protocol: no attacks configured");
    }
    classifier.validate();
}

nlohmann::json ProtocolConfig::to_json() const {
    nlohmann::json attack_names = nlohmann::json::array();
    for (AttackKind kind : attacks) {
        attack_names.push_back(attack_kind_name(kind));
    }
    return {{"iterations", iterations},
            {"pdtp_iterations", pdtp_iterations},
            {"targets_per_iteration", targets_per_iteration},
            {"classifier", classifier.to_json()},
            {"attacks", attack_names},
            {"untargeted_models", untargeted_models},
            {"paired_models", paired_models},
            {"seed", seed}};
}

ProtocolConfig ProtocolConfig::from_json(const nlohmann::json& j) {
    ProtocolConfig cfg;
    cfg.iterations = j.value("iterations", std::size_t{100});
    cfg.pdtp_iterations = j.value("pdtp_iterations", std::size_t{10});
    cfg.targets_per_iteration = j.value("targets_per_iteration", std::size_t{100});
    if (j.contains("classifier")) {
        cfg.classifier = ClassifierSpec::from_json(j.at("classifier"));
    }
    if (j.contains("attacks")) {
        cfg.attacks.clear();
        for (const auto& name : j.at("attacks")) {
            cfg.attacks.push_back(attack_kind_from_name(name.get<std::string>()));
        }
    }
    cfg.untargeted_models = j.value("untargeted_models", std::size_t{20});
    cfg.paired_models = j.value("paired_models", std::size_t{5});
    cfg.seed = j.value("seed", std::uint64_t{0});
    cfg.workers = j.value("workers", std::size_t{1});
    return cfg;
}

nlohmann::json ExperimentReport::to_json() const {
    nlohmann::json aggs = nlohmann::json::object();
    for (const auto& [kind, agg] : aggregates) {
        aggs[attack_kind_name(kind)] = {
            {"verdicts", agg.verdicts},   {"accuracy", agg.accuracy},
            {"precision", agg.precision}, {"recall", agg.recall},
            {"f1", agg.f1},               {"pearson_rho", agg.pearson_rho},
            {"p_value", agg.p_value},     {"correlation_defined", agg.correlation_defined}};
    }
    nlohmann::json targets = nlohmann::json::array();
    for (const TargetReport& t : per_target) {
        nlohmann::json acc = nlohmann::json::object();
        for (const auto& [kind, value] : t.accuracy) {
            acc[attack_kind_name(kind)] = value;
        }
        targets.push_back({{"id", t.record_id},
                           {"avg_pdtp", t.avg_pdtp},
                           {"avg_pdtp_ratio", t.avg_pdtp_ratio},
                           {"accuracy", acc},
                           {"max_accuracy", t.max_accuracy}});
    }
    return {{"meta", meta},
            {"aggregates", aggs},
            {"max_accuracy_correlation",
             {{"rho", max_accuracy_rho},
              {"p_value", max_accuracy_p_value},
              {"defined", max_accuracy_correlation_defined}}},
            {"model_accuracy", {{"train", avg_train_accuracy}, {"test", avg_test_accuracy}}},
            {"per_target", targets}};
}

std::string ExperimentReport::per_target_csv() const {
    std::ostringstream out;
    out << "id,avg_pdtp,avg_pdtp_ratio";
    std::vector<AttackKind> kinds;
    for (const auto& [kind, agg] : aggregates) {
        (void)agg;
        kinds.push_back(kind);
        out << ',' << attack_kind_name(kind) << "_accuracy";
    }
    out << ",max_accuracy\n";
    for (const TargetReport& t : per_target) {
        out << t.record_id << ',' << fmt(t.avg_pdtp) << ',' << fmt(t.avg_pdtp_ratio);
        for (AttackKind kind : kinds) {
            out << ',' << fmt(t.accuracy.at(kind));
        }
        out << ',' << fmt(t.max_accuracy) << '\n';
    }
    return out.str();
}

std::string ExperimentReport::summary_table() const {
    double avg_pdtp = 0.0;
    for (const TargetReport& t : per_target) {
        avg_pdtp += t.avg_pdtp;
    }
    if (!per_target.empty()) {
        avg_pdtp /= static_cast<double>(per_target.size());
    }
    std::ostringstream out;
    out << "attack      train_acc  test_acc  accuracy  precision  recall  f1      "
           "avg_pdtp  pearson_rho  p_value\n";
    for (const auto& [kind, agg] : aggregates) {
        char line[256];
        std::snprintf(line, sizeof(line),
                      "%-11s %-10s %-9s %-9s %-10s %-7s %-7s %-9s %-12s %.3g\n",
                      attack_kind_name(kind).c_str(), fmt4(avg_train_accuracy).c_str(),
                      fmt4(avg_test_accuracy).c_str(), fmt4(agg.accuracy).c_str(),
                      fmt4(agg.precision).c_str(), fmt4(agg.recall).c_str(),
                      fmt4(agg.f1).c_str(), fmt4(avg_pdtp).c_str(),
                      fmt4(agg.pearson_rho).c_str(), agg.p_value);
        out << line;
    }
    return out.str();
}

ExperimentReport run_protocol(const Dataset& candidate, const ProtocolConfig& cfg) {
    cfg.validate(candidate);
    const std::size_t half = candidate.size() / 2;

    Dataset target_set =
        sample_subset(candidate, cfg.targets_per_iteration, derive_seed(cfg.seed, 0x7a26));
    const std::size_t n_targets = target_set.size();

    const bool want_distance = has_attack(cfg.attacks, AttackKind::Distance);
    const bool want_frequency = has_attack(cfg.attacks, AttackKind::Frequency);
    const bool want_untargeted = has_attack(cfg.attacks, AttackKind::Untargeted);

    // The adversary's shadow machinery depends only on the candidate set,
    // the training size, and the target, so it is built once and reused
    // across iterations.
    std::vector<ShadowEnsemble> ensembles;
    if (want_distance || want_frequency) {
        ensembles.resize(n_targets);
        parallel_for(n_targets, cfg.workers, [&](std::size_t i) {
            ensembles[i] = build_shadows_paired(candidate, cfg.classifier, cfg.paired_models,
                                                half, target_set.id(i),
                                                derive_seed(cfg.seed, 0xe5b, i));
            // only the cached predictions at the target are needed from here on
            ensembles[i].in_models.clear();
            ensembles[i].out_models.clear();
        });
    }

    UntargetedAttack untargeted;
    if (want_untargeted) {
        ShadowEnsemble shadow_pool =
            build_shadows_untargeted(candidate, cfg.classifier, cfg.untargeted_models, half,
                                     derive_seed(cfg.seed, 0xa77));
        untargeted = untargeted_attack_train(
            shadow_pool, candidate, default_attack_net_spec(derive_seed(cfg.seed, 0xa778)));
    }

    std::map<AttackKind, std::vector<std::size_t>> correct;
    std::map<AttackKind, Confusion> confusion;
    for (AttackKind kind : cfg.attacks) {
        correct[kind] = std::vector<std::size_t>(n_targets, 0);
        confusion[kind] = Confusion{};
    }
    std::vector<double> pdtp_eps_sum(n_targets, 0.0);
    std::vector<double> pdtp_ratio_sum(n_targets, 0.0);
    double train_acc_sum = 0.0;
    double test_acc_sum = 0.0;

    for (std::size_t iter = 0; iter < cfg.iterations; ++iter) {
        auto [d1, d2] = split_half(candidate, derive_seed(cfg.seed, 0x5b11, iter));
        for (int role = 0; role < 2; ++role) {
            const Dataset& t_half = role == 0 ? d1 : d2;
            const Dataset& other_half = role == 0 ? d2 : d1;

            ClassifierSpec model_spec = cfg.classifier;
            model_spec.seed = derive_seed(cfg.seed, 0x30de, iter, static_cast<std::uint64_t>(role));
            ClassifierPtr model = train(model_spec, t_half);

            train_acc_sum += model_accuracy(*model, t_half);
            test_acc_sum += model_accuracy(*model, other_half);

            for (std::size_t ti = 0; ti < n_targets; ++ti) {
                const Record& target = target_set.record(ti);
                PredictionVector q = model->predict(target.x);
                bool truth = t_half.contains(target_set.id(ti));
                for (AttackKind kind : cfg.attacks) {
                    AttackVerdict verdict;
                    switch (kind) {
                        case AttackKind::Distance:
                            verdict = distance_attack(ensembles[ti], q);
                            break;
                        case AttackKind::Frequency:
                            verdict = frequency_attack(ensembles[ti], q);
                            break;
                        case AttackKind::Untargeted:
                            verdict = untargeted_attack_decide(untargeted, target_set.id(ti),
                                                               target, q);
                            break;
                    }
                    bool member = verdict.member();
                    if (member == truth) {
                        correct[kind][ti]++;
                    }
                    Confusion& c = confusion[kind];
                    if (member && truth) {
                        c.tp++;
                    } else if (member && !truth) {
                        c.fp++;
                    } else if (!member && !truth) {
                        c.tn++;
                    } else {
                        c.fn++;
                    }
                }
            }

            if (iter < cfg.pdtp_iterations) {
                std::vector<std::size_t> inside;
                for (std::size_t ti = 0; ti < n_targets; ++ti) {
                    if (t_half.contains(target_set.id(ti))) {
                        inside.push_back(ti);
                    }
                }
                std::vector<PdtpMeasurement> measured(inside.size());
                parallel_for(inside.size(), cfg.workers, [&](std::size_t idx) {
                    measured[idx] =
                        measure_pdtp(model_spec, t_half, target_set.id(inside[idx]), *model);
                });
                for (std::size_t idx = 0; idx < inside.size(); ++idx) {
                    pdtp_eps_sum[inside[idx]] += measured[idx].epsilon;
                    pdtp_ratio_sum[inside[idx]] += measured[idx].max_ratio;
                }
            }
        }
    }

    ExperimentReport report;
    report.meta = {{"candidate_size", candidate.size()},
                   {"num_features", candidate.schema().num_features()},
                   {"num_classes", candidate.schema().num_classes()},
                   {"target_ids", target_set.ids()},
                   {"protocol", cfg.to_json()}};
    report.avg_train_accuracy = train_acc_sum / static_cast<double>(2 * cfg.iterations);
    report.avg_test_accuracy = test_acc_sum / static_cast<double>(2 * cfg.iterations);

    const double verdicts_per_target = static_cast<double>(2 * cfg.iterations);
    report.per_target.resize(n_targets);
    for (std::size_t ti = 0; ti < n_targets; ++ti) {
        TargetReport& t = report.per_target[ti];
        t.record_id = target_set.id(ti);
        t.avg_pdtp = cfg.pdtp_iterations
                         ? pdtp_eps_sum[ti] / static_cast<double>(cfg.pdtp_iterations)
                         : 0.0;
        t.avg_pdtp_ratio = cfg.pdtp_iterations
                               ? pdtp_ratio_sum[ti] / static_cast<double>(cfg.pdtp_iterations)
                               : 1.0;
        t.max_accuracy = 0.0;
        for (AttackKind kind : cfg.attacks) {
            double acc = static_cast<double>(correct[kind][ti]) / verdicts_per_target;
            t.accuracy[kind] = acc;
            t.max_accuracy = std::max(t.max_accuracy, acc);
        }
    }

    std::vector<double> avg_pdtps(n_targets);
    for (std::size_t ti = 0; ti < n_targets; ++ti) {
        avg_pdtps[ti] = report.per_target[ti].avg_pdtp;
    }
    for (AttackKind kind : cfg.attacks) {
        AttackAggregate agg;
        const Confusion& c = confusion[kind];
        agg.verdicts = c.total();
        agg.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
        agg.precision = c.tp + c.fp ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp)
                                    : 0.0;
        agg.recall = c.tp + c.fn ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn)
                                 : 0.0;
        agg.f1 = agg.precision + agg.recall > 0.0
                     ? 2.0 * agg.precision * agg.recall / (agg.precision + agg.recall)
                     : 0.0;
        std::vector<double> accs(n_targets);
        for (std::size_t ti = 0; ti < n_targets; ++ti) {
            accs[ti] = report.per_target[ti].accuracy.at(kind);
        }
        try {
            PearsonResult r = pearson(avg_pdtps, accs);
            agg.pearson_rho = r.rho;
            agg.p_value = r.p_value;
            agg.correlation_defined = true;
        } catch (const std::invalid_argument&) {
            agg.correlation_defined = false;
        }
        report.aggregates[kind] = agg;
    }
    {
        std::vector<double> max_accs(n_targets);
        for (std::size_t ti = 0; ti < n_targets; ++ti) {
            max_accs[ti] = report.per_target[ti].max_accuracy;
        }
        try {
            PearsonResult r = pearson(avg_pdtps, max_accs);
            report.max_accuracy_rho = r.rho;
            report.max_accuracy_p_value = r.p_value;
            report.max_accuracy_correlation_defined = true;
        } catch (const std::invalid_argument&) {
            report.max_accuracy_correlation_defined = false;
        }
    }
    return report;
}

nlohmann::json ReduceTrajectory::to_json() const {
    nlohmann::json steps_json = nlohmann::json::array();
    for (const ReduceStep& s : steps) {
        steps_json.push_back({{"removed_id", s.removed_id}, {"max_pdtp_after", s.max_pdtp_after}});
    }
    return {{"initial_max_pdtp", initial_max_pdtp},
            {"initial_argmax_id", initial_argmax_id},
            {"steps", steps_json}};
}

std::string ReduceTrajectory::csv() const {
    std::ostringstream out;
    out << "step,removed_id,max_pdtp_after\n";
    out << "0,," << fmt(initial_max_pdtp) << '\n';
    for (std::size_t i = 0; i < steps.size(); ++i) {
        out << i + 1 << ',' << steps[i].removed_id << ',' << fmt(steps[i].max_pdtp_after) << '\n';
    }
    return out.str();
}

namespace {

// max epsilon with ties resolved to the lowest record id
std::pair<double, std::int64_t> max_pdtp_over(const Dataset& ds, const ClassifierSpec& spec,
                                              std::size_t workers) {
    ClassifierPtr full = train(spec, ds);
    std::vector<double> eps(ds.size());
    parallel_for(ds.size(), workers, [&](std::size_t i) {
        eps[i] = measure_pdtp(spec, ds, ds.id(i), *full).epsilon;
    });
    double best = -1.0;
    std::int64_t best_id = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (eps[i] > best || (eps[i] == best && ds.id(i) < best_id)) {
            best = eps[i];
            best_id = ds.id(i);
        }
    }
    return {best, best_id};
}

}  // namespace

ReduceTrajectory reduce_dtp(const Dataset& t_set, const ClassifierSpec& spec,
                            std::size_t removals, std::size_t workers) {
    if (t_set.size() < 2) {
        throw std::invalid_argument("reduce_dtp: needs at least two records");
    }
    if (removals + 2 > t_set.size()) {
        throw std::invalid_argument("reduce_dtp: removals would empty the training set");
    }
    ReduceTrajectory out;
    Dataset current = t_set;
    auto [initial_eps, initial_id] = max_pdtp_over(current, spec, workers);
    out.initial_max_pdtp = initial_eps;
    out.initial_argmax_id = initial_id;
    std::int64_t next_removal = initial_id;
    for (std::size_t step = 0; step < removals; ++step) {
        current = current.without(next_removal);
        auto [eps, argmax_id] = max_pdtp_over(current, spec, workers);
        out.steps.push_back(ReduceStep{next_removal, eps});
        next_removal = argmax_id;
    }
    return out;
}

std::size_t PredictionHistogram::total() const {
    std::size_t sum = 0;
    for (std::size_t c : bin_counts) {
        sum += c;
    }
    return sum;
}

std::size_t PredictionHistogram::occupied_bins() const {
    std::size_t occupied = 0;
    for (std::size_t c : bin_counts) {
        if (c > 0) {
            ++occupied;
        }
    }
    return occupied;
}

PredictionHistogram prediction_variation(const Dataset& candidate, const ClassifierSpec& spec,
                                         VariationMode mode, std::size_t runs,
                                         const Record& probe, std::uint64_t seed) {
    if (runs < 2) {
        throw std::invalid_argument("prediction_variation: needs at least two runs");
    }
    validate_record(candidate.schema(), probe);
    if (mode == VariationMode::RandomInit && !spec.randomized()) {
        throw std::invalid_argument(
            "prediction_variation: no initialization randomness in a deterministic trainer");
    }
    if (mode == VariationMode::RandomSampling && candidate.size() < 2) {
        throw std::invalid_argument("prediction_variation: candidate set too small to sample");
    }
    PredictionHistogram hist;
    hist.class_of_interest = probe.y;
    hist.bin_counts.assign(kNumBins, 0);
    for (std::size_t run = 0; run < runs; ++run) {
        ClassifierPtr model;
        if (mode == VariationMode::RandomInit) {
            ClassifierSpec varied = spec;
            varied.seed = derive_seed(seed, 0x1417, run, spec.seed);
            model = train(varied, candidate);
        } else {
            Dataset sampled =
                sample_subset(candidate, candidate.size() / 2, derive_seed(seed, 0x5a3b, run));
            model = train(spec, sampled);
        }
        PredictionVector p = model->predict(probe.x);
        hist.bin_counts[static_cast<std::size_t>(bin_index(
            p.probs[static_cast<std::size_t>(probe.y)]))]++;
    }
    return hist;
}

}  // namespace dtp
