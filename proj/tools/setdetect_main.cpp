// setdetect: detect single-engine taxiing from ground trajectories and
// correct taxi fuel estimates. Subcommands map onto the library pipeline:
//   gen -> label -> split -> train -> threshold -> eval
//   loc-train -> loc-eval     (shutdown-second estimators)
//   assess                    (fuel totals with SET correction)
// Every command writes its outputs plus a run_manifest.txt into --out-dir.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "setdetect/artifact.hpp"
#include "setdetect/config.hpp"
#include "setdetect/fuelassess.hpp"
#include "setdetect/labeler.hpp"
#include "setdetect/locnet.hpp"
#include "setdetect/manifest.hpp"
#include "setdetect/synthgen.hpp"
#include "setdetect/train.hpp"
#include "setdetect/version.hpp"

namespace fs = std::filesystem;
using namespace setdetect;

namespace {

struct GlobalOptions {
    std::string config_path;
    std::string out_dir = ".";
    std::optional<long> seed;
    std::optional<double> field_elevation_ft;  ///< when set, tracks are cut to the taxi-in phase on load
    int threads = 1;
};

Config load_config(const GlobalOptions& g) {
    return g.config_path.empty() ? Config{} : Config::load(g.config_path);
}

RunManifest make_manifest(const std::string& command, const GlobalOptions& g, const Config& cfg,
                          std::uint64_t seed) {
    RunManifest m;
    m.command = command;
    m.seed = seed;
    m.config = cfg.entries();
    if (!g.config_path.empty()) m.add_input(g.config_path);
    return m;
}

std::vector<GroundTrack> load_tracks(const GlobalOptions& g, const Config& cfg, const std::string& path,
                                     RunManifest& manifest) {
    manifest.add_input(path);
    auto in = csv::open_in(path);
    ParseResult r = parse_tracks(in, ParseMode::surveillance);
    for (const auto& d : r.diagnostics)
        std::cerr << "warning: dropped flight " << d.flight_id << ": " << d.detail << "\n";
    if (g.field_elevation_ft) {
        const TaxiInConfig taxi = cfg.taxi_config();
        std::vector<GroundTrack> cut;
        for (auto& t : r.tracks) {
            try {
                cut.push_back(truncate_taxi_in(t, *g.field_elevation_ft, taxi));
            } catch (const NoTaxiPhase& e) {
                std::cerr << "warning: " << e.what() << "\n";
            }
        }
        r.tracks = std::move(cut);
    }
    if (r.tracks.empty()) throw IoError("no usable flights in " + path);
    return r.tracks;
}

std::vector<SetAnnotation> load_annotations(const std::string& path, const std::vector<GroundTrack>& tracks,
                                            RunManifest& manifest) {
    manifest.add_input(path);
    auto in = csv::open_in(path);
    auto rows = read_labels_csv(in);
    std::unordered_map<std::string, SetAnnotation> by_id;
    for (auto& r : rows) by_id[r.flight_id] = r.annotation;
    std::vector<SetAnnotation> out;
    out.reserve(tracks.size());
    for (const auto& t : tracks) {
        auto it = by_id.find(t.flight_id);
        if (it == by_id.end()) throw IoError("label file is missing flight " + t.flight_id);
        out.push_back(it->second);
    }
    return out;
}

SplitAssignment load_split(const std::string& path, const std::vector<std::string>& flight_ids,
                           RunManifest& manifest) {
    manifest.add_input(path);
    auto in = csv::open_in(path);
    return read_split_csv(in, flight_ids);
}

std::string out_path(const GlobalOptions& g, const std::string& name) {
    fs::create_directories(g.out_dir);
    return (fs::path(g.out_dir) / name).string();
}

void write_text(const std::string& path, const std::string& text) {
    auto out = csv::open_out(path);
    out << text;
}

std::vector<std::string> ids_of(const std::vector<GroundTrack>& tracks) {
    std::vector<std::string> ids;
    ids.reserve(tracks.size());
    for (const auto& t : tracks) ids.push_back(t.flight_id);
    return ids;
}

std::vector<int> labels_of(const std::vector<SetAnnotation>& anns) {
    std::vector<int> labels;
    labels.reserve(anns.size());
    for (const auto& a : anns) labels.push_back(a.label);
    return labels;
}

// --- subcommand bodies ------------------------------------------------------

int cmd_gen(const GlobalOptions& g, bool shifted) {
    Config cfg = load_config(g);
    GenConfig gen_cfg = cfg.gen_config();
    if (g.seed) gen_cfg.seed = static_cast<std::uint64_t>(*g.seed);
    ShiftSpec shift = shifted ? cfg.shift_spec() : ShiftSpec{};
    RunManifest manifest = make_manifest(shifted ? "gen --shifted" : "gen", g, cfg, gen_cfg.seed);

    auto flights = generate_shifted(gen_cfg, shift);
    const std::string tracks_path = out_path(g, "tracks.csv");
    {
        auto out = csv::open_out(tracks_path);
        write_tracks_csv(out, tracks_of(flights));
    }
    {
        auto out = csv::open_out(out_path(g, "gen_manifest.txt"));
        write_gen_manifest(out, gen_cfg, shift);
    }
    manifest.outputs = {tracks_path, out_path(g, "gen_manifest.txt")};
    manifest.write(g.out_dir);
    int n_set = 0;
    for (const auto& f : flights) n_set += f.is_set ? 1 : 0;
    std::cout << "generated " << flights.size() << " flights (" << n_set << " SET) -> " << tracks_path << "\n";
    return 0;
}

int cmd_featurize(const GlobalOptions& g, const std::string& tracks_path, const std::string& flight_id) {
    Config cfg = load_config(g);
    RunManifest manifest = make_manifest("featurize", g, cfg, 0);
    auto tracks = load_tracks(g, cfg, tracks_path, manifest);
    std::size_t written = 0;
    for (const auto& t : tracks) {
        if (!flight_id.empty() && t.flight_id != flight_id) continue;
        FeatureMatrix fm = build_features(t);
        const std::string path = out_path(g, "features_" + t.flight_id + ".csv");
        auto out = csv::open_out(path);
        write_features_csv(out, fm);
        manifest.outputs.push_back(path);
        ++written;
    }
    if (written == 0) throw IoError("no flight matched " + flight_id);
    manifest.write(g.out_dir);
    std::cout << "wrote " << written << " feature matrices\n";
    return 0;
}

int cmd_label(const GlobalOptions& g, const std::string& tracks_path) {
    Config cfg = load_config(g);
    LabelConfig label_cfg = cfg.label_config();
    RunManifest manifest = make_manifest("label", g, cfg, 0);
    auto tracks = load_tracks(g, cfg, tracks_path, manifest);
    std::vector<SetAnnotation> anns;
    anns.reserve(tracks.size());
    for (const auto& t : tracks) anns.push_back(annotate(t, label_cfg));
    const std::string path = out_path(g, "labels.csv");
    {
        auto out = csv::open_out(path);
        write_labels_csv(out, ids_of(tracks), anns);
    }
    manifest.outputs = {path};
    manifest.write(g.out_dir);
    int n_pos = 0;
    for (const auto& a : anns) n_pos += a.label;
    std::cout << "labeled " << tracks.size() << " flights (" << n_pos << " SET) -> " << path << "\n";
    return 0;
}

int cmd_split(const GlobalOptions& g, const std::string& tracks_path, const std::string& labels_path) {
    Config cfg = load_config(g);
    TrainConfig train_cfg = cfg.train_config();
    if (g.seed) train_cfg.seed = static_cast<std::uint64_t>(*g.seed);
    RunManifest manifest = make_manifest("split", g, cfg, train_cfg.seed);
    auto tracks = load_tracks(g, cfg, tracks_path, manifest);
    auto anns = load_annotations(labels_path, tracks, manifest);
    SplitAssignment split = stratified_split(labels_of(anns), train_cfg.fractions, train_cfg.seed);
    const std::string path = out_path(g, "split.csv");
    {
        auto out = csv::open_out(path);
        write_split_csv(out, ids_of(tracks), split);
    }
    manifest.outputs = {path};
    manifest.write(g.out_dir);
    std::cout << "split " << tracks.size() << " flights -> " << path << "\n";
    return 0;
}

struct LoadedDataset {
    std::vector<GroundTrack> tracks;
    std::vector<SetAnnotation> annotations;
    Dataset data;
    SplitAssignment split;
};

LoadedDataset load_dataset(const GlobalOptions& g, const Config& cfg, const std::string& tracks_path,
                           const std::string& labels_path, const std::string& split_path, TargetKind kind,
                           RunManifest& manifest) {
    LoadedDataset d;
    d.tracks = load_tracks(g, cfg, tracks_path, manifest);
    d.annotations = load_annotations(labels_path, d.tracks, manifest);
    d.data = make_dataset(d.tracks, d.annotations, kind);
    d.split = load_split(split_path, d.data.flight_ids, manifest);
    return d;
}

int cmd_train(const GlobalOptions& g, const std::string& tracks_path, const std::string& labels_path,
              const std::string& split_path) {
    Config cfg = load_config(g);
    ArchConfig arch = cfg.arch_config();
    TrainConfig train_cfg = cfg.train_config();
    if (g.seed) train_cfg.seed = static_cast<std::uint64_t>(*g.seed);
    RunManifest manifest = make_manifest("train", g, cfg, train_cfg.seed);
    LoadedDataset d = load_dataset(g, cfg, tracks_path, labels_path, split_path, TargetKind::classification, manifest);

    TrainResult r = train_network(build_nmdp(arch, HeadKind::sigmoid), d.data, d.split, train_cfg, LossKind::bce);
    const std::string stem = out_path(g, "model");
    save_artifact(r.artifact, stem);
    {
        auto out = csv::open_out(out_path(g, "history.csv"));
        write_history_csv(out, r.history);
    }
    manifest.outputs = {stem + ".manifest", stem + ".bin", out_path(g, "history.csv")};
    manifest.write(g.out_dir);
    std::cout << "trained " << r.history.size() << " epochs, best val loss " << csv::fmt(r.best_val_loss)
              << " at epoch " << r.best_epoch << " -> " << stem << ".{manifest,bin}\n";
    return 0;
}

int cmd_tune(const GlobalOptions& g, const std::string& tracks_path, const std::string& labels_path,
             const std::string& split_path, std::string param, std::vector<double> values) {
    Config cfg = load_config(g);
    ArchConfig arch = cfg.arch_config();
    TrainConfig train_cfg = cfg.train_config();
    if (g.seed) train_cfg.seed = static_cast<std::uint64_t>(*g.seed);
    if (param.empty()) param = cfg.get_string("tune.param", "");
    if (values.empty()) values = cfg.get_list("tune.values", {});
    if (param.empty()) throw InvalidConfig("tune: no sweep parameter given (--param or [tune] param)");
    RunManifest manifest = make_manifest("tune " + param, g, cfg, train_cfg.seed);
    LoadedDataset d = load_dataset(g, cfg, tracks_path, labels_path, split_path, TargetKind::classification, manifest);

    auto rows = sweep(arch, train_cfg, param, values, d.data, d.split, g.threads);
    const std::string path = out_path(g, "sweep.csv");
    {
        auto out = csv::open_out(path);
        write_sweep_csv(out, rows);
    }
    manifest.outputs = {path};
    manifest.write(g.out_dir);
    std::cout << "swept " << rows.size() << " configurations -> " << path << "\n";
    return 0;
}

int cmd_threshold(const GlobalOptions& g, const std::string& tracks_path, const std::string& labels_path,
                  const std::string& split_path, const std::string& model_stem) {
    Config cfg = load_config(g);
    RunManifest manifest = make_manifest("threshold", g, cfg, 0);
    LoadedDataset d = load_dataset(g, cfg, tracks_path, labels_path, split_path, TargetKind::classification, manifest);
    manifest.add_input(model_stem + ".manifest");
    manifest.add_input(model_stem + ".bin");

    ModelArtifact artifact = load_artifact(model_stem);
    Network<float> net = artifact.to_network();
    const auto val_idx = partition_indices(d.split, Partition::val);
    std::vector<double> scores = predict_scores(net, d.data, val_idx);
    std::vector<int> labels;
    for (std::size_t i : val_idx) labels.push_back(d.data.labels[i]);

    const double th = select_threshold(scores, labels);
    artifact.threshold = th;
    save_artifact(artifact, model_stem);
    {
        auto out = csv::open_out(out_path(g, "f1_curve.csv"));
        write_f1_curve_csv(out, scores, labels);
    }
    write_text(out_path(g, "threshold.txt"), csv::fmt(th) + "\n");
    manifest.outputs = {model_stem + ".manifest", out_path(g, "f1_curve.csv"), out_path(g, "threshold.txt")};
    manifest.write(g.out_dir);
    std::cout << "selected threshold " << csv::fmt(th) << "\n";
    return 0;
}

int cmd_eval(const GlobalOptions& g, const std::string& tracks_path, const std::string& labels_path,
             const std::string& split_path, const std::string& model_stem) {
    Config cfg = load_config(g);
    RunManifest manifest = make_manifest("eval", g, cfg, 0);
    LoadedDataset d = load_dataset(g, cfg, tracks_path, labels_path, split_path, TargetKind::classification, manifest);
    manifest.add_input(model_stem + ".manifest");
    manifest.add_input(model_stem + ".bin");

    ModelArtifact artifact = load_artifact(model_stem);
    Network<float> net = artifact.to_network();

    const std::string path = out_path(g, "eval.csv");
    auto out = csv::open_out(path);
    out << "partition,threshold,tp,fp,tn,fn,precision,recall,f1\n";
    for (Partition p : {Partition::val, Partition::test}) {
        const auto idx = partition_indices(d.split, p);
        std::vector<double> scores = predict_scores(net, d.data, idx);
        std::vector<int> labels;
        for (std::size_t i : idx) labels.push_back(d.data.labels[i]);
        Confusion c = confusion_at(scores, labels, artifact.threshold);
        out << partition_name(p) << ',' << csv::fmt(artifact.threshold) << ',' << c.tp << ',' << c.fp << ','
            << c.tn << ',' << c.fn << ',' << csv::fmt(c.precision()) << ',' << csv::fmt(c.recall()) << ','
            << csv::fmt(c.f1()) << "\n";
    }
    out.close();
    manifest.outputs = {path};
    manifest.write(g.out_dir);
    std::cout << "evaluation -> " << path << "\n";
    return 0;
}

/// Positives-only view with the global partition kept per flight.
std::pair<Dataset, SplitAssignment> positives_view(const Dataset& data, const SplitAssignment& split) {
    Dataset pos;
    SplitAssignment pos_split;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (data.labels[i] != 1) continue;
        pos.flight_ids.push_back(data.flight_ids[i]);
        pos.features.push_back(data.features[i]);
        pos.labels.push_back(1);
        pos.targets.push_back(data.targets[i]);
        pos_split.push_back(split[i]);
    }
    return {std::move(pos), std::move(pos_split)};
}

int cmd_loc_train(const GlobalOptions& g, const std::string& tracks_path, const std::string& labels_path,
                  const std::string& split_path) {
    Config cfg = load_config(g);
    RegressorConfig reg_cfg = cfg.regressor_config();
    if (g.seed) reg_cfg.train.seed = static_cast<std::uint64_t>(*g.seed);
    RunManifest manifest = make_manifest("loc-train", g, cfg, reg_cfg.train.seed);
    LoadedDataset d = load_dataset(g, cfg, tracks_path, labels_path, split_path, TargetKind::start_index, manifest);

    auto [pos, pos_split] = positives_view(d.data, d.split);
    TrainResult r = train_regressor(pos, pos_split, reg_cfg);
    const std::string stem = out_path(g, "loc_model");
    save_artifact(r.artifact, stem);
    {
        auto out = csv::open_out(out_path(g, "loc_history.csv"));
        write_history_csv(out, r.history);
    }
    manifest.outputs = {stem + ".manifest", stem + ".bin", out_path(g, "loc_history.csv")};
    manifest.write(g.out_dir);
    std::cout << "trained start regressor on " << pos.size() << " positives, best val MSE "
              << csv::fmt(r.best_val_loss) << " -> " << stem << ".{manifest,bin}\n";
    return 0;
}

int cmd_loc_eval(const GlobalOptions& g, const std::string& tracks_path, const std::string& labels_path,
                 const std::string& split_path, const std::string& loc_model_stem) {
    Config cfg = load_config(g);
    RunManifest manifest = make_manifest("loc-eval", g, cfg, 0);
    LoadedDataset d = load_dataset(g, cfg, tracks_path, labels_path, split_path, TargetKind::start_index, manifest);
    auto [pos, pos_split] = positives_view(d.data, d.split);

    std::vector<SetAnnotation> train_pos;
    for (std::size_t i = 0; i < d.data.size(); ++i)
        if (d.data.labels[i] == 1 && d.split[i] == Partition::train) train_pos.push_back(d.annotations[i]);
    const int learned_mean = fit_mean(train_pos);

    std::optional<Network<float>> regressor;
    if (!loc_model_stem.empty()) {
        manifest.add_input(loc_model_stem + ".manifest");
        manifest.add_input(loc_model_stem + ".bin");
        regressor = load_artifact(loc_model_stem).to_network();
    }

    std::vector<std::pair<std::string, StartEstimatorConfig>> methods;
    {
        StartEstimatorConfig nominal;
        nominal.method = StartMethod::nominal;
        nominal.nominal_offset_s = static_cast<int>(cfg.get_long("loc.nominal_offset_s", 180));
        methods.emplace_back("nominal_" + std::to_string(nominal.nominal_offset_s) + "s", nominal);
        StartEstimatorConfig mean_cfg;
        mean_cfg.method = StartMethod::train_mean;
        mean_cfg.learned_mean_s = learned_mean;
        methods.emplace_back("train_mean", mean_cfg);
        if (regressor) {
            StartEstimatorConfig reg;
            reg.method = StartMethod::regression;
            methods.emplace_back("regression", reg);
        }
    }

    const auto val_idx = partition_indices(pos_split, Partition::val);
    const auto test_idx = partition_indices(pos_split, Partition::test);
    auto truths_at = [&pos](const std::vector<std::size_t>& idx) {
        std::vector<double> t;
        for (std::size_t i : idx) t.push_back(static_cast<double>(pos.targets[i]));
        return t;
    };
    auto preds_at = [&pos, &regressor](const std::vector<std::size_t>& idx, const StartEstimatorConfig& c) {
        std::vector<double> p;
        for (std::size_t i : idx)
            p.push_back(static_cast<double>(estimate_start(pos.features[i], c, regressor ? &*regressor : nullptr)));
        return p;
    };

    std::vector<EstimatorScore> rows;
    std::vector<std::pair<std::string, std::vector<double>>> test_preds;
    for (const auto& [name, method_cfg] : methods) {
        rows.push_back(compare_estimator(name, preds_at(val_idx, method_cfg), truths_at(val_idx),
                                         preds_at(test_idx, method_cfg), truths_at(test_idx)));
        test_preds.emplace_back(name, preds_at(test_idx, method_cfg));
    }
    {
        auto out = csv::open_out(out_path(g, "estimators.csv"));
        write_estimator_csv(out, rows);
    }
    {
        std::vector<std::string> test_ids;
        for (std::size_t i : test_idx) test_ids.push_back(pos.flight_ids[i]);
        auto out = csv::open_out(out_path(g, "start_hist.csv"));
        write_start_histogram_csv(out, test_ids, truths_at(test_idx), test_preds);
    }
    write_text(out_path(g, "learned_mean.txt"), std::to_string(learned_mean) + "\n");
    manifest.outputs = {out_path(g, "estimators.csv"), out_path(g, "start_hist.csv"),
                        out_path(g, "learned_mean.txt")};
    manifest.write(g.out_dir);
    std::cout << "estimator comparison -> " << out_path(g, "estimators.csv") << "\n";
    return 0;
}

int cmd_assess(const GlobalOptions& g, const std::string& tracks_path, const std::string& labels_path,
               const std::string& split_path, const std::string& model_stem, const std::string& loc_model_stem,
               const std::string& partition, const std::vector<std::string>& trace_ids) {
    Config cfg = load_config(g);
    RunManifest manifest = make_manifest("assess", g, cfg, 0);
    LoadedDataset d = load_dataset(g, cfg, tracks_path, labels_path, split_path, TargetKind::classification, manifest);
    manifest.add_input(model_stem + ".manifest");
    manifest.add_input(model_stem + ".bin");

    ModelArtifact artifact = load_artifact(model_stem);
    Network<float> net = artifact.to_network();

    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < d.split.size(); ++i) {
        if (partition == "all" || partition_name(d.split[i]) == partition) idx.push_back(i);
    }
    if (idx.empty()) throw InvalidConfig("assess: empty partition selection '" + partition + "'");

    std::vector<double> scores = predict_scores(net, d.data, idx);

    // thresholds: "selected" means the artifact's stored threshold
    std::vector<double> thresholds;
    {
        std::istringstream list(cfg.get_string("assess.thresholds", "selected,0.9"));
        std::string tok;
        while (std::getline(list, tok, ','))
            thresholds.push_back(tok.find("selected") != std::string::npos ? artifact.threshold : std::stod(tok));
    }

    std::vector<SetAnnotation> train_pos;
    for (std::size_t i = 0; i < d.data.size(); ++i)
        if (d.data.labels[i] == 1 && d.split[i] == Partition::train) train_pos.push_back(d.annotations[i]);

    std::optional<Network<float>> regressor;
    if (!loc_model_stem.empty()) {
        manifest.add_input(loc_model_stem + ".manifest");
        manifest.add_input(loc_model_stem + ".bin");
        regressor = load_artifact(loc_model_stem).to_network();
    }

    std::vector<std::pair<std::string, StartEstimatorConfig>> estimators;
    {
        std::istringstream list(cfg.get_string("assess.estimators", "nominal,train_mean"));
        std::string tok;
        while (std::getline(list, tok, ',')) {
            StartEstimatorConfig c;
            if (tok == "nominal") {
                c.method = StartMethod::nominal;
                c.nominal_offset_s = static_cast<int>(cfg.get_long("loc.nominal_offset_s", 180));
            } else if (tok == "train_mean") {
                c.method = StartMethod::train_mean;
                c.learned_mean_s = fit_mean(train_pos);
            } else if (tok == "regression") {
                if (!regressor) throw InvalidConfig("assess: regression estimator needs --loc-model");
                c.method = StartMethod::regression;
            } else {
                throw InvalidConfig("assess: unknown estimator '" + tok + "'");
            }
            estimators.emplace_back(tok, c);
        }
    }

    FuelFlowEstimator ff_model;
    const std::string model_kind = cfg.get_string("assess.ff_model", "constant");
    if (model_kind == "constant") ff_model = constant_flow_model(cfg.get_double("assess.constant_flow_kgph", 600.0));
    else if (model_kind == "affine")
        ff_model = affine_flow_model(cfg.get_double("assess.affine_idle_kgph", 120.0),
                                     cfg.get_double("assess.affine_gain_kgph_per_kt", 6.0));
    else throw InvalidConfig("assess.ff_model must be constant or affine");

    std::vector<AssessmentInput> inputs;
    for (std::size_t k = 0; k < idx.size(); ++k)
        inputs.push_back({&d.tracks[idx[k]], &d.data.features[idx[k]], scores[k]});

    AssessmentReport report = assess(inputs, ff_model, thresholds, estimators, regressor ? &*regressor : nullptr);
    {
        auto out = csv::open_out(out_path(g, "assess.csv"));
        write_assessment_csv(out, report);
    }
    {
        auto out = csv::open_out(out_path(g, "assess_detail.csv"));
        write_assessment_detail_csv(out, report);
    }
    manifest.outputs = {out_path(g, "assess.csv"), out_path(g, "assess_detail.csv")};

    for (const std::string& id : trace_ids) {
        for (std::size_t k = 0; k < idx.size(); ++k) {
            if (d.tracks[idx[k]].flight_id != id) continue;
            const GroundTrack& tr = d.tracks[idx[k]];
            auto est = ff_model(tr);
            const auto& row = report.rows.size() > 1 ? report.rows[1] : report.rows[0];
            const auto& fa = row.flights[k];
            auto corrected = fa.set_predicted ? apply_set_correction(est, true, fa.start_used) : est;
            const std::string path = out_path(g, "trace_" + id + ".csv");
            auto out = csv::open_out(path);
            write_flow_trace_csv(out, tr, est, corrected);
            manifest.outputs.push_back(path);
        }
    }
    manifest.write(g.out_dir);
    std::cout << "assessment -> " << out_path(g, "assess.csv") << "\n";
    return 0;
}

int dispatch_error(const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (dynamic_cast<const NonFiniteLoss*>(&e)) return 4;
    if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const MissingArtifact*>(&e)) return 5;
    if (dynamic_cast<const InvalidConfig*>(&e) || dynamic_cast<const InvalidArch*>(&e)) return 2;
    if (dynamic_cast<const Error*>(&e)) return 3;
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"single-engine-taxi detection and taxi fuel assessment"};
    app.set_version_flag("--version", std::string("setdetect ") + kVersion);
    app.require_subcommand(1);

    GlobalOptions g;
    app.add_option("--config", g.config_path, "pipeline configuration file");
    app.add_option("--out-dir", g.out_dir, "directory for outputs and the run manifest");
    long seed_opt = 0;
    auto* seed_flag = app.add_option("--seed", seed_opt, "override the configured seed");
    double elevation_opt = 0.0;
    auto* elevation_flag = app.add_option("--field-elevation", elevation_opt,
                                          "field elevation (ft); cuts loaded tracks to the taxi-in phase");
    app.add_option("--threads", g.threads, "worker count for tune rows");

    std::string tracks_path, labels_path, split_path, model_stem, loc_model_stem;
    std::string flight_id, param, partition = "test";
    std::vector<double> values;
    std::vector<std::string> trace_ids;
    bool shifted = false;

    auto* gen = app.add_subcommand("gen", "generate a synthetic taxi-in corpus");
    gen->add_flag("--shifted", shifted, "apply the [shift] section (distribution shift)");

    auto* featurize = app.add_subcommand("featurize", "export feature matrices as CSV");
    featurize->add_option("--tracks", tracks_path, "input tracks CSV")->required();
    featurize->add_option("--flight", flight_id, "restrict to one flight id");

    auto* label = app.add_subcommand("label", "label flights with the fuel-flow oracle");
    label->add_option("--tracks", tracks_path, "input tracks CSV (QAR)")->required();

    auto* split = app.add_subcommand("split", "stratified train/val/test split");
    split->add_option("--tracks", tracks_path, "input tracks CSV")->required();
    split->add_option("--labels", labels_path, "labels CSV")->required();

    auto* train = app.add_subcommand("train", "train the SET classifier");
    train->add_option("--tracks", tracks_path, "input tracks CSV")->required();
    train->add_option("--labels", labels_path, "labels CSV")->required();
    train->add_option("--split", split_path, "split CSV")->required();

    auto* tune = app.add_subcommand("tune", "one-parameter hyperparameter sweep");
    tune->add_option("--tracks", tracks_path, "input tracks CSV")->required();
    tune->add_option("--labels", labels_path, "labels CSV")->required();
    tune->add_option("--split", split_path, "split CSV")->required();
    tune->add_option("--param", param, "sweep parameter name");
    tune->add_option("--values", values, "sweep grid values");

    auto* threshold = app.add_subcommand("threshold", "select the F1-optimal decision threshold");
    threshold->add_option("--tracks", tracks_path, "input tracks CSV")->required();
    threshold->add_option("--labels", labels_path, "labels CSV")->required();
    threshold->add_option("--split", split_path, "split CSV")->required();
    threshold->add_option("--model", model_stem, "model stem (without extension)")->required();

    auto* eval = app.add_subcommand("eval", "confusion metrics at the stored threshold");
    eval->add_option("--tracks", tracks_path, "input tracks CSV")->required();
    eval->add_option("--labels", labels_path, "labels CSV")->required();
    eval->add_option("--split", split_path, "split CSV")->required();
    eval->add_option("--model", model_stem, "model stem")->required();

    auto* loc_train = app.add_subcommand("loc-train", "train the shutdown-second regressor");
    loc_train->add_option("--tracks", tracks_path, "input tracks CSV")->required();
    loc_train->add_option("--labels", labels_path, "labels CSV")->required();
    loc_train->add_option("--split", split_path, "split CSV")->required();

    auto* loc_eval = app.add_subcommand("loc-eval", "compare start estimators on positives");
    loc_eval->add_option("--tracks", tracks_path, "input tracks CSV")->required();
    loc_eval->add_option("--labels", labels_path, "labels CSV")->required();
    loc_eval->add_option("--split", split_path, "split CSV")->required();
    loc_eval->add_option("--loc-model", loc_model_stem, "regressor stem (optional)");

    auto* assess_cmd = app.add_subcommand("assess", "SET-corrected fuel totals report");
    assess_cmd->add_option("--tracks", tracks_path, "input tracks CSV (QAR)")->required();
    assess_cmd->add_option("--labels", labels_path, "labels CSV")->required();
    assess_cmd->add_option("--split", split_path, "split CSV")->required();
    assess_cmd->add_option("--model", model_stem, "classifier stem")->required();
    assess_cmd->add_option("--loc-model", loc_model_stem, "regressor stem (optional)");
    assess_cmd->add_option("--partition", partition, "train|val|test|all (default test)");
    assess_cmd->add_option("--trace", trace_ids, "export per-second flow traces for these flights");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (seed_flag->count() > 0) g.seed = seed_opt;
    if (elevation_flag->count() > 0) g.field_elevation_ft = elevation_opt;

    try {
        if (gen->parsed()) return cmd_gen(g, shifted);
        if (featurize->parsed()) return cmd_featurize(g, tracks_path, flight_id);
        if (label->parsed()) return cmd_label(g, tracks_path);
        if (split->parsed()) return cmd_split(g, tracks_path, labels_path);
        if (train->parsed()) return cmd_train(g, tracks_path, labels_path, split_path);
        if (tune->parsed()) return cmd_tune(g, tracks_path, labels_path, split_path, param, values);
        if (threshold->parsed()) return cmd_threshold(g, tracks_path, labels_path, split_path, model_stem);
        if (eval->parsed()) return cmd_eval(g, tracks_path, labels_path, split_path, model_stem);
        if (loc_train->parsed()) return cmd_loc_train(g, tracks_path, labels_path, split_path);
        if (loc_eval->parsed()) return cmd_loc_eval(g, tracks_path, labels_path, split_path, loc_model_stem);
        if (assess_cmd->parsed())
            return cmd_assess(g, tracks_path, labels_path, split_path, model_stem, loc_model_stem, partition,
                              trace_ids);
    } catch (const std::exception& e) {
        return dispatch_error(e);
    }
    return 2;
}
