// citare — biblical quotation detection over a reference corpus.
//
// Subcommands: index, detect, eval, sweep, stats. All file outputs are
// written to a temporary file and renamed into place, so a failed run never
// leaves a partial file behind.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "citare/eval.hpp"
#include "citare/pipeline.hpp"

namespace fs = std::filesystem;
using namespace citare;

namespace {

void write_atomic(const std::string& path, const std::string& content) {
    fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw Error("cannot write file: " + tmp.string());
        f.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!f) throw Error("failed writing file: " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) throw Error("cannot move output into place: " + path + ": " + ec.message());
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

struct SharedFlags {
    std::string config_path;
    unsigned jobs = 1;
    std::optional<double> threshold;
    std::optional<uint32_t> ngram;
    std::optional<uint32_t> stride;
};

// Config file first, then command-line flags on top.
RunConfig resolve_config(const SharedFlags& flags) {
    RunConfig cfg = flags.config_path.empty() ? RunConfig::defaults()
                                              : RunConfig::load_file(flags.config_path);
    if (flags.threshold) cfg.inference.score_threshold = *flags.threshold;
    if (flags.ngram) cfg.detection.ngram_size = *flags.ngram;
    if (flags.stride) cfg.detection.stride = *flags.stride;
    cfg.validate();
    return cfg;
}

void add_shared_flags(CLI::App* cmd, SharedFlags& flags) {
    cmd->add_option("--config", flags.config_path, "JSON config file");
    cmd->add_option("--jobs", flags.jobs, "Worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--threshold", flags.threshold, "Override inference.score_threshold");
    cmd->add_option("--ngram", flags.ngram, "Override detection.ngram_size")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--stride", flags.stride, "Override detection.stride")
        ->check(CLI::PositiveNumber);
}

int cmd_index(const std::string& corpus_path, const std::string& out_path,
              const SharedFlags& flags) {
    RunConfig cfg = resolve_config(flags);
    std::vector<Verse> verses = ingest_corpus_file(corpus_path, cfg.normalization, cfg.book_order);
    PositionalIndex index = PositionalIndex::build(std::move(verses), cfg.normalization,
                                                   cfg.book_order);
    write_atomic(out_path, index.serialize());
    std::cout << "indexed " << index.verses().size() << " verses, " << index.total_tokens()
              << " tokens (" << index.distinct_tokens() << " distinct)\n"
              << "fingerprint " << std::hex << index.fingerprint() << std::dec << "\n"
              << "wrote " << out_path << "\n";
    return 0;
}

int cmd_detect(const std::string& index_path, const std::string& target_path,
               const std::string& out_path, std::string doc_id, const SharedFlags& flags) {
    RunConfig cfg = resolve_config(flags);
    PositionalIndex index = PositionalIndex::load(index_path);
    if (doc_id.empty()) doc_id = fs::path(target_path).stem().string();
    RawText target{read_file(target_path), doc_id};
    DetectionOutput out = detect_document(target, index, cfg, flags.jobs);
    auto records = to_records(out.quotations, index, out.target_tokens, doc_id);
    write_atomic(out_path, quotations_to_jsonl(records));
    std::cout << "detected " << records.size() << " quotations in " << doc_id << " ("
              << out.pre_prune.size() << " candidates before pruning)\n"
              << "wrote " << out_path << "\n";
    return 0;
}

void print_report(const EvalReport& rep) {
    std::printf("tp=%zu fp=%zu fn=%zu\n", rep.tp, rep.fp, rep.fn);
    std::printf("precision  %.4f\nrecall     %.4f\nf1         %.4f\n", rep.metrics.precision,
                rep.metrics.recall, rep.metrics.f1);
    if (!rep.per_style.empty()) {
        std::printf("%-10s %6s %6s %6s\n", "style", "tp", "fp", "fn");
        for (const auto& [style, c] : rep.per_style)
            std::printf("%-10s %6zu %6zu %6zu\n", style.c_str(), c.tp, c.fp, c.fn);
    }
    std::printf("style agreement on matches: %.4f\n", rep.style_agreement);
}

nlohmann::json report_to_json(const EvalReport& rep) {
    nlohmann::json per_style = nlohmann::json::object();
    for (const auto& [style, c] : rep.per_style)
        per_style[style] = {{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}};
    return nlohmann::json{{"tp", rep.tp},
                          {"fp", rep.fp},
                          {"fn", rep.fn},
                          {"precision", rep.metrics.precision},
                          {"recall", rep.metrics.recall},
                          {"f1", rep.metrics.f1},
                          {"per_style", per_style},
                          {"style_distribution", rep.style_distribution},
                          {"compound_count", rep.compound_count},
                          {"style_agreement", rep.style_agreement}};
}

int cmd_eval(const std::string& detected_path, const std::string& gt_path,
             const std::string& out_path, std::optional<double> overlap,
             const SharedFlags& flags) {
    RunConfig cfg = resolve_config(flags);
    if (overlap) cfg.match_policy.min_source_overlap = *overlap;
    auto detected = read_quotations_file(detected_path);
    auto gt = read_ground_truth_file(gt_path);
    MultiDocReport rep = evaluate_multi(detected, gt, cfg.match_policy);
    if (rep.per_doc.size() > 1) {
        for (const auto& [doc, doc_rep] : rep.per_doc)
            std::printf("%s: tp=%zu fp=%zu fn=%zu P=%.4f R=%.4f F1=%.4f\n", doc.c_str(),
                        doc_rep.tp, doc_rep.fp, doc_rep.fn, doc_rep.metrics.precision,
                        doc_rep.metrics.recall, doc_rep.metrics.f1);
        std::printf("micro:\n");
    }
    print_report(rep.micro);
    if (rep.per_doc.size() > 1)
        std::printf("macro: P=%.4f R=%.4f F1=%.4f\n", rep.macro.precision, rep.macro.recall,
                    rep.macro.f1);
    if (!out_path.empty()) {
        nlohmann::json j = report_to_json(rep.micro);
        if (rep.per_doc.size() > 1) {
            nlohmann::json per_doc = nlohmann::json::object();
            for (const auto& [doc, doc_rep] : rep.per_doc) per_doc[doc] = report_to_json(doc_rep);
            j["per_doc"] = per_doc;
            j["macro"] = {{"precision", rep.macro.precision},
                          {"recall", rep.macro.recall},
                          {"f1", rep.macro.f1}};
        }
        write_atomic(out_path, j.dump(2) + "\n");
        std::cout << "wrote " << out_path << "\n";
    }
    return 0;
}

int cmd_sweep(const std::string& index_path, const std::string& target_path,
              const std::string& gt_path, const std::string& thresholds_arg,
              const std::string& out_path, std::string doc_id, const SharedFlags& flags) {
    RunConfig cfg = resolve_config(flags);
    std::vector<double> thresholds;
    std::stringstream ss{thresholds_arg};
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            thresholds.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw Error("bad threshold value: \"" + item + "\"");
        }
    }
    if (thresholds.empty()) throw Error("no thresholds given");

    PositionalIndex index = PositionalIndex::load(index_path);
    if (doc_id.empty()) doc_id = fs::path(target_path).stem().string();
    RawText target{read_file(target_path), doc_id};
    DetectionOutput out = detect_document(target, index, cfg, flags.jobs);
    auto pre = to_records(out.pre_prune, index, out.target_tokens, doc_id);
    auto gt = read_ground_truth_file(gt_path);
    auto rows = threshold_sweep(pre, gt, thresholds, cfg.match_policy);

    std::string csv = "threshold,tp,fp,fn,precision,recall,f1\n";
    char buf[160];
    for (const SweepRow& r : rows) {
        std::snprintf(buf, sizeof(buf), "%g,%zu,%zu,%zu,%.6f,%.6f,%.6f\n", r.threshold, r.tp,
                      r.fp, r.fn, r.metrics.precision, r.metrics.recall, r.metrics.f1);
        csv += buf;
    }
    if (out_path.empty()) {
        std::cout << csv;
    } else {
        write_atomic(out_path, csv);
        std::cout << "wrote " << out_path << "\n";
    }
    const SweepRow* best = &rows.front();
    for (const SweepRow& r : rows)
        if (r.metrics.f1 > best->metrics.f1) best = &r;
    std::printf("best threshold %g (P=%.4f R=%.4f F1=%.4f)\n", best->threshold,
                best->metrics.precision, best->metrics.recall, best->metrics.f1);
    return 0;
}

int cmd_stats(const std::string& quotations_path) {
    auto quots = read_quotations_file(quotations_path);
    auto dist = style_distribution(quots);
    std::map<std::string, size_t> counts;
    size_t compound = 0;
    for (const auto& q : quots) {
        counts[q.style == "compound" ? "wave" : q.style]++;
        if (q.style == "compound") ++compound;
    }
    std::printf("%zu quotations\n", quots.size());
    std::printf("%-10s %8s %9s\n", "style", "count", "fraction");
    for (const auto& [style, frac] : dist)
        std::printf("%-10s %8zu %8.1f%%\n", style.c_str(), counts[style], 100.0 * frac);
    if (compound > 0)
        std::printf("(%zu wave-counted quotations are compound groups)\n", compound);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Text-reuse detection: find and classify quotations of a reference corpus"};
    app.require_subcommand(1);

    SharedFlags flags;

    auto* index_cmd = app.add_subcommand("index", "Build a positional index from a corpus");
    std::string corpus_path, index_out;
    index_cmd->add_option("--corpus", corpus_path, "Corpus JSONL file")->required();
    index_cmd->add_option("--out", index_out, "Index output path")->required();
    add_shared_flags(index_cmd, flags);

    auto* detect_cmd = app.add_subcommand("detect", "Detect quotations in a target text");
    std::string index_path, target_path, detect_out, doc_id;
    detect_cmd->add_option("--index", index_path, "Index file")->required();
    detect_cmd->add_option("--target", target_path, "Target text file (plain UTF-8)")->required();
    detect_cmd->add_option("--out", detect_out, "Quotations JSONL output")->required();
    detect_cmd->add_option("--doc", doc_id, "Document id (default: target file stem)");
    add_shared_flags(detect_cmd, flags);

    auto* eval_cmd = app.add_subcommand("eval", "Score detections against ground truth");
    std::string detected_path, gt_path, eval_out;
    std::optional<double> overlap;
    eval_cmd->add_option("--detected", detected_path, "Detected quotations JSONL")->required();
    eval_cmd->add_option("--gt", gt_path, "Ground truth JSONL")->required();
    eval_cmd->add_option("--out", eval_out, "Report JSON output (optional)");
    eval_cmd->add_option("--overlap", overlap, "Override match_policy.min_source_overlap");
    add_shared_flags(eval_cmd, flags);

    auto* sweep_cmd = app.add_subcommand("sweep", "Threshold grid search against ground truth");
    std::string sweep_index, sweep_target, sweep_gt, thresholds_arg, sweep_out, sweep_doc;
    sweep_cmd->add_option("--index", sweep_index, "Index file")->required();
    sweep_cmd->add_option("--target", sweep_target, "Target text file")->required();
    sweep_cmd->add_option("--gt", sweep_gt, "Ground truth JSONL")->required();
    sweep_cmd->add_option("--thresholds", thresholds_arg, "Comma-separated thresholds")
        ->required();
    sweep_cmd->add_option("--out", sweep_out, "CSV output (default: stdout)");
    sweep_cmd->add_option("--doc", sweep_doc, "Document id (default: target file stem)");
    add_shared_flags(sweep_cmd, flags);

    auto* stats_cmd = app.add_subcommand("stats", "Style distribution of a quotations file");
    std::string quotations_path;
    stats_cmd->add_option("quotations", quotations_path, "Quotations JSONL")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(index_cmd)) return cmd_index(corpus_path, index_out, flags);
        if (app.got_subcommand(detect_cmd))
            return cmd_detect(index_path, target_path, detect_out, doc_id, flags);
        if (app.got_subcommand(eval_cmd))
            return cmd_eval(detected_path, gt_path, eval_out, overlap, flags);
        if (app.got_subcommand(sweep_cmd))
            return cmd_sweep(sweep_index, sweep_target, sweep_gt, thresholds_arg, sweep_out,
                             sweep_doc, flags);
        if (app.got_subcommand(stats_cmd)) return cmd_stats(quotations_path);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
