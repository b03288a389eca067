// End-to-end tests driving the installed CLI binary through a shell.
#include <gtest/gtest.h>

#include "citare/records.hpp"
#include "testutil.hpp"

using namespace citare;
using testutil::CmdResult;
using testutil::run_cmd;
using testutil::slurp;
using testutil::TempDir;

namespace {

const std::string kBin = CITARE_BIN;

std::string q(const std::string& s) { return "'" + s + "'"; }

std::string hebrew_corpus_jsonl() {
    std::string out;
    auto line = [&](const std::string& b, int c, int v, const std::string& t) {
        nlohmann::json j{{"book", b}, {"chapter", c}, {"verse", v}, {"text", t}};
        out += j.dump() + "\n";
    };
    line("Genesis", 1, 1, "בראשית ברא אלהים את השמים ואת הארץ");
    line("Genesis", 1, 2, "והארץ היתה תהו ובהו וחשך על פני תהום");
    line("Genesis", 1, 3, "ויאמר אלהים יהי אור ויהי אור");
    line("Proverbs", 15, 23, "שמחה לאיש במענה פיו ודבר בעתו מה טוב");
    return out;
}

// ---------------------------------------------------------------------

TEST(CliIndex, BuildsAndReportsCounts) {
    TempDir tmp;
    std::string corpus = tmp.file("corpus.jsonl", hebrew_corpus_jsonl());
    std::string out = (tmp.path() / "bible.idx").string();
    CmdResult r = run_cmd(kBin + " index --corpus " + q(corpus) + " --out " + q(out));
    EXPECT_EQ(r.exit_code, 0) << r.output;
    EXPECT_NE(r.output.find("indexed 4 verses"), std::string::npos) << r.output;
    EXPECT_TRUE(std::filesystem::exists(out));

    // re-run: identical file bytes (deterministic serialization)
    std::string bytes1 = slurp(out);
    CmdResult r2 = run_cmd(kBin + " index --corpus " + q(corpus) + " --out " + q(out));
    EXPECT_EQ(r2.exit_code, 0);
    EXPECT_EQ(slurp(out), bytes1);
}

TEST(CliIndex, MissingFileFailsWithPathInMessage) {
    TempDir tmp;
    std::string missing = (tmp.path() / "nope.jsonl").string();
    CmdResult r = run_cmd(kBin + " index --corpus " + q(missing) + " --out " +
                          q((tmp.path() / "x.idx").string()));
    EXPECT_NE(r.exit_code, 0);
    EXPECT_NE(r.output.find("nope.jsonl"), std::string::npos) << r.output;
}

TEST(CliIndex, ParseErrorNamesLine) {
    TempDir tmp;
    std::string corpus = tmp.file("bad.jsonl", hebrew_corpus_jsonl() + "{broken\n");
    CmdResult r = run_cmd(kBin + " index --corpus " + q(corpus) + " --out " +
                          q((tmp.path() / "x.idx").string()));
    EXPECT_NE(r.exit_code, 0);
    EXPECT_NE(r.output.find(":5"), std::string::npos) << r.output;
    EXPECT_FALSE(std::filesystem::exists(tmp.path() / "x.idx")); // no partial output
}

TEST(CliDetect, VerseQuotedVerbatim) {
    TempDir tmp;
    std::string corpus = tmp.file("corpus.jsonl", hebrew_corpus_jsonl());
    std::string idx = (tmp.path() / "bible.idx").string();
    ASSERT_EQ(run_cmd(kBin + " index --corpus " + q(corpus) + " --out " + q(idx)).exit_code, 0);

    std::string target = tmp.file("homily.txt", "שמחה לאיש במענה פיו ודבר בעתו מה טוב");
    std::string out = (tmp.path() / "quots.jsonl").string();
    CmdResult r = run_cmd(kBin + " detect --index " + q(idx) + " --target " + q(target) +
                          " --out " + q(out) + " --threshold 5");
    EXPECT_EQ(r.exit_code, 0) << r.output;
    auto records = read_quotations_file(out);
    ASSERT_EQ(records.size(), 1u);
    EXPECT_EQ(records[0].b_verse, "Proverbs 15:23");
    EXPECT_EQ(records[0].style, "simple");
    EXPECT_EQ(records[0].s_start, 0u);
    EXPECT_EQ(records[0].s_size, 8u);
    EXPECT_EQ(records[0].doc, "homily");
    EXPECT_EQ(records[0].char_start, 0u);
}

TEST(CliDetect, EmptyTargetGivesEmptyOutput) {
    TempDir tmp;
    std::string corpus = tmp.file("corpus.jsonl", hebrew_corpus_jsonl());
    std::string idx = (tmp.path() / "bible.idx").string();
    ASSERT_EQ(run_cmd(kBin + " index --corpus " + q(corpus) + " --out " + q(idx)).exit_code, 0);
    std::string target = tmp.file("empty.txt", "");
    std::string out = (tmp.path() / "quots.jsonl").string();
    CmdResult r = run_cmd(kBin + " detect --index " + q(idx) + " --target " + q(target) +
                          " --out " + q(out));
    EXPECT_EQ(r.exit_code, 0) << r.output;
    EXPECT_EQ(slurp(out), "");
}

TEST(CliDetect, FingerprintMismatchIsHardError) {
    TempDir tmp;
    std::string corpus = tmp.file("corpus.jsonl", hebrew_corpus_jsonl());
    std::string idx = (tmp.path() / "bible.idx").string();
    ASSERT_EQ(run_cmd(kBin + " index --corpus " + q(corpus) + " --out " + q(idx)).exit_code, 0);
    std::string cfg = tmp.file("cfg.json",
                               "{\"normalization\": {\"strip_matres\": false}}");
    std::string target = tmp.file("t.txt", "בראשית ברא");
    CmdResult r = run_cmd(kBin + " detect --index " + q(idx) + " --target " + q(target) +
                          " --out " + q((tmp.path() / "o.jsonl").string()) + " --config " +
                          q(cfg));
    EXPECT_NE(r.exit_code, 0);
    EXPECT_NE(r.output.find("normalization config"), std::string::npos) << r.output;
}

TEST(CliDetect, WaveFragmentsShareGroupId) {
    TempDir tmp;
    const auto& fx = testutil::make_planted_fixture();
    std::string corpus = tmp.file("corpus.jsonl", fx.corpus_jsonl);
    std::string idx = (tmp.path() / "c.idx").string();
    ASSERT_EQ(run_cmd(kBin + " index --corpus " + q(corpus) + " --out " + q(idx)).exit_code, 0);
    std::string target = tmp.file("midrash.txt", fx.target_text);
    std::string out = (tmp.path() / "quots.jsonl").string();
    CmdResult r = run_cmd(kBin + " detect --index " + q(idx) + " --target " + q(target) +
                          " --out " + q(out) + " --doc midrash");
    ASSERT_EQ(r.exit_code, 0) << r.output;
    auto records = read_quotations_file(out);
    ASSERT_EQ(records.size(), 20u);
    std::map<std::string, std::set<uint32_t>> groups_by_style;
    for (const auto& rec : records)
        if (rec.group_id && rec.style == "compound")
            groups_by_style["compound"].insert(*rec.group_id);
    EXPECT_EQ(groups_by_style["compound"].size(), 1u); // 4 fragments, one group
}

TEST(CliEval, IdenticalFilesScorePerfect) {
    TempDir tmp;
    const auto& fx = testutil::make_planted_fixture();
    std::string corpus = tmp.file("corpus.jsonl", fx.corpus_jsonl);
    std::string idx = (tmp.path() / "c.idx").string();
    ASSERT_EQ(run_cmd(kBin + " index --corpus " + q(corpus) + " --out " + q(idx)).exit_code, 0);
    std::string target = tmp.file("midrash.txt", fx.target_text);
    std::string detected = (tmp.path() / "quots.jsonl").string();
    ASSERT_EQ(run_cmd(kBin + " detect --index " + q(idx) + " --target " + q(target) +
                      " --out " + q(detected) + " --doc midrash")
                  .exit_code,
              0);
    std::string gtfile = tmp.file("gt.jsonl", fx.gt_jsonl());
    std::string report = (tmp.path() / "report.json").string();
    CmdResult r = run_cmd(kBin + " eval --detected " + q(detected) + " --gt " + q(gtfile) +
                          " --out " + q(report));
    EXPECT_EQ(r.exit_code, 0) << r.output;
    EXPECT_NE(r.output.find("f1         1.0000"), std::string::npos) << r.output;
    nlohmann::json j = nlohmann::json::parse(slurp(report));
    EXPECT_DOUBLE_EQ(j["f1"].get<double>(), 1.0);
    EXPECT_EQ(j["tp"].get<int>(), 20);
}

TEST(CliEval, DisjointFilesScoreZero) {
    TempDir tmp;
    QuotationRecord a;
    a.doc = "d";
    a.s_start = 0;
    a.s_size = 3;
    a.b_verse = "Genesis 1:1";
    a.b_start = 0;
    a.b_size = 3;
    std::string detected = tmp.file("d.jsonl", quotations_to_jsonl({&a, 1}));
    GroundTruthEntry g;
    g.doc = "d";
    g.s_start = 50;
    g.s_size = 3;
    g.b_verse = "Exodus 2:2";
    g.b_start = 0;
    g.b_size = 3;
    nlohmann::json gj{{"doc", g.doc},       {"s_start", g.s_start}, {"s_size", g.s_size},
                      {"b_verse", g.b_verse}, {"b_start", g.b_start}, {"b_size", g.b_size},
                      {"style", g.style}};
    std::string gtfile = tmp.file("g.jsonl", gj.dump() + "\n");
    CmdResult r = run_cmd(kBin + " eval --detected " + q(detected) + " --gt " + q(gtfile));
    EXPECT_EQ(r.exit_code, 0) << r.output;
    EXPECT_NE(r.output.find("f1         0.0000"), std::string::npos) << r.output;
}

TEST(CliSweep, SingleAndDescendingThresholds) {
    TempDir tmp;
    const auto& fx = testutil::make_planted_fixture();
    std::string corpus = tmp.file("corpus.jsonl", fx.corpus_jsonl);
    std::string idx = (tmp.path() / "c.idx").string();
    ASSERT_EQ(run_cmd(kBin + " index --corpus " + q(corpus) + " --out " + q(idx)).exit_code, 0);
    std::string target = tmp.file("midrash.txt", fx.target_text);
    std::string gtfile = tmp.file("gt.jsonl", fx.gt_jsonl());

    CmdResult one = run_cmd(kBin + " sweep --index " + q(idx) + " --target " + q(target) +
                            " --gt " + q(gtfile) + " --thresholds 21 --doc midrash");
    EXPECT_EQ(one.exit_code, 0) << one.output;
    EXPECT_NE(one.output.find("best threshold 21"), std::string::npos) << one.output;

    std::string csv = (tmp.path() / "curve.csv").string();
    CmdResult r = run_cmd(kBin + " sweep --index " + q(idx) + " --target " + q(target) +
                          " --gt " + q(gtfile) + " --thresholds 40,30,20,10,0 --out " + q(csv) +
                          " --doc midrash");
    EXPECT_EQ(r.exit_code, 0) << r.output;
    std::string content = slurp(csv);
    std::istringstream lines(content);
    std::string line;
    std::getline(lines, line);
    EXPECT_EQ(line, "threshold,tp,fp,fn,precision,recall,f1");
    double prev = -1.0, prev_recall = 2.0;
    while (std::getline(lines, line)) {
        double t, p, rec, f1;
        size_t tp, fp, fn;
        ASSERT_EQ(std::sscanf(line.c_str(), "%lf,%zu,%zu,%zu,%lf,%lf,%lf", &t, &tp, &fp, &fn,
                              &p, &rec, &f1),
                  7)
            << line;
        EXPECT_GT(t, prev); // ascending even though input was descending
        EXPECT_LE(rec, prev_recall);
        prev = t;
        prev_recall = rec;
    }
    EXPECT_DOUBLE_EQ(prev, 40.0);
}

TEST(CliStats, DistributionTable) {
    TempDir tmp;
    const auto& fx = testutil::make_planted_fixture();
    std::string corpus = tmp.file("corpus.jsonl", fx.corpus_jsonl);
    std::string idx = (tmp.path() / "c.idx").string();
    ASSERT_EQ(run_cmd(kBin + " index --corpus " + q(corpus) + " --out " + q(idx)).exit_code, 0);
    std::string target = tmp.file("midrash.txt", fx.target_text);
    std::string detected = (tmp.path() / "q.jsonl").string();
    ASSERT_EQ(run_cmd(kBin + " detect --index " + q(idx) + " --target " + q(target) +
                      " --out " + q(detected) + " --doc midrash")
                  .exit_code,
              0);
    CmdResult r = run_cmd(kBin + " stats " + q(detected));
    EXPECT_EQ(r.exit_code, 0) << r.output;
    EXPECT_NE(r.output.find("20 quotations"), std::string::npos) << r.output;
    EXPECT_NE(r.output.find("simple"), std::string::npos);
    EXPECT_NE(r.output.find("60.0%"), std::string::npos) << r.output;
    EXPECT_NE(r.output.find("wave"), std::string::npos);
}

TEST(CliFlags, ThresholdOverridesConfig) {
    TempDir tmp;
    std::string corpus = tmp.file("corpus.jsonl", hebrew_corpus_jsonl());
    std::string idx = (tmp.path() / "bible.idx").string();
    ASSERT_EQ(run_cmd(kBin + " index --corpus " + q(corpus) + " --out " + q(idx)).exit_code, 0);
    std::string cfg = tmp.file("cfg.json", "{\"inference\": {\"score_threshold\": 1000}}");
    std::string target = tmp.file("t.txt", "שמחה לאיש במענה פיו ודבר בעתו מה טוב");
    std::string out = (tmp.path() / "o.jsonl").string();
    // config alone: threshold 1000 kills everything
    ASSERT_EQ(run_cmd(kBin + " detect --index " + q(idx) + " --target " + q(target) +
                      " --out " + q(out) + " --config " + q(cfg))
                  .exit_code,
              0);
    EXPECT_EQ(read_quotations_file(out).size(), 0u);
    // flag wins over config
    ASSERT_EQ(run_cmd(kBin + " detect --index " + q(idx) + " --target " + q(target) +
                      " --out " + q(out) + " --config " + q(cfg) + " --threshold 5")
                  .exit_code,
              0);
    EXPECT_EQ(read_quotations_file(out).size(), 1u);
}

TEST(CliDetect, JobsProduceByteIdenticalOutput) {
    TempDir tmp;
    const auto& fx = testutil::make_planted_fixture();
    std::string corpus = tmp.file("corpus.jsonl", fx.corpus_jsonl);
    std::string idx = (tmp.path() / "c.idx").string();
    ASSERT_EQ(run_cmd(kBin + " index --corpus " + q(corpus) + " --out " + q(idx)).exit_code, 0);
    std::string target = tmp.file("midrash.txt", fx.target_text);
    std::string out1 = (tmp.path() / "j1.jsonl").string();
    std::string out8 = (tmp.path() / "j8.jsonl").string();
    ASSERT_EQ(run_cmd(kBin + " detect --index " + q(idx) + " --target " + q(target) +
                      " --out " + q(out1) + " --doc midrash --jobs 1")
                  .exit_code,
              0);
    ASSERT_EQ(run_cmd(kBin + " detect --index " + q(idx) + " --target " + q(target) +
                      " --out " + q(out8) + " --doc midrash --jobs 8")
                  .exit_code,
              0);
    EXPECT_EQ(slurp(out1), slurp(out8));
    EXPECT_FALSE(slurp(out1).empty());
}

} // namespace
