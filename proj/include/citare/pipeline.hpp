#pragma once

#include "citare/config.hpp"
#include "citare/records.hpp"

namespace citare {

struct DetectionOutput {
    std::vector<Token> target_tokens;
    std::vector<Quotation> quotations; // final (post-prune), sorted by s_start
    std::vector<Quotation> pre_prune;  // boosted + labeled, before the threshold
};

// Index fingerprint gate: the corpus must have been indexed under the
// byte-identical normalization config that is about to tokenize the target.
inline void check_fingerprint(const PositionalIndex& index, const NormalizationConfig& cfg) {
    if (index.config_hash() != cfg.hash())
        throw Error(
            "index was built with a different normalization config "
            "(index config hash " + std::to_string(index.config_hash()) +
            ", active config hash " + std::to_string(cfg.hash()) +
            "); rebuild the index or fix the config");
}

// End-to-end detection for one document: normalize, detect candidates,
// infer quotations. Deterministic for any job count.
inline DetectionOutput detect_document(const RawText& target, const PositionalIndex& index,
                                       const RunConfig& cfg, unsigned jobs = 1) {
    check_fingerprint(index, cfg.normalization);
    DetectionOutput out;
    out.target_tokens = normalize_document(target, cfg.normalization);
    CandidateSequence candidates = detect_candidates(out.target_tokens, index, cfg.alignment,
                                                     cfg.detection, jobs);
    out.pre_prune = boost_and_label(candidates, index, cfg.inference);
    out.quotations = prune(out.pre_prune, cfg.inference);
    label_compound(out.quotations);
    return out;
}

} // namespace citare
