#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "guardrec/dataset.hpp"

namespace guardrec {

struct Tweet {
    std::string id;
    char kind = 'D';  // 'D' direct fact-checking reply, 'S' reshare
    std::int64_t ts = 0;
    std::optional<std::int64_t> parent_ts;  // original post time for D-tweets
    std::optional<std::string> parent_id;   // the D-tweet an S-tweet reshares
    std::string text;
};

struct TweetLoadResult {
    std::vector<Tweet> tweets;
    std::size_t skipped = 0;  // rows with unparseable fields
};

TweetLoadResult load_tweets(const std::string& path);

// One D-tweet with the S-tweets that reshared it.
struct ConversationRecord {
    std::int64_t original_post_time = 0;
    std::int64_t d_tweet_time = 0;
    std::string d_tweet_id;
    std::vector<std::pair<std::int64_t, std::string>> s_tweets;  // (time, id)
};

struct ConversationBuildResult {
    std::vector<ConversationRecord> records;
    std::size_t orphan_s_tweets = 0;    // parent_id matches no D-tweet
    std::size_t d_without_parent = 0;   // D-tweets lacking parent_ts
};

ConversationBuildResult build_conversations(const std::vector<Tweet>& tweets);

struct ResponseTimeStats {
    double mean_seconds = 0.0;
    double median_seconds = 0.0;
    // Disjoint buckets keyed by inclusive upper bound in seconds; INT64_MAX
    // marks the open tail. Fractions sum to 1.
    std::map<std::int64_t, double> bucket_fractions;
    std::size_t n = 0;
    std::size_t rejected_negative = 0;

    // Cumulative share of gaps <= limit (rolling seconds, not calendar days).
    double fraction_within(std::int64_t limit_seconds) const;
};

// Gap between the original post and the fact-checking reply, per record.
ResponseTimeStats d_response_times(const std::vector<ConversationRecord>& records);

struct InterPostingResult {
    std::vector<std::pair<double, double>> pairs;  // consecutive (delta_i, delta_{i+1})
    double mean_delta_seconds = 0.0;
    std::size_t n_deltas = 0;
};

// Within each D-tweet's group, S-tweets sorted by time; deltas between
// consecutive S-tweets, paired consecutively, merged across groups.
InterPostingResult s_inter_posting_pairs(const std::vector<ConversationRecord>& records);

struct MonthlyCounts {
    std::vector<std::string> months;     // "YYYY-MM", contiguous UTC span
    std::vector<std::int64_t> d_counts;  // aligned with months
    std::vector<std::int64_t> s_counts;
    std::size_t skipped = 0;

    std::int64_t total() const;
};

MonthlyCounts monthly_counts(const std::vector<Tweet>& tweets);

// Aggregate tf-idf per term: sum over docs of tf * ln(n_docs/df), ranked
// descending with lexicographic tie-break.
std::vector<std::pair<std::string, double>> top_terms(const std::vector<Document>& docs, int n);

}  // namespace guardrec
