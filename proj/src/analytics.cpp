#include "guardrec/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <fstream>
#include <limits>
#include <map>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "guardrec/text.hpp"

namespace guardrec {

TweetLoadResult load_tweets(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    TweetLoadResult res;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception&) {
            ++res.skipped;
            continue;
        }
        if (!j.contains("id") || !j.contains("kind") || !j.contains("ts")) {
            ++res.skipped;
            continue;
        }
        Tweet t;
        try {
            t.id = j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump();
            std::string kind = j["kind"].get<std::string>();
            if (kind != "D" && kind != "S") {
                ++res.skipped;
                continue;
            }
            t.kind = kind[0];
            t.ts = j["ts"].get<std::int64_t>();
            if (j.contains("parent_ts") && !j["parent_ts"].is_null())
                t.parent_ts = j["parent_ts"].get<std::int64_t>();
            if (j.contains("parent_id") && !j["parent_id"].is_null())
                t.parent_id = j["parent_id"].is_string() ? j["parent_id"].get<std::string>()
                                                         : j["parent_id"].dump();
            if (j.contains("text") && !j["text"].is_null()) t.text = j["text"].get<std::string>();
        } catch (const nlohmann::json::exception&) {
            ++res.skipped;
            continue;
        }
        res.tweets.push_back(std::move(t));
    }
    if (res.skipped > 0)
        log_info("load_tweets: skipped " + std::to_string(res.skipped) + " malformed rows");
    return res;
}

ConversationBuildResult build_conversations(const std::vector<Tweet>& tweets) {
    ConversationBuildResult out;
    std::unordered_map<std::string, std::size_t> by_d_id;
    for (const auto& t : tweets) {
        if (t.kind != 'D') continue;
        if (!t.parent_ts) {
            ++out.d_without_parent;
            continue;
        }
        ConversationRecord rec;
        rec.original_post_time = *t.parent_ts;
        rec.d_tweet_time = t.ts;
        rec.d_tweet_id = t.id;
        by_d_id.emplace(t.id, out.records.size());
        out.records.push_back(std::move(rec));
    }
    for (const auto& t : tweets) {
        if (t.kind != 'S') continue;
        if (!t.parent_id) {
            ++out.orphan_s_tweets;
            continue;
        }
        auto it = by_d_id.find(*t.parent_id);
        if (it == by_d_id.end()) {
            ++out.orphan_s_tweets;
            continue;
        }
        out.records[it->second].s_tweets.emplace_back(t.ts, t.id);
    }
    for (auto& rec : out.records) std::sort(rec.s_tweets.begin(), rec.s_tweets.end());
    return out;
}

double ResponseTimeStats::fraction_within(std::int64_t limit_seconds) const {
    double f = 0.0;
    for (const auto& [bound, frac] : bucket_fractions)
        if (bound <= limit_seconds) f += frac;
    return f;
}

ResponseTimeStats d_response_times(const std::vector<ConversationRecord>& records) {
    if (records.empty()) throw Error("d_response_times: no records");
    ResponseTimeStats stats;
    std::vector<std::int64_t> gaps;
    gaps.reserve(records.size());
    for (const auto& r : records) {
        std::int64_t gap = r.d_tweet_time - r.original_post_time;
        if (gap < 0) {
            ++stats.rejected_negative;
            log_warn("d_response_times: negative gap for D-tweet " + r.d_tweet_id + ", rejected");
            continue;
        }
        gaps.push_back(gap);
    }
    if (gaps.empty()) throw Error("d_response_times: every record had a negative gap");
    std::sort(gaps.begin(), gaps.end());
    stats.n = gaps.size();
    double sum = 0.0;
    for (auto g : gaps) sum += static_cast<double>(g);
    stats.mean_seconds = sum / static_cast<double>(gaps.size());
    stats.median_seconds =
        gaps.size() % 2 == 1
            ? static_cast<double>(gaps[gaps.size() / 2])
            : 0.5 * (static_cast<double>(gaps[gaps.size() / 2 - 1]) +
                     static_cast<double>(gaps[gaps.size() / 2]));

    // one hour / one day / one week / open tail
    const std::int64_t bounds[] = {3600, 86400, 604800, std::numeric_limits<std::int64_t>::max()};
    for (auto b : bounds) stats.bucket_fractions[b] = 0.0;
    for (auto g : gaps) {
        for (auto b : bounds) {
            if (g <= b) {
                stats.bucket_fractions[b] += 1.0;
                break;
            }
        }
    }
    for (auto& [b, f] : stats.bucket_fractions) f /= static_cast<double>(gaps.size());
    return stats;
}

InterPostingResult s_inter_posting_pairs(const std::vector<ConversationRecord>& records) {
    InterPostingResult out;
    double sum = 0.0;
    for (const auto& rec : records) {
        // s_tweets already time-sorted by build_conversations; sort defensively
        auto s = rec.s_tweets;
        std::sort(s.begin(), s.end());
        std::vector<double> deltas;
        for (std::size_t i = 0; i + 1 < s.size(); ++i)
            deltas.push_back(static_cast<double>(s[i + 1].first - s[i].first));
        for (double d : deltas) sum += d;
        out.n_deltas += deltas.size();
        for (std::size_t i = 0; i + 1 < deltas.size(); ++i)
            out.pairs.emplace_back(deltas[i], deltas[i + 1]);
    }
    out.mean_delta_seconds = out.n_deltas > 0 ? sum / static_cast<double>(out.n_deltas) : 0.0;
    return out;
}

namespace {

// UTC calendar month as (year, month).
std::pair<int, int> utc_month(std::int64_t ts) {
    std::time_t t = static_cast<std::time_t>(ts);
    std::tm tm{};
    gmtime_r(&t, &tm);
    return {tm.tm_year + 1900, tm.tm_mon + 1};
}

std::string month_label(int year, int month) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d", year, month);
    return buf;
}

}  // namespace

std::int64_t MonthlyCounts::total() const {
    std::int64_t t = 0;
    for (auto c : d_counts) t += c;
    for (auto c : s_counts) t += c;
    return t;
}

MonthlyCounts monthly_counts(const std::vector<Tweet>& tweets) {
    MonthlyCounts out;
    std::map<std::pair<int, int>, std::pair<std::int64_t, std::int64_t>> buckets;
    for (const auto& t : tweets) {
        auto ym = utc_month(t.ts);
        auto& [d, s] = buckets[ym];
        (t.kind == 'D' ? d : s) += 1;
    }
    if (buckets.empty()) return out;
    auto [first, last] = std::make_pair(buckets.begin()->first, buckets.rbegin()->first);
    for (int y = first.first, m = first.second;
         y < last.first || (y == last.first && m <= last.second);) {
        auto it = buckets.find({y, m});
        out.months.push_back(month_label(y, m));
        out.d_counts.push_back(it != buckets.end() ? it->second.first : 0);
        out.s_counts.push_back(it != buckets.end() ? it->second.second : 0);
        if (++m > 12) {
            m = 1;
            ++y;
        }
    }
    return out;
}

std::vector<std::pair<std::string, double>> top_terms(const std::vector<Document>& docs, int n) {
    if (docs.empty()) throw Error("top_terms: no documents");
    if (n < 1) throw Error("top_terms: n must be >= 1");
    std::map<std::string, double> tf_total;
    std::map<std::string, std::size_t> df;
    for (const auto& d : docs) {
        auto toks = tokenize(d.text);
        std::map<std::string, double> tf;
        for (const auto& t : toks) tf[t] += 1.0;
        for (const auto& [t, c] : tf) {
            tf_total[t] += c;
            ++df[t];
        }
    }
    if (tf_total.empty()) throw Error("top_terms: empty vocabulary after tokenization");
    const double n_docs = static_cast<double>(docs.size());
    std::vector<std::pair<std::string, double>> scored;
    scored.reserve(tf_total.size());
    for (const auto& [t, c] : tf_total)
        scored.emplace_back(t, c * std::log(n_docs / static_cast<double>(df[t])));
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    if (static_cast<int>(scored.size()) > n) scored.resize(static_cast<std::size_t>(n));
    return scored;
}

}  // namespace guardrec
