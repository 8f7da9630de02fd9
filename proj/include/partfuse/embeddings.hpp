#pragma once

#include "partfuse/common.hpp"
#include "partfuse/csv.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

namespace partfuse {

enum class ChannelMode { rgb, grayscale };

inline std::string_view to_string(ChannelMode m) { return m == ChannelMode::rgb ? "rgb" : "grayscale"; }

inline ChannelMode channel_mode_from_string(std::string_view s) {
    if (s == "rgb") return ChannelMode::rgb;
    if (s == "grayscale") return ChannelMode::grayscale;
    fail(Errc::malformed_file, "unknown channel mode '" + std::string(s) + "'");
}

/// Metadata for one embedding backbone. Grayscale providers receive
/// single-channel crops (the LightCNN family); dim pins the vector length of
/// every record imported under this provider.
struct ProviderSpec {
    std::string provider_id;
    int dim = 0;
    ChannelMode channel_mode = ChannelMode::rgb;
    int input_side = 224;
};

struct EmbeddingRecord {
    std::string subject_id;
    std::string image_id;
    Region region = Region::holistic;
    std::string provider_id;
    std::vector<double> values;
};

/// Cosine similarity of two embeddings of the same region and provider.
inline double cosine_score(const EmbeddingRecord& a, const EmbeddingRecord& b) {
    if (a.region != b.region) {
        fail(Errc::region_mismatch, "cosine across regions " + std::string(to_string(a.region)) + " vs " +
                                        std::string(to_string(b.region)));
    }
    if (a.provider_id != b.provider_id) {
        fail(Errc::provider_mismatch, "cosine across providers " + a.provider_id + " vs " + b.provider_id);
    }
    if (a.values.size() != b.values.size()) {
        fail(Errc::dimension_mismatch, "cosine across dims " + std::to_string(a.values.size()) + " vs " +
                                           std::to_string(b.values.size()));
    }
    double dot = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        dot += a.values[i] * b.values[i];
        na += a.values[i] * a.values[i];
        nb += b.values[i] * b.values[i];
    }
    if (na <= 0 || nb <= 0) fail(Errc::zero_norm, "cosine of a zero-norm embedding");
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

/**
 * In-memory index of embedding records keyed by (image, region, provider).
 * Immutable once populated; lookups are safe from many threads.
 */
class EmbeddingStore {
public:
    std::size_t size() const { return records_.size(); }

    void insert(EmbeddingRecord rec) {
        if (rec.values.empty()) fail(Errc::dimension_mismatch, "empty embedding for " + rec.image_id);
        double norm2 = 0;
        for (double v : rec.values) {
            if (!std::isfinite(v)) {
                fail(Errc::non_finite_component, "non-finite embedding component for image " + rec.image_id);
            }
            norm2 += v * v;
        }
        if (norm2 <= 0) fail(Errc::zero_norm, "zero-norm embedding for image " + rec.image_id);

        auto [sub_it, sub_inserted] = image_subject_.try_emplace(rec.image_id, rec.subject_id);
        if (!sub_inserted && sub_it->second != rec.subject_id) {
            fail(Errc::duplicate_key, "image " + rec.image_id + " claimed by subjects " + sub_it->second +
                                          " and " + rec.subject_id);
        }
        std::string key = make_key(rec.image_id, rec.region, rec.provider_id);
        auto [it, inserted] = index_.try_emplace(std::move(key), records_.size());
        if (!inserted) {
            fail(Errc::duplicate_key, "duplicate embedding for (" + rec.image_id + ", " +
                                          std::string(to_string(rec.region)) + ", " + rec.provider_id + ")");
        }
        records_.push_back(std::move(rec));
    }

    const EmbeddingRecord* find(std::string_view image_id, Region region,
                                std::string_view provider_id) const {
        auto it = index_.find(make_key(image_id, region, provider_id));
        return it == index_.end() ? nullptr : &records_[it->second];
    }

    const EmbeddingRecord& require(std::string_view image_id, Region region,
                                   std::string_view provider_id) const {
        const EmbeddingRecord* rec = find(image_id, region, provider_id);
        if (!rec) {
            fail(Errc::missing_embedding, "no embedding for (" + std::string(image_id) + ", " +
                                              std::string(to_string(region)) + ", " +
                                              std::string(provider_id) + ")");
        }
        return *rec;
    }

    const std::string& subject_of(std::string_view image_id) const {
        auto it = image_subject_.find(std::string(image_id));
        if (it == image_subject_.end()) {
            fail(Errc::missing_embedding, "image " + std::string(image_id) + " has no embeddings");
        }
        return it->second;
    }

    std::vector<std::string> provider_ids() const {
        std::set<std::string> ids;
        for (const auto& r : records_) ids.insert(r.provider_id);
        return {ids.begin(), ids.end()};
    }

    /// Providers holding a record of this region for every listed image.
    std::vector<std::string> providers_covering(Region region,
                                                const std::vector<std::string>& images) const {
        std::vector<std::string> out;
        for (const std::string& p : provider_ids()) {
            bool full = std::all_of(images.begin(), images.end(),
                                    [&](const std::string& img) { return find(img, region, p) != nullptr; });
            if (full) out.push_back(p);
        }
        return out;
    }

    /**
     * Imports the per-provider embedding CSV
     * `subject_id,image_id,region,provider_id,dim,v0,...,v{dim-1}`.
     * Every row must match the spec's provider id and dimension.
     */
    void import_csv(std::string_view text, const ProviderSpec& spec) {
        if (spec.dim <= 0) fail(Errc::dimension_mismatch, "provider dim must be positive");
        parse_rows(text, &spec);
    }

    /// Loads a store file: the same row format, mixed providers/dims allowed.
    void load_csv(std::string_view text) { parse_rows(text, nullptr); }

    /// Canonical persistence form: rows sorted by (provider, region, subject,
    /// image); stable byte-for-byte across runs.
    std::string to_csv() const {
        std::vector<std::size_t> order(records_.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const EmbeddingRecord& ra = records_[a];
            const EmbeddingRecord& rb = records_[b];
            return std::tie(ra.provider_id, ra.region, ra.subject_id, ra.image_id) <
                   std::tie(rb.provider_id, rb.region, rb.subject_id, rb.image_id);
        });

        bool uniform = true;
        for (const auto& r : records_) uniform = uniform && r.values.size() == records_[0].values.size();

        std::string out = "subject_id,image_id,region,provider_id,dim";
        if (!records_.empty() && uniform) {
            for (std::size_t i = 0; i < records_[0].values.size(); ++i) out += ",v" + std::to_string(i);
        }
        out += "\n";
        for (std::size_t idx : order) {
            const EmbeddingRecord& r = records_[idx];
            out += r.subject_id + "," + r.image_id + "," + std::string(to_string(r.region)) + "," +
                   r.provider_id + "," + std::to_string(r.values.size());
            for (double v : r.values) {
                out += ",";
                out += fmt_double(v);
            }
            out += "\n";
        }
        return out;
    }

private:
    static std::string make_key(std::string_view image, Region region, std::string_view provider) {
        std::string key;
        key.reserve(image.size() + provider.size() + 4);
        key.append(image);
        key.push_back('\x1f');
        key.push_back(static_cast<char>('0' + static_cast<int>(region)));
        key.push_back('\x1f');
        key.append(provider);
        return key;
    }

    void parse_rows(std::string_view text, const ProviderSpec* spec) {
        auto lines = split_lines(text);
        if (lines.empty()) fail(Errc::malformed_file, "empty embedding file");
        if (lines[0].rfind("subject_id,image_id,region,provider_id,dim", 0) != 0) {
            fail(Errc::malformed_file, "embedding file missing its header line");
        }
        for (std::size_t li = 1; li < lines.size(); ++li) {
            auto f = split_fields(lines[li]);
            if (f.size() < 6) {
                fail(Errc::malformed_file, "embedding row " + std::to_string(li) + " has too few fields");
            }
            EmbeddingRecord rec;
            rec.subject_id = std::string(trim(f[0]));
            rec.image_id = std::string(trim(f[1]));
            auto region = region_from_string(trim(f[2]));
            if (!region) {
                fail(Errc::malformed_file, "unknown region '" + std::string(f[2]) + "' in embedding row " +
                                               std::to_string(li));
            }
            rec.region = *region;
            rec.provider_id = std::string(trim(f[3]));
            long dim = parse_long(f[4], "embedding dim");
            if (spec) {
                if (rec.provider_id != spec->provider_id) {
                    fail(Errc::provider_mismatch, "row provider '" + rec.provider_id +
                                                      "' does not match import provider '" +
                                                      spec->provider_id + "'");
                }
                if (dim != spec->dim || f.size() - 5 != static_cast<std::size_t>(spec->dim)) {
                    fail(Errc::dimension_mismatch,
                         "row " + std::to_string(li) + " has " + std::to_string(f.size() - 5) +
                             " values, provider dim is " + std::to_string(spec->dim));
                }
            } else if (dim <= 0 || f.size() - 5 != static_cast<std::size_t>(dim)) {
                fail(Errc::dimension_mismatch, "row " + std::to_string(li) + " value count disagrees with dim");
            }
            rec.values.reserve(static_cast<std::size_t>(dim));
            for (std::size_t i = 5; i < f.size(); ++i) {
                rec.values.push_back(parse_double(f[i], "embedding value"));
            }
            insert(std::move(rec));
        }
    }

    std::vector<EmbeddingRecord> records_;
    std::unordered_map<std::string, std::size_t> index_;
    std::unordered_map<std::string, std::string> image_subject_;
};

} // namespace partfuse
