#pragma once

#include "partfuse/common.hpp"
#include "partfuse/csv.hpp"

#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

namespace partfuse {

namespace detail {

inline std::string shell_quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') {
            out += "'\\''";
        } else {
            out += c;
        }
    }
    out += "'";
    return out;
}

} // namespace detail

/**
 * External-inference provider protocol: the command is invoked as
 * `<cmd> --in <crop file> --region <tag>` and must print the embedding
 * dimension followed by that many values, whitespace-separated, on stdout.
 * A nonzero exit status is a provider failure.
 */
inline std::vector<double> invoke_embedding_provider(const std::string& command,
                                                     const std::filesystem::path& crop_file,
                                                     Region region) {
    std::string cmdline = command + " --in " + detail::shell_quote(crop_file.string()) + " --region " +
                          std::string(to_string(region));
    FILE* pipe = ::popen(cmdline.c_str(), "r");
    if (!pipe) fail(Errc::provider_failure, "cannot launch provider: " + cmdline);

    std::string output;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) output.append(buf, n);
    int status = ::pclose(pipe);
    if (status != 0) {
        fail(Errc::provider_failure,
             "provider exited with status " + std::to_string(status) + ": " + cmdline);
    }

    std::istringstream in(output);
    long dim = 0;
    if (!(in >> dim) || dim <= 0) {
        fail(Errc::provider_failure, "provider did not print a positive dimension: " + cmdline);
    }
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(dim));
    double v;
    while (static_cast<long>(values.size()) < dim && (in >> v)) values.push_back(v);
    if (static_cast<long>(values.size()) != dim) {
        fail(Errc::provider_failure, "provider printed " + std::to_string(values.size()) + " of " +
                                         std::to_string(dim) + " values: " + cmdline);
    }
    return values;
}

/// Crop file naming shared by the crop emitter and the provider importer.
inline std::string crop_file_stem(const std::string& subject_id, const std::string& image_id,
                                  Region region) {
    return subject_id + "__" + image_id + "__" + std::string(to_string(region));
}

struct CropFileName {
    std::string subject_id;
    std::string image_id;
    Region region = Region::holistic;
};

inline CropFileName parse_crop_file_stem(std::string_view stem) {
    std::size_t first = stem.find("__");
    std::size_t second = first == std::string_view::npos ? std::string_view::npos
                                                         : stem.find("__", first + 2);
    if (first == std::string_view::npos || second == std::string_view::npos) {
        fail(Errc::malformed_file, "crop file name must be <subject>__<image>__<region>: " +
                                       std::string(stem));
    }
    CropFileName name;
    name.subject_id = std::string(stem.substr(0, first));
    name.image_id = std::string(stem.substr(first + 2, second - first - 2));
    auto region = region_from_string(stem.substr(second + 2));
    if (!region) fail(Errc::malformed_file, "unknown region in crop file name: " + std::string(stem));
    name.region = *region;
    return name;
}

} // namespace partfuse
