#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mirage::util {

// FNV-1a, 64-bit. Used for request keys and record keys; stable across
// platforms and runs, which golden fixtures rely on. Not cryptographic.
inline std::uint64_t fnv1a(std::string_view data) {
    std::uint64_t hash = 14695981039346656037ULL;
    for (unsigned char byte : data) {
        hash ^= byte;
        hash *= 1099511628211ULL;
    }
    return hash;
}

std::string hex64(std::uint64_t value);

// SplitMix64 step; the mock provider derives deterministic pseudo-embeddings
// and pseudo-logprobs from it.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);
bool file_exists(const std::string& path);

std::vector<std::string> read_lines(const std::string& path);

std::string iso8601_utc_now();

std::string to_lower(std::string_view text);
std::string trim(std::string_view text);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Replace every occurrence of `placeholder` in `text`.
std::string replace_all(std::string text, std::string_view placeholder,
                        std::string_view value);

// First balanced {...} block in raw text, honoring string literals and
// escapes; model replies bury their JSON in prose and code fences.
std::optional<std::string> first_json_object(std::string_view raw);

// Drops trailing commas before } or ] outside string literals; some models
// emit the figure templates' trailing commas literally.
std::string strip_trailing_commas(std::string_view json_text);

}  // namespace mirage::util
