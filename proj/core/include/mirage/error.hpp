#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mirage {

// Every failure the harness can signal deliberately. Codes map 1:1 onto the
// error conditions named in the module contracts; anything else escaping a
// call is a plain std::exception and means a bug.
enum class Errc {
    empty_text,
    empty_question,
    empty_input,
    auth,
    rate_limited,
    transient,  // retryable provider failure (5xx and friends)
    provider,   // non-retryable provider failure
    timeout,
    unsupported,
    malformed_response,
    mutation_failed,
    judge_parse,
    label_parse,
    unknown_label,
    greedy_not_allowed,
    invalid_threshold,
    empty_clusters,
    invalid_config,
    file_not_found,
    schema,
};

std::string_view errc_name(Errc code);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message),
          code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

inline bool is_retryable(Errc code) noexcept {
    return code == Errc::rate_limited || code == Errc::transient ||
           code == Errc::timeout;
}

}  // namespace mirage
