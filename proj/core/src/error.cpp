#include "mirage/error.hpp"

namespace mirage {

std::string_view errc_name(Errc code) {
    switch (code) {
        case Errc::empty_text: return "EmptyText";
        case Errc::empty_question: return "EmptyQuestion";
        case Errc::empty_input: return "EmptyInput";
        case Errc::auth: return "AuthError";
        case Errc::rate_limited: return "RateLimited";
        case Errc::transient: return "TransientError";
        case Errc::provider: return "ProviderError";
        case Errc::timeout: return "Timeout";
        case Errc::unsupported: return "Unsupported";
        case Errc::malformed_response: return "MalformedResponse";
        case Errc::mutation_failed: return "MutationFailed";
        case Errc::judge_parse: return "JudgeParseError";
        case Errc::label_parse: return "LabelParseError";
        case Errc::unknown_label: return "UnknownLabel";
        case Errc::greedy_not_allowed: return "GreedyNotAllowed";
        case Errc::invalid_threshold: return "InvalidThreshold";
        case Errc::empty_clusters: return "EmptyClusters";
        case Errc::invalid_config: return "InvalidConfig";
        case Errc::file_not_found: return "FileNotFound";
        case Errc::schema: return "SchemaError";
    }
    return "Error";
}

}  // namespace mirage
