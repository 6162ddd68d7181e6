#pragma once

#include <stdexcept>
#include <string>

namespace mimic {

// Base class for every error raised by this library.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// corpus
struct UnknownPersona : Error {
    explicit UnknownPersona(const std::string& persona)
        : Error("persona \"" + persona + "\" never speaks in the transcript") {}
};
struct EmptyTranscript : Error {
    EmptyTranscript() : Error("no speaker-labeled lines found in transcript") {}
};
struct InvalidDialog : Error {
    explicit InvalidDialog(const std::string& why) : Error("dialog rejected: " + why) {}
};

// fragmenter
struct EmptyDialog : Error {
    explicit EmptyDialog(const std::string& id)
        : Error("dialog \"" + id + "\" has no sub-dialogs") {}
};

// factqa
struct ExtractionFormatError : Error {
    explicit ExtractionFormatError(const std::string& why)
        : Error("fact extraction response unusable after retries: " + why) {}
};

// llm_gateway
struct GatewayError : Error {
    GatewayError(const std::string& what, std::string digest)
        : Error(what + " [request " + digest + "]"), request_digest(std::move(digest)) {}
    std::string request_digest;
};
struct AuthError : GatewayError {
    using GatewayError::GatewayError;
};
struct RateLimitExhausted : GatewayError {
    using GatewayError::GatewayError;
};
struct TransportError : GatewayError {
    using GatewayError::GatewayError;
};
struct MalformedResponse : GatewayError {
    using GatewayError::GatewayError;
};

// judge
struct InvalidVerdict : Error {
    explicit InvalidVerdict(const std::string& raw)
        : Error("judge reply is not a bare A, B or =: \"" + raw + "\"") {}
};
struct InvalidExtraction : Error {
    explicit InvalidExtraction(const std::string& why)
        : Error("fact-extraction reply rejected: " + why) {}
};

// scoreboard
struct IncompleteJudgements : Error {
    explicit IncompleteJudgements(const std::string& why)
        : Error("judgement set incomplete: " + why) {}
};
struct KeyMismatch : Error {
    explicit KeyMismatch(const std::string& why)
        : Error("noise runs cover different keys: " + why) {}
};
struct MissingPair : Error {
    explicit MissingPair(const std::string& a, const std::string& b)
        : Error("round-robin incomplete: no results for pair " + a + " vs " + b) {}
};

// cli / config
struct ConfigError : Error {
    explicit ConfigError(const std::string& why) : Error("config error: " + why) {}
};

}  // namespace mimic
