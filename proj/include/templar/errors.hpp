#ifndef TEMPLAR_ERRORS_HPP
#define TEMPLAR_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace templar {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Template syntax / grammar errors.
struct MalformedPlaceholder : Error { using Error::Error; };
struct CardinalGap : Error { using Error::Error; };

// Expansion errors.
struct MissingLexiconEntry : Error { using Error::Error; };
struct InsufficientTerminals : Error { using Error::Error; };

// Corpus / induction errors.
struct EmptyCorpus : Error { using Error::Error; };
struct EmptyCandidateSet : Error { using Error::Error; };

// Metrics errors.
struct EmptyCapability : Error { using Error::Error; };
struct ConstantVector : Error { using Error::Error; };

// Translation provider errors.
struct ProviderUnavailable : Error { using Error::Error; };
struct CacheMiss : Error { using Error::Error; };
struct AuthError : Error { using Error::Error; };

// Configuration and file-format errors surfaced by the CLI.
struct ConfigError : Error { using Error::Error; };

}  // namespace templar

#endif  // TEMPLAR_ERRORS_HPP
