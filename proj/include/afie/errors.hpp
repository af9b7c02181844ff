#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace afie {

// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input document (bad JSON, schema violation).
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t byte_offset)
        : Error(what + " (byte offset " + std::to_string(byte_offset) + ")"),
          byte_offset_(byte_offset) {}

    std::size_t byte_offset() const { return byte_offset_; }

private:
    std::size_t byte_offset_;
};

class EmptyDocumentError : public Error {
public:
    using Error::Error;
};

class RetrievalError : public Error {
public:
    using Error::Error;
};

class EmptyCorpusError : public Error {
public:
    using Error::Error;
};

class IncompleteKeywordError : public Error {
public:
    using Error::Error;
};

// A template referenced a placeholder that was not bound at render time.
class TemplateError : public Error {
public:
    explicit TemplateError(const std::string& placeholder)
        : Error("unbound template placeholder: " + placeholder),
          placeholder_(placeholder) {}

    const std::string& placeholder() const { return placeholder_; }

private:
    std::string placeholder_;
};

// Prompt tokens plus requested output exceed the model window.
class BudgetError : public Error {
public:
    using Error::Error;
};

class MoneyParseError : public Error {
public:
    using Error::Error;
};

// Aggregated failure of a pipeline run, tagged with the failing stage.
class PipelineError : public Error {
public:
    PipelineError(const std::string& stage, const std::string& what)
        : Error("[" + stage + "] " + what), stage_(stage) {}

    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

class DatasetError : public Error {
public:
    DatasetError(const std::string& what, std::size_t line)
        : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class EvalError : public Error {
public:
    using Error::Error;
};

class EmptyEvalError : public Error {
public:
    using Error::Error;
};

class UndefinedRpdError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace afie
