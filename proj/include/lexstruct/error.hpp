// Copyright 2026 The lexstruct Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef LEXSTRUCT_ERROR_HPP_
#define LEXSTRUCT_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lexstruct {

enum class ErrorCode {
  // docmodel
  MalformedPath,
  MalformedDocName,
  BadDate,
  MalformedRecord,
  EncodingError,
  // numbering
  NotAnInstrumentNumber,
  NotAnArticleLabel,
  UnparsableReference,
  InvertedRange,
  // extractor
  UnknownRank,
  BadArticleHeader,
  // graph
  MissingRequiredProp,
  SchemaViolation,
  UnknownNode,
  NoSuchNode,
  DuplicateNode,
  SinkError,
  // triples
  EmptyExamples,
  ProviderError,
  // rouge_eval
  MismatchedArticleSets,
  // cli / pipeline
  ConfigError,
  IoError,
};

inline std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedPath: return "MalformedPath";
    case ErrorCode::MalformedDocName: return "MalformedDocName";
    case ErrorCode::BadDate: return "BadDate";
    case ErrorCode::MalformedRecord: return "MalformedRecord";
    case ErrorCode::EncodingError: return "EncodingError";
    case ErrorCode::NotAnInstrumentNumber: return "NotAnInstrumentNumber";
    case ErrorCode::NotAnArticleLabel: return "NotAnArticleLabel";
    case ErrorCode::UnparsableReference: return "UnparsableReference";
    case ErrorCode::InvertedRange: return "InvertedRange";
    case ErrorCode::UnknownRank: return "UnknownRank";
    case ErrorCode::BadArticleHeader: return "BadArticleHeader";
    case ErrorCode::MissingRequiredProp: return "MissingRequiredProp";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::NoSuchNode: return "NoSuchNode";
    case ErrorCode::DuplicateNode: return "DuplicateNode";
    case ErrorCode::SinkError: return "SinkError";
    case ErrorCode::EmptyExamples: return "EmptyExamples";
    case ErrorCode::ProviderError: return "ProviderError";
    case ErrorCode::MismatchedArticleSets: return "MismatchedArticleSets";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

// Base of every exception the library throws. what() is prefixed with the
// code name so CLI diagnostics stay greppable.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Reference-grammar failure; [offset, offset + length) is the offending span
// of the input.
class UnparsableReferenceError : public Error {
 public:
  UnparsableReferenceError(const std::string& message, std::size_t offset,
                           std::size_t length)
      : Error(ErrorCode::UnparsableReference, message),
        offset_(offset),
        length_(length) {}

  std::size_t offset() const noexcept { return offset_; }
  std::size_t length() const noexcept { return length_; }

 private:
  std::size_t offset_;
  std::size_t length_;
};

// Element-stream failure carrying the 1-based input line.
class RecordError : public Error {
 public:
  RecordError(ErrorCode code, std::size_t line, const std::string& message)
      : Error(code, "line " + std::to_string(line) + ": " + message), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace lexstruct

#endif  // LEXSTRUCT_ERROR_HPP_
