/*
 * Copyright 2026 The seduq Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef SEDUQ_COMMON_HPP
#define SEDUQ_COMMON_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace seduq {

/// Base class of all library errors. Every failure mode thrown by seduq
/// derives from this, so callers can catch one type at the boundary.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class InvalidInput : public Error {
public:
    using Error::Error;
};

class NotPositiveDefinite : public Error {
public:
    using Error::Error;
};

class InsufficientData : public Error {
public:
    using Error::Error;
};

class SchemaError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::size_t line)
        : Error(msg + " (line " + std::to_string(line) + ")"), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class DegenerateField : public Error {
public:
    using Error::Error;
};

class DegenerateCoordinate : public Error {
public:
    using Error::Error;
};

class InvalidConfig : public Error {
public:
    using Error::Error;
};

class Infeasible : public Error {
public:
    explicit Infeasible(const std::string& msg, int hour = -1)
        : Error(msg), hour_(hour) {}
    /// Hour index (0..23) that failed, or -1 when not hour-specific.
    int hour() const { return hour_; }

private:
    int hour_;
};

class RankDeficientBasis : public Error {
public:
    using Error::Error;
};

class FitFailed : public Error {
public:
    using Error::Error;
};

class FitAborted : public Error {
public:
    using Error::Error;
};

/// Wraps an error raised inside a pipeline stage with the stage label.
class PipelineError : public Error {
public:
    PipelineError(const std::string& stage, const std::string& msg)
        : Error("[" + stage + "] " + msg), stage_(stage) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

} // namespace seduq

#endif // SEDUQ_COMMON_HPP
