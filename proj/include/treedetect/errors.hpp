/*
 * Copyright 2026 The treedetect Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

     http://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.

*/
#pragma once

#include <stdexcept>
#include <string>

namespace treedetect {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

/// QR found a (numerically) zero diagonal entry. The harness redraws the channel.
class RankDeficient : public Error {
public:
    using Error::Error;
};

class UnsupportedOrder : public Error {
public:
    using Error::Error;
};

class InstanceTooLarge : public Error {
public:
    using Error::Error;
};

/// The bounded candidate list emptied before the requested number of outputs.
class SearchExhausted : public Error {
public:
    using Error::Error;
};

class EmptyInput : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration value (range or consistency).
class RangeError : public Error {
public:
    using Error::Error;
};

/// Malformed configuration text. Carries the 1-based line number (0 when not line-bound).
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& msg)
        : Error(line == 0 ? msg : "line " + std::to_string(line) + ": " + msg), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

} // namespace treedetect
