// Copyright 2026 The Carve Authors
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

#ifndef CARVE_ERROR_HPP_
#define CARVE_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace carve {

// Base for all library errors.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input document (bad syntax, bad token). Carries line/field context
// in the message when available.
class ParseError : public Error {
  public:
    using Error::Error;
};

// Structurally valid document violating the instance schema (missing key,
// wrong length, bad value range).
class SchemaError : public Error {
  public:
    using Error::Error;
};

// Input uses a feature outside the supported subset (e.g. non-EUC_2D TSPLIB).
class UnsupportedFormatError : public Error {
  public:
    using Error::Error;
};

// Index out of range.
class BoundsError : public Error {
  public:
    using Error::Error;
};

// API called with arguments outside its contract (wrong problem type,
// mismatched solution shape).
class UsageError : public Error {
  public:
    using Error::Error;
};

// Invalid run configuration (bad temperature, missing credentials).
class ConfigError : public Error {
  public:
    using Error::Error;
};

// Remote completion failed. `transient` marks failures worth retrying.
class TransportError : public Error {
  public:
    explicit TransportError(const std::string& what, bool transient = false)
        : Error(what), transient_(transient) {}
    bool transient() const { return transient_; }

  private:
    bool transient_;
};

// A strategy cannot handle the requested problem size (exact solver above its
// enumeration threshold). The caller picks another strategy.
class CapabilityError : public Error {
  public:
    using Error::Error;
};

// Compression was asked to build a subproblem with no active elements.
class DegenerateSubproblemError : public Error {
  public:
    using Error::Error;
};

// An instance admits no feasible solution (e.g. a single demand exceeding the
// vehicle capacity).
class InfeasibleInstanceError : public Error {
  public:
    using Error::Error;
};

// Argument outside a function's mathematical domain.
class DomainError : public Error {
  public:
    using Error::Error;
};

}  // namespace carve

#endif  // CARVE_ERROR_HPP_
