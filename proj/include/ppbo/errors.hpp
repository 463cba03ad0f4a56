/*
 * Copyright 2026 The ppbo Authors
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
 *
 */

#pragma once

#include <stdexcept>
#include <string>

namespace ppbo {

/// Input violated an operation's precondition.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Operation called on an object that is not ready for it (e.g. an unfit GP).
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Covariance matrix could not be brought under the condition bound.
class IllConditioned : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A zero-variance sample handed to a distribution test.
class DegenerateDistribution : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Artifact file missing, malformed, or inconsistent with the caller's expectations.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ppbo
