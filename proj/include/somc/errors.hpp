/*
 * Copyright (C) 2026 The somc authors
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

#ifndef SOMC__ERRORS_HPP
#define SOMC__ERRORS_HPP

#include <stdexcept>
#include <string>

namespace somc {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// An argument is outside the domain of the operation (negative time,
/// trade-off weight outside [0.1, 0.9], empty episode, ...).
class DomainError : public Error
{
public:
  using Error::Error;
};

class DuplicateIdError : public Error
{
public:
  using Error::Error;
};

class NotFoundError : public Error
{
public:
  using Error::Error;
};

/// The registry cannot be turned into a service graph.
class ConstructionError : public Error
{
public:
  using Error::Error;
};

/// No feasible Start->End composition exists.
class InfeasibleError : public Error
{
public:
  InfeasibleError(const std::string& what, int layer)
  : Error(what), _layer(layer)
  {
  }

  /// First layer no feasible prefix could reach.
  int layer() const { return _layer; }

private:
  int _layer;
};

class NumericalError : public Error
{
public:
  using Error::Error;
};

/// Exhaustive enumeration was asked to do more work than its guard allows.
class RefusalError : public Error
{
public:
  using Error::Error;
};

/// A scenario file violates its schema.
class ValidationError : public Error
{
public:
  using Error::Error;
};

} // namespace somc

#endif // SOMC__ERRORS_HPP
