// SPDX-License-Identifier: Apache-2.0
//
// hgm-mimo: holonomic-gradient evaluation of MIMO zero-forcing performance
// Copyright (C) 2026 The hgm-mimo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <stdexcept>
#include <string>

namespace hgm_mimo
{
    // Invalid configuration or input data (bad antenna counts, non-Hermitian correlation file, ...)
    class ValidationError : public std::invalid_argument
    {
    public:
        using std::invalid_argument::invalid_argument;
    };

    // Argument outside the mathematical domain of an operation (t <= 0 in a companion matrix, ...)
    class DomainError : public std::domain_error
    {
    public:
        using std::domain_error::domain_error;
    };

    // Numerical failure: integrator step underflow, step budget exhausted, series breakdown
    class NumericalError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };
}
