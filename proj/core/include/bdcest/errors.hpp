// Copyright (c) 2026 The bdcest Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace bdcest {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// motor model
class NoConvergence : public Error { public: using Error::Error; };
class InfeasibleTarget : public Error { public: using Error::Error; };

// simulator / dataset
class UnstableStep : public Error { public: using Error::Error; };
class NonFinite : public Error { public: using Error::Error; };
class EmptyDataset : public Error { public: using Error::Error; };

// network
class DimensionMismatch : public Error { public: using Error::Error; };

// optimizer
class CurvatureViolation : public Error { public: using Error::Error; };
class SingularDenominator : public Error { public: using Error::Error; };
class NotPositiveDefinite : public Error { public: using Error::Error; };
class NotDescent : public Error { public: using Error::Error; };
class LineSearchFailed : public Error { public: using Error::Error; };

// estimator / cli
class GridMismatch : public Error { public: using Error::Error; };
class ConfigError : public Error { public: using Error::Error; };
class IoError : public Error { public: using Error::Error; };

/// Error re-thrown by the experiment pipeline with the failing stage attached.
class PipelineError : public Error {
public:
    PipelineError(std::string stage, const std::string& what)
        : Error("[" + stage + "] " + what), stage_(std::move(stage)) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

}  // namespace bdcest
