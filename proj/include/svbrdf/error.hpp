#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace svbrdf {

enum class ErrorKind {
    invalid_input,
    invalid_stats,
    model_arity,
    degenerate_geometry,
    alignment,
    empty_domain,
    under_observed,
    divergence,
    shape,
    training_instability,
    io,
    config,
};

inline const char* to_string(ErrorKind k) {
    switch (k) {
    case ErrorKind::invalid_input: return "invalid-input";
    case ErrorKind::invalid_stats: return "invalid-stats";
    case ErrorKind::model_arity: return "model-arity";
    case ErrorKind::degenerate_geometry: return "degenerate-geometry";
    case ErrorKind::alignment: return "alignment";
    case ErrorKind::empty_domain: return "empty-domain";
    case ErrorKind::under_observed: return "under-observed";
    case ErrorKind::divergence: return "divergence";
    case ErrorKind::shape: return "shape";
    case ErrorKind::training_instability: return "training-instability";
    case ErrorKind::io: return "io";
    case ErrorKind::config: return "config";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Least-squares system without enough independent observations.
class UnderObservedError : public Error {
public:
    UnderObservedError(std::size_t rank, std::size_t needed, const std::string& what)
        : Error(ErrorKind::under_observed, what), rank_(rank), needed_(needed) {}
    std::size_t rank() const noexcept { return rank_; }
    std::size_t needed() const noexcept { return needed_; }

private:
    std::size_t rank_;
    std::size_t needed_;
};

class DivergenceError : public Error {
public:
    DivergenceError(std::vector<double> trajectory, const std::string& what)
        : Error(ErrorKind::divergence, what), trajectory_(std::move(trajectory)) {}
    const std::vector<double>& trajectory() const noexcept { return trajectory_; }

private:
    std::vector<double> trajectory_;
};

class TrainingInstabilityError : public Error {
public:
    TrainingInstabilityError(std::size_t batch_id, const std::string& what)
        : Error(ErrorKind::training_instability, what), batch_id_(batch_id) {}
    std::size_t batch_id() const noexcept { return batch_id_; }

private:
    std::size_t batch_id_;
};

} // namespace svbrdf
