#include "drl/ffi.h"

#include <algorithm>
#include <exception>
#include <fstream>
#include <sstream>
#include <string>

#include "drl/compiler.hpp"
#include "drl/constraint_lang.hpp"
#include "drl/errors.hpp"
#include "drl/refiner.hpp"
#include "drl/serialize.hpp"

struct drl_layer {
    drl::CompiledLayer layer;
    drl::VariableBinding binding;
};

namespace {

thread_local std::string last_error;

int fail(int code, const std::string& message) {
    last_error = message;
    return code;
}

// Maps the active exception to an exit code and records its message.
int capture() {
    try {
        throw;
    } catch (const drl::UnsatError& e) {
        return fail(2, e.what());
    } catch (const drl::NumericFailure& e) {
        return fail(3, e.what());
    } catch (const std::exception& e) {
        return fail(1, e.what());
    } catch (...) {
        return fail(1, "unknown error");
    }
}

drl::Rational parse_epsilon(const char* text) {
    if (text == nullptr) return drl::NormalizationConfig{}.epsilon;
    const std::string s(text);
    const drl::Rational eps =
        s.find('/') != std::string::npos ? drl::parse_fraction_string(s) : drl::parse_decimal(s);
    if (sgn(eps) <= 0) throw drl::Error("epsilon must be positive");
    return eps;
}

}  // namespace

extern "C" {

drl_layer* drl_load(const char* constraints_text, const char* ordering, const char* epsilon) {
    try {
        if (constraints_text == nullptr) throw drl::Error("constraints text is null");
        drl::VariableBinding binding;
        const auto formulas = drl::parse(constraints_text, binding);
        drl::NormalizationConfig cfg;
        cfg.epsilon = parse_epsilon(epsilon);
        const drl::ConstraintSet pi = drl::normalize(formulas, binding.size(), cfg);
        const std::vector<drl::VarIndex> order = ordering == nullptr
                                                     ? drl::identity_ordering(binding.size())
                                                     : drl::ordering_from_text(ordering, binding);
        drl::CompiledLayer layer = drl::compile(pi, order);
        if (!layer.satisfiable()) {
            std::string witness = "-1 >= 0";
            if (layer.unsat_witness()) witness = drl::to_dsl(*layer.unsat_witness(), binding);
            throw drl::UnsatError("constraints are unsatisfiable; witness: " + witness);
        }
        return new drl_layer{std::move(layer), std::move(binding)};
    } catch (...) {
        capture();
        return nullptr;
    }
}

drl_layer* drl_load_artifact(const char* path) {
    try {
        if (path == nullptr) throw drl::Error("path is null");
        std::ifstream in(path, std::ios::binary);
        if (!in) throw drl::Error(std::string("cannot read '") + path + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        drl::LayerArtifact artifact = drl::load_layer(ss.str());
        if (!artifact.layer.satisfiable()) throw drl::UnsatError("compiled layer is unsatisfiable");
        return new drl_layer{std::move(artifact.layer), std::move(artifact.binding)};
    } catch (...) {
        capture();
        return nullptr;
    }
}

size_t drl_dimension(const drl_layer* layer) { return layer == nullptr ? 0 : layer->layer.dimension(); }

const char* drl_variable_name(const drl_layer* layer, size_t i) {
    if (layer == nullptr || i >= layer->binding.size()) return nullptr;
    return layer->binding.name(i).c_str();
}

int drl_refine_batch(const drl_layer* layer, const double* in, size_t rows, size_t cols, double* out,
                     double* jacobians, double tau) {
    try {
        if (layer == nullptr) return fail(1, "layer is null");
        if (rows > 0 && (in == nullptr || out == nullptr)) return fail(1, "buffer is null");
        if (cols != layer->layer.dimension())
            throw drl::DimensionMismatch("expected " + std::to_string(layer->layer.dimension()) +
                                         " columns, got " + std::to_string(cols));
        drl::RefineOptions options;
        options.tau = tau;
        const drl::Refiner refiner(layer->layer, options);
        const bool with_jacobian = jacobians != nullptr;
        for (size_t r = 0; r < rows; ++r) {
            const std::span<const double> sample(in + r * cols, cols);
            drl::RefineResult result;
            try {
                result = refiner.refine(sample, with_jacobian);
            } catch (const drl::NumericFailure& e) {
                throw drl::NumericFailure("row " + std::to_string(r) + ": " + e.what(), e.position());
            } catch (const drl::InvalidSample& e) {
                throw drl::InvalidSample("row " + std::to_string(r) + ": " + e.what());
            }
            std::copy(result.refined.begin(), result.refined.end(), out + r * cols);
            if (with_jacobian)
                std::copy(result.jacobian.begin(), result.jacobian.end(), jacobians + r * cols * cols);
        }
        return 0;
    } catch (...) {
        return capture();
    }
}

void drl_release(drl_layer* layer) { delete layer; }

const char* drl_last_error(void) { return last_error.c_str(); }

}  // extern "C"
