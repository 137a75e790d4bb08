#pragma once

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ubayes/consistency.hpp"
#include "ubayes/io.hpp"
#include "ubayes/ortho_poly.hpp"
#include "ubayes/risk.hpp"

namespace ubayes::cli {

enum class Format { json, csv, text };

namespace detail {

inline Format parse_format(const std::string& name) {
    if (name == "json") return Format::json;
    if (name == "csv") return Format::csv;
    if (name == "text") return Format::text;
    throw BadSpec("unknown format '" + name + "' (expected json, csv, or text)");
}

inline std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string::size_type begin = 0;
    while (true) {
        const auto end = text.find(sep, begin);
        parts.push_back(text.substr(begin, end - begin));
        if (end == std::string::npos) break;
        begin = end + 1;
    }
    return parts;
}

inline Vector parse_number_list(const std::string& text, const char* what) {
    const auto parts = split(text, ',');
    Vector v(static_cast<Index>(parts.size()));
    for (std::size_t i = 0; i < parts.size(); ++i) {
        try {
            std::size_t used = 0;
            v[static_cast<Index>(i)] = std::stod(parts[i], &used);
            if (used != parts[i].size()) throw std::invalid_argument(parts[i]);
        } catch (const std::exception&) {
            throw BadSpec(std::string(what) + ": bad number '" + parts[i] + "'");
        }
    }
    return v;
}

// Streams %.17g doubles straight into JSON text, so json/csv output is
// round-trippable by construction.
struct JsonWriter {
    std::ostream& out;
    bool first = true;

    explicit JsonWriter(std::ostream& o) : out(o) { out << '{'; }
    void close() { out << "}\n"; }

    void key(const std::string& name) {
        if (!first) out << ',';
        first = false;
        out << '"' << name << "\":";
    }
    void field(const std::string& name, double value) {
        key(name);
        out << io::format_double(value);
    }
    void field(const std::string& name, int value) {
        key(name);
        out << value;
    }
    void field(const std::string& name, const std::string& value) {
        key(name);
        out << '"' << value << '"';
    }
    void field(const std::string& name, bool value) {
        key(name);
        out << (value ? "true" : "false");
    }
    void field(const std::string& name, const Vector& v) {
        key(name);
        array(v);
    }
    void field(const std::string& name, const Matrix& m, bool by_column = false) {
        key(name);
        out << '[';
        const Index outer = by_column ? m.cols() : m.rows();
        for (Index i = 0; i < outer; ++i) {
            if (i) out << ',';
            array(by_column ? Vector(m.col(i)) : Vector(m.row(i).transpose()));
        }
        out << ']';
    }

private:
    void array(const Vector& v) {
        out << '[';
        for (Index i = 0; i < v.size(); ++i) {
            if (i) out << ',';
            out << io::format_double(v[i]);
        }
        out << ']';
    }
};

inline void text_vector(std::ostream& out, const std::vector<std::string>& labels, const Vector& v) {
    for (Index i = 0; i < v.size(); ++i)
        out << labels[static_cast<std::size_t>(i)] << "  " << io::format_double(v[i]) << '\n';
}

inline std::vector<std::string> node_labels(const ModelSpace& model) {
    std::vector<std::string> labels;
    labels.reserve(static_cast<std::size_t>(model.param_count()));
    for (Index i = 0; i < model.param_count(); ++i)
        labels.push_back(io::format_double(model.grid().nodes()[i]));
    return labels;
}

inline double standard_normal(Xoshiro256& rng) {
    const double u1 = rng.uniform();
    const double u2 = rng.uniform();
    return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace detail

/// Load a model from `builtin:<name>[:<n>]` or a JSON file path.
inline ModelSpace load_model(const std::string& spec, int grid_size) {
    if (spec.rfind("builtin:", 0) == 0) {
        const auto parts = detail::split(spec.substr(8), ':');
        BuiltinSpec builtin;
        builtin.name = parts[0];
        if (parts.size() > 1) {
            try {
                builtin.n = std::stoi(parts[1]);
            } catch (const std::exception&) {
                throw BadSpec("bad builtin parameter '" + parts[1] + "'");
            }
        }
        if (parts.size() > 2) throw BadSpec("too many ':' fields in '" + spec + "'");
        return builtin_model(builtin, grid_size);
    }
    return io::read_model(spec, grid_size);
}

/**
 * Parameter-function spec: `file:<path>` (JSON array or CSV column, length
 * K), `poly:c0,c1,...` (coefficients, low degree first, evaluated at the
 * grid nodes), or `expr:<name>` from the whitelist {exp, one_minus_theta_sq,
 * theta}.
 */
inline ParamFunction parse_gamma_spec(const std::string& spec, const ModelSpace& model) {
    if (spec.rfind("file:", 0) == 0) {
        Vector v = io::read_vector(spec.substr(5));
        if (v.size() != model.param_count())
            throw LengthMismatch("gamma file has length " + std::to_string(v.size()) +
                                 ", expected " + std::to_string(model.param_count()));
        return ParamFunction(std::move(v));
    }
    if (spec.rfind("poly:", 0) == 0) {
        const Vector coeffs = detail::parse_number_list(spec.substr(5), "poly gamma");
        return polynomial_on_grid(coeffs, model.grid());
    }
    if (spec.rfind("expr:", 0) == 0) {
        const std::string name = spec.substr(5);
        Vector v(model.param_count());
        for (Index i = 0; i < model.param_count(); ++i) {
            const double theta = model.grid().nodes()[i];
            if (name == "exp")
                v[i] = std::exp(theta);
            else if (name == "one_minus_theta_sq")
                v[i] = 1.0 - theta * theta;
            else if (name == "theta")
                v[i] = theta;
            else
                throw BadSpec("unknown expression '" + name + "' (expected exp, one_minus_theta_sq, or theta)");
        }
        return ParamFunction(std::move(v));
    }
    throw BadSpec("gamma spec must start with file:, poly:, or expr:");
}

/// Estimator spec: `file:<path>` or `values:v1,v2,...` (length N).
inline SampleFunction parse_delta_spec(const std::string& spec, const ModelSpace& model) {
    Vector v;
    if (spec.rfind("file:", 0) == 0)
        v = io::read_vector(spec.substr(5));
    else if (spec.rfind("values:", 0) == 0)
        v = detail::parse_number_list(spec.substr(7), "delta values");
    else
        throw BadSpec("delta spec must start with file: or values:");
    if (v.size() != model.sample_count())
        throw LengthMismatch("delta has length " + std::to_string(v.size()) + ", expected " +
                             std::to_string(model.sample_count()));
    return SampleFunction(std::move(v));
}

namespace detail {

struct SubOpts {
    std::string model_spec;
    int grid_size = 64;
    std::string out_path;
    std::string format;
    std::string gamma_spec;
    std::string delta_spec;
    std::string which;       // subspace selector
    std::string project;     // subspace membership probe
    std::string prior_spec;  // orthopoly prior override
    std::string n_list = "4,16,64";
    double tol = -1.0;  // negative = use the operation default
    int trials = 100;
    int degree = -1;
    int fit_degree = -1;
    int nmax = 50;
    long reps = 100000;
    int threads = 1;
    std::uint64_t seed = 42;
    bool exact = false;
    bool mc = false;
    bool full = false;
};

inline void emit_vector(std::ostream& out, Format format, const Vector& v,
                        const std::vector<std::string>& labels) {
    switch (format) {
        case Format::json: {
            JsonWriter w(out);
            w.field("values", v);
            w.close();
            break;
        }
        case Format::csv:
            io::write_vector_csv(out, v);
            break;
        case Format::text:
            text_vector(out, labels, v);
            break;
    }
}

inline Vector reweighted_prior(const ModelSpace& model, const std::string& prior_spec) {
    if (prior_spec == "uniform") {
        // Reset to the discretized uniform prior: equal density, so the
        // existing quadrature structure is kept only through the node count.
        return Vector::Constant(model.param_count(), 1.0 / double(model.param_count()));
    }
    if (prior_spec.rfind("file:", 0) == 0) {
        Vector w = io::read_vector(prior_spec.substr(5));
        if (w.size() != model.param_count())
            throw LengthMismatch("prior file has length " + std::to_string(w.size()) +
                                 ", expected " + std::to_string(model.param_count()));
        return w;
    }
    if (prior_spec.rfind("poly:", 0) == 0) {
        // Density reweighting: multiply the current node masses by the
        // polynomial evaluated at the nodes and renormalize.
        const Vector coeffs = parse_number_list(prior_spec.substr(5), "prior poly");
        Vector w(model.param_count());
        for (Index i = 0; i < model.param_count(); ++i)
            w[i] = model.grid().weights()[i] *
                   evaluate_polynomial(coeffs, model.grid().nodes()[i]);
        const double total = w.sum();
        if (!(total > 0.0)) throw ZeroPriorWeight("prior poly: density must be positive on the grid");
        return w / total;
    }
    throw BadSpec("prior spec must be uniform, file:, or poly:");
}

inline ModelSpace with_prior(const ModelSpace& model, const Vector& weights) {
    return build_model(ParameterGrid(model.grid().nodes(), weights), model.samples(),
                       model.likelihood());
}

struct CsvTable {
    std::ostream& out;
    void header(const std::vector<std::string>& names) {
        for (std::size_t i = 0; i < names.size(); ++i) out << (i ? "," : "") << names[i];
        out << '\n';
    }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
        out << '\n';
    }
};

inline void emit_consistency(std::ostream& out, Format format,
                             const std::vector<ConsistencyRow>& rows, bool with_se) {
    std::vector<std::string> names = {"n", "risk_Un", "risk_bayes", "cross_norm", "tau_over_n"};
    if (with_se) {
        names.insert(names.end(), {"se_risk_Un", "se_risk_bayes", "se_cross_norm"});
    }
    if (format == Format::json) {
        out << '[';
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (i) out << ',';
            const auto& r = rows[i];
            JsonWriter w(out);
            w.field("n", r.n);
            w.field("risk_Un", r.risk_Un);
            w.field("risk_bayes", r.risk_bayes);
            w.field("cross_norm", r.cross_norm);
            w.field("tau_over_n", r.tau_over_n);
            if (with_se) {
                w.field("se_risk_Un", r.se_risk_Un);
                w.field("se_risk_bayes", r.se_risk_bayes);
                w.field("se_cross_norm", r.se_cross_norm);
            }
            out << '}';
        }
        out << "]\n";
        return;
    }
    // csv and text share the tabular layout; text pads columns.
    if (format == Format::csv) {
        CsvTable table{out};
        table.header(names);
        for (const auto& r : rows) {
            std::vector<std::string> cells = {std::to_string(r.n), io::format_double(r.risk_Un),
                                              io::format_double(r.risk_bayes),
                                              io::format_double(r.cross_norm),
                                              io::format_double(r.tau_over_n)};
            if (with_se) {
                cells.push_back(io::format_double(r.se_risk_Un));
                cells.push_back(io::format_double(r.se_risk_bayes));
                cells.push_back(io::format_double(r.se_cross_norm));
            }
            table.row(cells);
        }
        return;
    }
    out << std::left << std::setw(6) << "n";
    for (std::size_t i = 1; i < names.size(); ++i) out << std::setw(16) << names[i];
    out << '\n';
    for (const auto& r : rows) {
        out << std::left << std::setw(6) << r.n << std::setprecision(9) << std::setw(16)
            << r.risk_Un << std::setw(16) << r.risk_bayes << std::setw(16) << r.cross_norm
            << std::setw(16) << r.tau_over_n;
        if (with_se)
            out << std::setw(16) << r.se_risk_Un << std::setw(16) << r.se_risk_bayes
                << std::setw(16) << r.se_cross_norm;
        out << '\n';
    }
}

}  // namespace detail

/**
 * Dispatch a parsed command line.  Results go to `out` (or the --out file),
 * diagnostics to `err`.  Returns 0 on success, 1 on a domain error (the
 * structured error name is printed), 2 on a usage error.
 */
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"weighted-space toolkit for unbiased and Bayes estimation"};
    app.require_subcommand(1);

    detail::SubOpts opt;

    auto add_common = [&](CLI::App* sub, const std::string& default_format) {
        sub->add_option("--model", opt.model_spec, "builtin:<name>[:<n>] or a JSON model file")
            ->default_val("builtin:bernoulli");
        sub->add_option("--grid-size", opt.grid_size, "grid size for builtin models");
        sub->add_option("--out", opt.out_path, "write output to this file instead of stdout");
        // opt.format is shared across subcommands, so a setup-time default_val
        // would be clobbered by later add_common calls; resolve per parse.
        CLI::Option* fmt = sub->add_option("--format", opt.format, "json | csv | text")
                               ->check(CLI::IsMember({"json", "csv", "text"}));
        sub->callback([&opt, fmt, default_format] {
            if (fmt->count() == 0) opt.format = default_format;
        });
        sub->add_option("--tol", opt.tol, "override the operation tolerance");
        sub->add_option("--seed", opt.seed, "random seed where the operation draws");
    };

    CLI::App* apply_u = app.add_subcommand("apply-u", "expectation function of an estimator");
    add_common(apply_u, "text");
    apply_u->add_option("--delta", opt.delta_spec, "file:<path> or values:v1,v2,...")->required();

    CLI::App* apply_b = app.add_subcommand("apply-b", "posterior mean of a parameter function");
    add_common(apply_b, "text");
    apply_b->add_option("--gamma", opt.gamma_spec, "file:<path>, poly:c0,c1,..., or expr:<name>")
        ->required();

    CLI::App* adjoint = app.add_subcommand("adjoint-check",
                                           "verify the adjoint identity on random pairs");
    add_common(adjoint, "text");
    adjoint->add_option("--trials", opt.trials, "number of random pairs");

    CLI::App* subspace = app.add_subcommand("subspace", "orthonormal basis of a range or null space");
    add_common(subspace, "text");
    subspace->add_option("which", opt.which, "range-u | null-u | range-b | null-b")
        ->required()
        ->check(CLI::IsMember({"range-u", "null-u", "range-b", "null-b"}));
    subspace->add_option("--project", opt.project,
                         "report the projection residual of this vector (same spec as --gamma/--delta)");

    CLI::App* decompose = app.add_subcommand("decompose", "orthogonal range + null split");
    add_common(decompose, "text");
    decompose->add_option("--side", opt.which, "param | sample")
        ->default_val("param")
        ->check(CLI::IsMember({"param", "sample"}));
    decompose->add_option("--gamma", opt.gamma_spec, "parameter function (param side)");
    decompose->add_option("--delta", opt.delta_spec, "estimator (sample side)");
    CLI::Option* fit_opt =
        decompose->add_option("--fit-degree", opt.fit_degree,
                              "polynomial fit degree for both parts (param side; negative "
                              "disables, default is one less than the outcome count)");

    CLI::App* unbiased = app.add_subcommand("unbiased-solve",
                                            "minimum-norm unbiased estimator of a target");
    add_common(unbiased, "text");
    unbiased->add_option("--gamma", opt.gamma_spec, "target parameter function")->required();

    CLI::App* risk_cmd = app.add_subcommand("risk", "Bayes risk report");
    add_common(risk_cmd, "text");
    risk_cmd->add_option("--gamma", opt.gamma_spec, "target parameter function")->required();
    risk_cmd->add_option("--delta", opt.delta_spec, "estimator; defaults to the Bayes rule");

    CLI::App* orthopoly = app.add_subcommand("orthopoly", "prior-orthonormal polynomial coefficients");
    add_common(orthopoly, "text");
    orthopoly->add_option("--degree", opt.degree, "maximum degree")->required();
    orthopoly->add_option("--prior", opt.prior_spec,
                          "override the prior: uniform, file:<path>, or poly:c0,c1,...");

    CLI::App* expand = app.add_subcommand("bayes-expand",
                                          "posterior mean via the polynomial expansion vs directly");
    add_common(expand, "text");
    expand->add_option("--gamma", opt.gamma_spec, "target parameter function")->required();

    CLI::App* consistency = app.add_subcommand("consistency",
                                               "risks of the averaged unbiased vs Bayes estimator");
    add_common(consistency, "csv");
    consistency->add_flag("--exact", opt.exact, "exact table for n = 1..nmax");
    consistency->add_flag("--mc", opt.mc, "Monte Carlo estimates");
    consistency->add_option("--nmax", opt.nmax, "largest sample size (exact mode)");
    consistency->add_option("--n", opt.n_list, "comma-separated sample sizes (MC mode)");
    consistency->add_option("--reps", opt.reps, "Monte Carlo replications");
    consistency->add_option("--threads", opt.threads, "worker threads (MC mode)");
    consistency->add_option("--gamma", opt.gamma_spec, "target; defaults to expr:theta");

    CLI::App* model_info = app.add_subcommand("model-info", "grid, marginal, and matrices of a model");
    add_common(model_info, "text");
    model_info->add_flag("--full", opt.full, "include likelihood and posterior matrices");

    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("ubayes");
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help() << '\n';
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        return 2;
    }

    std::ofstream out_file;
    std::ostream* sink = &out;
    try {
        const Format format = detail::parse_format(opt.format);
        if (!opt.out_path.empty()) {
            out_file.open(opt.out_path);
            if (!out_file) throw BadSpec("cannot open output file '" + opt.out_path + "'");
            sink = &out_file;
        }

        if (apply_u->parsed()) {
            const ModelSpace model = load_model(opt.model_spec, opt.grid_size);
            const ParamFunction result = apply_U(parse_delta_spec(opt.delta_spec, model), model);
            detail::emit_vector(*sink, format, result.values, detail::node_labels(model));
            return 0;
        }

        if (apply_b->parsed()) {
            const ModelSpace model = load_model(opt.model_spec, opt.grid_size);
            const SampleFunction result = apply_B(parse_gamma_spec(opt.gamma_spec, model), model);
            detail::emit_vector(*sink, format, result.values, model.samples().labels());
            return 0;
        }

        if (adjoint->parsed()) {
            const ModelSpace model = load_model(opt.model_spec, opt.grid_size);
            const double bound = opt.tol > 0.0 ? opt.tol : 1e-12;
            double max_scaled = 0.0;
            for (int trial = 0; trial < opt.trials; ++trial) {
                Xoshiro256 rng(substream_seed(opt.seed, 0, static_cast<std::uint64_t>(trial)));
                Vector g(model.param_count()), d(model.sample_count());
                for (Index i = 0; i < g.size(); ++i) g[i] = detail::standard_normal(rng);
                for (Index j = 0; j < d.size(); ++j) d[j] = detail::standard_normal(rng);
                const ParamFunction gamma(std::move(g));
                const SampleFunction delta(std::move(d));
                const double lhs = inner_pi(gamma, apply_U(delta, model), model);
                const double resid = adjointness_residual(gamma, delta, model);
                max_scaled = std::max(max_scaled, resid / (1.0 + std::abs(lhs)));
            }
            const bool pass = max_scaled <= bound;
            if (format == Format::json) {
                detail::JsonWriter w(*sink);
                w.field("trials", opt.trials);
                w.field("max_scaled_residual", max_scaled);
                w.field("bound", bound);
                w.field("pass", pass);
                w.close();
            } else {
                *sink << "max residual " << (pass ? "<= " : "> ") << io::format_double(bound)
                      << " over " << opt.trials << " trials (worst "
                      << io::format_double(max_scaled) << ")\n";
            }
            if (!pass) {
                err << "error: AdjointnessViolation: scaled residual "
                    << io::format_double(max_scaled) << " exceeds " << io::format_double(bound)
                    << '\n';
                return 1;
            }
            return 0;
        }

        if (subspace->parsed()) {
            const ModelSpace model = load_model(opt.model_spec, opt.grid_size);
            const double tol = opt.tol > 0.0 ? opt.tol : ubayes::detail::kDefaultRankTol;
            SubspaceBasis basis;
            if (opt.which == "range-u")
                basis = range_basis_U(model, tol);
            else if (opt.which == "null-u")
                basis = null_basis_U(model, tol);
            else if (opt.which == "range-b")
                basis = range_basis_B(model, tol);
            else if (opt.which == "null-b")
                basis = null_basis_B(model, tol);
            else
                throw BadSpec("subspace selector must be range-u, null-u, range-b, or null-b");

            std::optional<double> residual;
            if (!opt.project.empty()) {
                const Vector probe = basis.side == Side::param_space
                                         ? parse_gamma_spec(opt.project, model).values
                                         : parse_delta_spec(opt.project, model).values;
                residual = projection_residual(basis, probe, model);
            }

            if (format == Format::json) {
                detail::JsonWriter w(*sink);
                w.field("side", std::string(basis.side == Side::param_space ? "param" : "sample"));
                w.field("rank", basis.rank);
                w.field("tol", basis.tol_used);
                w.field("gram_residual", gram_residual(basis, model));
                if (residual) w.field("projection_residual", *residual);
                w.field("vectors", basis.vectors, /*by_column=*/true);
                w.close();
            } else if (format == Format::csv) {
                detail::CsvTable table{*sink};
                std::vector<std::string> names;
                for (int k = 0; k < basis.rank; ++k) names.push_back("v" + std::to_string(k));
                table.header(names);
                for (Index i = 0; i < basis.dimension(); ++i) {
                    std::vector<std::string> cells;
                    for (int k = 0; k < basis.rank; ++k)
                        cells.push_back(io::format_double(basis.vectors(i, k)));
                    table.row(cells);
                }
            } else {
                *sink << "side: " << (basis.side == Side::param_space ? "param" : "sample")
                      << "\nrank: " << basis.rank << "\ntol: " << io::format_double(basis.tol_used)
                      << '\n';
                if (residual) *sink << "projection_residual: " << io::format_double(*residual) << '\n';
                for (int k = 0; k < basis.rank; ++k) {
                    *sink << "v" << k << ':';
                    for (Index i = 0; i < basis.dimension(); ++i)
                        *sink << ' ' << io::format_double(basis.vectors(i, k));
                    *sink << '\n';
                }
            }
            return 0;
        }

        if (decompose->parsed()) {
            const ModelSpace model = load_model(opt.model_spec, opt.grid_size);
            const double tol = opt.tol > 0.0 ? opt.tol : ubayes::detail::kDefaultRankTol;
            if (opt.which == "param") {
                if (opt.gamma_spec.empty()) throw BadSpec("decompose --side param needs --gamma");
                const ParamFunction gamma = parse_gamma_spec(opt.gamma_spec, model);
                const ParamDecomp result = decompose_param(gamma, model, tol);
                const int fit_degree = fit_opt->count()
                                           ? opt.fit_degree
                                           : static_cast<int>(model.sample_count()) - 1;
                std::optional<Vector> range_fit, null_fit;
                if (fit_degree >= 0 && fit_degree < model.param_count()) {
                    range_fit = polynomial_fit(result.part_in_range, model, fit_degree);
                    null_fit = polynomial_fit(result.part_in_null, model, fit_degree);
                }
                if (format == Format::json) {
                    detail::JsonWriter w(*sink);
                    w.field("side", std::string("param"));
                    w.field("pythagoras_residual", result.pythagoras_residual);
                    w.field("part_in_range", result.part_in_range.values);
                    w.field("part_in_null", result.part_in_null.values);
                    if (range_fit) {
                        w.field("range_fit", *range_fit);
                        w.field("null_fit", *null_fit);
                    }
                    w.close();
                } else if (format == Format::csv) {
                    detail::CsvTable table{*sink};
                    table.header({"theta", "part_in_range", "part_in_null"});
                    for (Index i = 0; i < model.param_count(); ++i)
                        table.row({io::format_double(model.grid().nodes()[i]),
                                   io::format_double(result.part_in_range[i]),
                                   io::format_double(result.part_in_null[i])});
                } else {
                    *sink << "pythagoras_residual: "
                          << io::format_double(result.pythagoras_residual) << '\n';
                    if (range_fit) {
                        *sink << "range_fit:";
                        for (Index i = 0; i < range_fit->size(); ++i)
                            *sink << ' ' << io::format_double((*range_fit)[i]);
                        *sink << "\nnull_fit:";
                        for (Index i = 0; i < null_fit->size(); ++i)
                            *sink << ' ' << io::format_double((*null_fit)[i]);
                        *sink << '\n';
                    }
                    detail::text_vector(*sink, detail::node_labels(model),
                                        result.part_in_range.values);
                }
                return 0;
            }
            if (opt.which == "sample") {
                if (opt.delta_spec.empty()) throw BadSpec("decompose --side sample needs --delta");
                const SampleFunction delta = parse_delta_spec(opt.delta_spec, model);
                const SampleDecomp result = decompose_sample(delta, model, tol);
                if (format == Format::json) {
                    detail::JsonWriter w(*sink);
                    w.field("side", std::string("sample"));
                    w.field("pythagoras_residual", result.pythagoras_residual);
                    w.field("part_in_range", result.part_in_range.values);
                    w.field("part_in_null", result.part_in_null.values);
                    w.close();
                } else if (format == Format::csv) {
                    detail::CsvTable table{*sink};
                    table.header({"label", "part_in_range", "part_in_null"});
                    for (Index j = 0; j < model.sample_count(); ++j)
                        table.row({model.samples().labels()[static_cast<std::size_t>(j)],
                                   io::format_double(result.part_in_range[j]),
                                   io::format_double(result.part_in_null[j])});
                } else {
                    *sink << "pythagoras_residual: "
                          << io::format_double(result.pythagoras_residual) << '\n';
                    detail::text_vector(*sink, model.samples().labels(),
                                        result.part_in_range.values);
                }
                return 0;
            }
            throw BadSpec("decompose --side must be param or sample");
        }

        if (unbiased->parsed()) {
            const ModelSpace model = load_model(opt.model_spec, opt.grid_size);
            const double tol = opt.tol > 0.0 ? opt.tol : 1e-8;
            const ParamFunction gamma = parse_gamma_spec(opt.gamma_spec, model);
            const SampleFunction solution = solve_unbiased(gamma, model, tol);
            const ParamFunction reached = apply_U(solution, model);
            const double gnorm = norm_pi(gamma, model);
            const double rel_resid =
                norm_pi(ParamFunction(gamma.values - reached.values), model) /
                (gnorm > 0.0 ? gnorm : 1.0);
            if (format == Format::json) {
                detail::JsonWriter w(*sink);
                w.field("values", solution.values);
                w.field("relative_residual", rel_resid);
                w.close();
            } else if (format == Format::csv) {
                io::write_vector_csv(*sink, solution.values);
            } else {
                *sink << "relative_residual: " << io::format_double(rel_resid) << '\n';
                detail::text_vector(*sink, model.samples().labels(), solution.values);
            }
            return 0;
        }

        if (risk_cmd->parsed()) {
            const ModelSpace model = load_model(opt.model_spec, opt.grid_size);
            const ParamFunction gamma = parse_gamma_spec(opt.gamma_spec, model);
            if (!opt.delta_spec.empty()) {
                const SampleFunction delta = parse_delta_spec(opt.delta_spec, model);
                const double risk = bayes_risk(delta, gamma, model);
                const ParamFunction bias(gamma.values - apply_U(delta, model).values);
                const double bias_inner = inner_pi(bias, gamma, model);
                if (format == Format::json) {
                    detail::JsonWriter w(*sink);
                    w.field("direct_risk", risk);
                    w.field("bias_inner_gamma", bias_inner);
                    w.field("bias_fn", bias.values);
                    w.close();
                } else {
                    *sink << "direct_risk: " << io::format_double(risk) << '\n'
                          << "bias_inner_gamma: " << io::format_double(bias_inner) << '\n';
                }
                return 0;
            }
            const RiskReport report = projection_risk_split(gamma, model);
            if (format == Format::json) {
                detail::JsonWriter w(*sink);
                w.field("direct_risk", report.direct_risk);
                w.field("bias_identity_risk", report.bias_identity_risk);
                w.field("projection_risk", report.projection_risk);
                w.field("excess_over_projection", report.excess_over_projection);
                w.field("bias_fn", report.bias_fn.values);
                w.close();
            } else {
                *sink << "direct_risk: " << io::format_double(report.direct_risk) << '\n'
                      << "bias_identity_risk: " << io::format_double(report.bias_identity_risk)
                      << '\n'
                      << "projection_risk: " << io::format_double(report.projection_risk) << '\n'
                      << "excess_over_projection: "
                      << io::format_double(report.excess_over_projection) << '\n';
            }
            return 0;
        }

        if (orthopoly->parsed()) {
            ModelSpace model = load_model(opt.model_spec, opt.grid_size);
            if (!opt.prior_spec.empty())
                model = detail::with_prior(model, detail::reweighted_prior(model, opt.prior_spec));
            const OrthoBasis basis = build_ortho_basis(model, opt.degree);
            if (format == Format::json) {
                detail::JsonWriter w(*sink);
                w.field("degree", basis.degree_max);
                w.field("gram_residual", basis.gram_residual);
                w.field("coefficients", basis.coeff_matrix);
                w.close();
            } else if (format == Format::csv) {
                detail::CsvTable table{*sink};
                std::vector<std::string> names;
                for (int k = 0; k <= basis.degree_max; ++k)
                    names.push_back("theta^" + std::to_string(k));
                table.header(names);
                for (int k = 0; k <= basis.degree_max; ++k) {
                    std::vector<std::string> cells;
                    for (int j = 0; j <= basis.degree_max; ++j)
                        cells.push_back(io::format_double(basis.coeff_matrix(k, j)));
                    table.row(cells);
                }
            } else {
                *sink << "gram_residual: " << io::format_double(basis.gram_residual) << '\n';
                for (int k = 0; k <= basis.degree_max; ++k) {
                    *sink << "degree " << k << ':';
                    for (int j = 0; j <= k; ++j)
                        *sink << ' ' << io::format_double(basis.coeff_matrix(k, j));
                    *sink << '\n';
                }
            }
            return 0;
        }

        if (expand->parsed()) {
            const ModelSpace model = load_model(opt.model_spec, opt.grid_size);
            const int degree = static_cast<int>(model.sample_count()) - 1;
            const OrthoBasis basis = build_ortho_basis(model, degree);
            const ParamFunction gamma = parse_gamma_spec(opt.gamma_spec, model);
            const SampleFunction via_expansion = bayes_expansion(gamma, model, basis);
            const SampleFunction direct = apply_B(gamma, model);
            const double max_diff =
                (via_expansion.values - direct.values).cwiseAbs().maxCoeff();
            if (format == Format::json) {
                detail::JsonWriter w(*sink);
                w.field("expansion", via_expansion.values);
                w.field("direct", direct.values);
                w.field("max_abs_diff", max_diff);
                w.close();
            } else {
                *sink << "max_abs_diff: " << io::format_double(max_diff) << '\n';
                detail::text_vector(*sink, model.samples().labels(), via_expansion.values);
            }
            return 0;
        }

        if (consistency->parsed()) {
            if (opt.exact == opt.mc)
                throw BadSpec("consistency: pass exactly one of --exact or --mc");
            const ModelSpace base = load_model(opt.model_spec, opt.grid_size);
            const ParameterGrid& grid = base.grid();
            const ParamFunction gamma = opt.gamma_spec.empty()
                                            ? ParamFunction(grid.nodes())
                                            : parse_gamma_spec(opt.gamma_spec, base);
            std::vector<ConsistencyRow> rows;
            if (opt.exact) {
                rows = exact_consistency_table(grid, gamma, opt.nmax);
            } else {
                const Vector ns = detail::parse_number_list(opt.n_list, "--n");
                std::vector<int> n_list;
                for (Index i = 0; i < ns.size(); ++i) n_list.push_back(static_cast<int>(ns[i]));
                rows = monte_carlo_consistency(grid, gamma, n_list, opt.reps, opt.seed,
                                               opt.threads);
            }
            detail::emit_consistency(*sink, format, rows, opt.mc);
            return 0;
        }

        if (model_info->parsed()) {
            const ModelSpace model = load_model(opt.model_spec, opt.grid_size);
            if (format == Format::json) {
                detail::JsonWriter w(*sink);
                w.field("param_count", static_cast<int>(model.param_count()));
                w.field("sample_count", static_cast<int>(model.sample_count()));
                w.field("theta_nodes", model.grid().nodes());
                w.field("prior_weights", model.grid().weights());
                w.key("sample_labels");
                *sink << '[';
                for (std::size_t i = 0; i < model.samples().labels().size(); ++i)
                    *sink << (i ? "," : "") << '"' << model.samples().labels()[i] << '"';
                *sink << ']';
                w.field("marginal", model.marginal());
                if (opt.full) {
                    w.field("likelihood", model.likelihood());
                    w.field("posterior", model.posterior());
                }
                w.close();
            } else if (format == Format::csv) {
                detail::CsvTable table{*sink};
                table.header({"label", "marginal"});
                for (Index j = 0; j < model.sample_count(); ++j)
                    table.row({model.samples().labels()[static_cast<std::size_t>(j)],
                               io::format_double(model.marginal()[j])});
            } else {
                *sink << "param_count: " << model.param_count() << '\n'
                      << "sample_count: " << model.sample_count() << '\n'
                      << "marginal:";
                for (Index j = 0; j < model.sample_count(); ++j)
                    *sink << ' ' << io::format_double(model.marginal()[j]);
                *sink << '\n';
            }
            return 0;
        }

        throw BadSpec("no subcommand handled");  // unreachable with require_subcommand(1)
    } catch (const Error& e) {
        err << "error: " << e.name() << ": " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: Internal: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace ubayes::cli
