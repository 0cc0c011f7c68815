#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cosym/expression.hpp"
#include "cosym/pipeline.hpp"

namespace cosym {

namespace detail {

struct FileEntry {
    int line = 0;
    std::string key;
    std::string value;
};

struct ScenarioFile {
    std::string path;
    std::map<std::string, std::vector<FileEntry>> sections;
    std::vector<std::string> section_order;

    bool has(const std::string& section) const { return sections.count(section) != 0; }

    const std::vector<FileEntry>& at(const std::string& section) const {
        auto it = sections.find(section);
        if (it == sections.end())
            throw ParseError(path + ": missing required section [" + section + "]");
        return it->second;
    }

    const FileEntry* find(const std::string& section, const std::string& key) const {
        auto it = sections.find(section);
        if (it == sections.end()) return nullptr;
        for (const auto& e : it->second)
            if (e.key == key) return &e;
        return nullptr;
    }

    std::string require(const std::string& section, const std::string& key) const {
        const FileEntry* e = find(section, key);
        if (!e)
            throw ParseError(path + ": section [" + section + "] is missing key '" + key + "'");
        return e->value;
    }
};

inline ScenarioFile read_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open scenario file '" + path + "'");
    ScenarioFile file;
    file.path = path;
    std::string line, section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            if (b == std::string::npos) return std::string();
            const auto e = s.find_last_not_of(" \t\r");
            return s.substr(b, e - b + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                std::ostringstream os;
                os << path << ":" << line_no << ": unterminated section header";
                throw ParseError(os.str());
            }
            section = trim(line.substr(1, line.size() - 2));
            file.sections[section];
            file.section_order.push_back(section);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            std::ostringstream os;
            os << path << ":" << line_no << ": expected 'key = value'";
            throw ParseError(os.str());
        }
        FileEntry entry;
        entry.line = line_no;
        entry.key = trim(line.substr(0, eq));
        entry.value = trim(line.substr(eq + 1));
        if (entry.key.empty()) {
            std::ostringstream os;
            os << path << ":" << line_no << ": empty key";
            throw ParseError(os.str());
        }
        file.sections[section].push_back(std::move(entry));
    }
    return file;
}

inline std::vector<std::string> split_words(const std::string& s) {
    std::istringstream is(s);
    std::vector<std::string> out;
    std::string w;
    while (is >> w) out.push_back(w);
    return out;
}

inline std::vector<double> parse_numbers(const std::string& s, const std::string& where) {
    std::vector<double> out;
    for (const auto& w : split_words(s)) {
        try {
            size_t used = 0;
            out.push_back(std::stod(w, &used));
            if (used != w.size()) throw std::invalid_argument(w);
        } catch (const std::exception&) {
            throw ParseError(where + ": '" + w + "' is not a number");
        }
    }
    return out;
}

} // namespace detail

/// Build a Scenario from the declarative text format. Field expressions use
/// the arithmetic grammar of expression.hpp; coordinates not mentioned in
/// [action] or [reeb_flow] are left fixed.
inline Scenario parse_scenario_file(const std::string& path) {
    using detail::split_words;
    const detail::ScenarioFile file = detail::read_scenario_file(path);

    Scenario sc;
    if (const auto* e = file.find("", "name")) sc.name = e->value;
    else sc.name = path;

    std::map<std::string, double> constants;
    if (file.has("constants"))
        for (const auto& e : file.at("constants")) {
            auto expr = parse_expression(e.value, {}, constants);
            constants[e.key] = expr->eval<double>(std::span<const double>{});
        }

    const std::vector<std::string> coords = split_words(file.require("chart", "coords"));
    if (coords.empty()) throw ParseError(file.path + ": [chart] coords is empty");
    const int dim = static_cast<int>(coords.size());

    // Guard from the excluded-set section, if present.
    std::function<bool(std::span<const double>)> guard;
    if (file.has("excluded")) {
        auto dist = parse_expression(file.require("excluded", "distance"), coords, constants);
        const double margin =
            detail::parse_numbers(file.require("excluded", "margin"), file.path + ": [excluded]")
                .at(0);
        guard = [dist, margin](std::span<const double> x) {
            return dist->eval<double>(x) > margin;
        };
    }
    sc.chart = CoordinateChart(coords, guard);

    // omega: entries "ci cj = expr" give the coefficient of dci ^ dcj.
    {
        struct Entry {
            int i, j;
            Expr::Ptr expr;
        };
        std::vector<Entry> entries;
        for (const auto& e : file.at("omega")) {
            const auto names = split_words(e.key);
            if (names.size() != 2) {
                std::ostringstream os;
                os << file.path << ":" << e.line << ": [omega] keys are coordinate pairs";
                throw ParseError(os.str());
            }
            entries.push_back({sc.chart.index(names[0]), sc.chart.index(names[1]),
                               parse_expression(e.value, coords, constants)});
        }
        sc.structure.chart = sc.chart;
        sc.structure.omega = TwoFormField::from_closure(sc.chart, [entries, dim](auto x) {
            using S = typename decltype(x)::value_type;
            Mat<S> m(dim, dim);
            for (const auto& en : entries) {
                S v = en.expr->template eval<S>(std::span<const S>(x));
                m(en.i, en.j) += v;
                m(en.j, en.i) -= v;
            }
            return m;
        });
    }

    // eta: entries "ci = expr".
    {
        struct Entry {
            int i;
            Expr::Ptr expr;
        };
        std::vector<Entry> entries;
        for (const auto& e : file.at("eta"))
            entries.push_back({sc.chart.index(e.key), parse_expression(e.value, coords, constants)});
        sc.structure.eta = OneFormField::from_closure(sc.chart, [entries, dim](auto x) {
            using S = typename decltype(x)::value_type;
            std::vector<S> v(static_cast<size_t>(dim), S(0.0));
            for (const auto& en : entries)
                v[static_cast<size_t>(en.i)] += en.expr->template eval<S>(std::span<const S>(x));
            return v;
        });
    }

    {
        const std::string htext = file.require("hamiltonian", "H");
        auto hexpr = parse_expression(htext, coords, constants);
        sc.hamiltonian = ScalarField::from_closure(
            sc.chart,
            [hexpr](auto x) {
                using S = typename decltype(x)::value_type;
                return hexpr->template eval<S>(std::span<const S>(x));
            },
            htext);
    }

    // Action: variables are the coordinates followed by s1..sk.
    {
        const detail::FileEntry* kentry = file.find("action", "k");
        if (!kentry) throw ParseError(file.path + ": [action] needs k");
        const int k = static_cast<int>(
            detail::parse_numbers(kentry->value, file.path + ": [action] k").at(0));
        if (k < 1) throw ParseError(file.path + ": [action] k must be positive");
        std::vector<std::string> vars = coords;
        for (int a = 1; a <= k; ++a) vars.push_back("s" + std::to_string(a));

        std::vector<Expr::Ptr> images(static_cast<size_t>(dim));
        for (int i = 0; i < dim; ++i)
            images[static_cast<size_t>(i)] = parse_expression(coords[static_cast<size_t>(i)], vars);
        for (const auto& e : file.at("action")) {
            if (e.key == "k") continue;
            images[static_cast<size_t>(sc.chart.index(e.key))] =
                parse_expression(e.value, vars, constants);
        }

        auto act = [images, dim](auto s, auto x) {
            using S = typename decltype(x)::value_type;
            std::vector<S> env(x.begin(), x.end());
            env.insert(env.end(), s.begin(), s.end());
            std::vector<S> out(static_cast<size_t>(dim));
            for (int i = 0; i < dim; ++i)
                out[static_cast<size_t>(i)] =
                    images[static_cast<size_t>(i)]->template eval<S>(std::span<const S>(env));
            return out;
        };

        // Fundamental fields by dual differentiation of s -> act(s e_a, x).
        std::vector<VectorField> fundamental;
        for (int gen = 0; gen < k; ++gen) {
            fundamental.push_back(VectorField::derived(sc.chart, [images, dim, k, gen](auto x) {
                using S = typename decltype(x)::value_type;
                std::vector<Dual<S>> env;
                env.reserve(static_cast<size_t>(dim + k));
                for (const auto& c : x) env.push_back(Dual<S>(c, S(0.0)));
                for (int a = 0; a < k; ++a)
                    env.push_back(Dual<S>(S(0.0), a == gen ? S(1.0) : S(0.0)));
                std::vector<S> out(static_cast<size_t>(dim));
                for (int i = 0; i < dim; ++i)
                    out[static_cast<size_t>(i)] =
                        images[static_cast<size_t>(i)]
                            ->template eval<Dual<S>>(std::span<const Dual<S>>(env))
                            .d;
                return out;
            }));
        }
        sc.action = AbelianAction::from_closure(k, sc.chart, std::move(act), std::move(fundamental));

        // Momentum components J1..Jk.
        for (int a = 1; a <= k; ++a) {
            const std::string key = "J" + std::to_string(a);
            const std::string text = file.require("momentum", key);
            auto expr = parse_expression(text, coords, constants);
            sc.momentum.components.push_back(ScalarField::from_closure(
                sc.chart,
                [expr](auto x) {
                    using S = typename decltype(x)::value_type;
                    return expr->template eval<S>(std::span<const S>(x));
                },
                text));
        }
    }

    if (file.has("reeb_flow")) {
        std::vector<std::string> vars = coords;
        vars.push_back("u");
        std::vector<Expr::Ptr> images(static_cast<size_t>(dim));
        for (int i = 0; i < dim; ++i)
            images[static_cast<size_t>(i)] = parse_expression(coords[static_cast<size_t>(i)], vars);
        for (const auto& e : file.at("reeb_flow"))
            images[static_cast<size_t>(sc.chart.index(e.key))] =
                parse_expression(e.value, vars, constants);
        sc.reeb_flow = FlowMap::from_closure(sc.chart, [images, dim](auto u, auto x) {
            using S = typename decltype(x)::value_type;
            std::vector<S> env(x.begin(), x.end());
            env.push_back(u[0]);
            std::vector<S> out(static_cast<size_t>(dim));
            for (int i = 0; i < dim; ++i)
                out[static_cast<size_t>(i)] =
                    images[static_cast<size_t>(i)]->template eval<S>(std::span<const S>(env));
            return out;
        });
    }

    if (file.has("slice")) {
        sc.slice_dropped = split_words(file.require("slice", "drop"));
        sc.slice_values =
            detail::parse_numbers(file.require("slice", "value"), file.path + ": [slice]");
        if (sc.slice_dropped.size() != sc.slice_values.size())
            throw ParseError(file.path + ": [slice] drop/value length mismatch");
        for (const auto& nm : sc.slice_dropped) (void)sc.chart.index(nm);
    }

    sc.mu_default.assign(static_cast<size_t>(sc.momentum.k()), 0.0);
    if (file.has("mu")) {
        if (const auto* e = file.find("mu", "default"))
            sc.mu_default = detail::parse_numbers(e->value, file.path + ": [mu] default");
        if (const auto* e = file.find("mu", "max")) {
            auto expr = parse_expression(e->value, {}, constants);
            sc.mu_max = expr->eval<double>(std::span<const double>{});
        }
    }
    if (static_cast<int>(sc.mu_default.size()) != sc.momentum.k())
        throw ParseError(file.path + ": [mu] default needs one value per momentum component");

    sc.sample_box.center =
        detail::parse_numbers(file.require("sample_box", "center"), file.path + ": [sample_box]");
    sc.sample_box.halfwidth = detail::parse_numbers(file.require("sample_box", "halfwidth"),
                                                    file.path + ": [sample_box]");
    if (sc.sample_box.dim() != dim ||
        static_cast<int>(sc.sample_box.halfwidth.size()) != dim)
        throw ParseError(file.path + ": [sample_box] entries must match the chart dimension");

    if (file.has("connection")) {
        const int n = (dim - 1) / 2;
        std::vector<ScalarField> conn;
        for (int i = 1; i <= n; ++i) {
            const std::string text = file.require("connection", "Y" + std::to_string(i));
            auto expr = parse_expression(text, coords, constants);
            conn.push_back(ScalarField::from_closure(
                sc.chart,
                [expr](auto x) {
                    using S = typename decltype(x)::value_type;
                    return expr->template eval<S>(std::span<const S>(x));
                },
                text));
        }
        sc.connection = std::move(conn);
    }

    return sc;
}

/// Quick load-time invariant checks; throws ValidationError naming the first
/// failed invariant.
inline void check_scenario_invariants(const Scenario& sc, int samples = 40,
                                      std::uint64_t seed = 20240917) {
    if (sc.chart.dim() % 2 == 0)
        throw ValidationError(sc.name + ": chart dimension must be odd");
    RunConfig cfg;
    cfg.samples = samples;
    cfg.seed = seed;
    for (const auto& rep : validate_scenario(sc, cfg))
        if (!rep.pass()) {
            for (const auto& item : rep.items())
                if (!item.pass)
                    throw ValidationError(sc.name + ": invariant failed: " + rep.title() + ": " +
                                          item.label);
            throw ValidationError(sc.name + ": invariant failed: " + rep.title());
        }
}

/// Resolve a source string to a scenario: built-in name or file path.
inline Scenario load_scenario(const std::string& source, bool validate = true) {
    Scenario sc;
    const auto builtins = builtin_scenario_names();
    if (std::find(builtins.begin(), builtins.end(), source) != builtins.end())
        sc = make_builtin_scenario(source);
    else
        sc = parse_scenario_file(source);
    if (validate) check_scenario_invariants(sc);
    return sc;
}

} // namespace cosym
