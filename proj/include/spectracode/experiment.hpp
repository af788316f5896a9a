#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>
#include <openssl/evp.h>

#include "spectracode/codes.hpp"
#include "spectracode/csv.hpp"
#include "spectracode/ensemble.hpp"
#include "spectracode/error.hpp"
#include "spectracode/moments.hpp"
#include "spectracode/parallel.hpp"
#include "spectracode/random.hpp"
#include "spectracode/reference.hpp"
#include "spectracode/spectra.hpp"

namespace spectracode::experiment {

using json = nlohmann::json;

enum class Kind { esd, moments, sweep, dual_distance, reference };

inline Kind parse_kind(const std::string& s)
{
    if (s == "esd") return Kind::esd;
    if (s == "moments") return Kind::moments;
    if (s == "sweep") return Kind::sweep;
    if (s == "dual-distance") return Kind::dual_distance;
    if (s == "reference") return Kind::reference;
    throw UsageError("unknown experiment kind '" + s + "' (expected esd, moments, sweep, dual-distance, reference)");
}

inline std::string kind_name(Kind k)
{
    switch (k) {
    case Kind::esd: return "esd";
    case Kind::moments: return "moments";
    case Kind::sweep: return "sweep";
    case Kind::dual_distance: return "dual-distance";
    case Kind::reference: return "reference";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Config access with field paths in error messages

namespace detail {

inline const json* find_path(const json& root, const std::string& path)
{
    const json* node = &root;
    std::size_t start = 0;
    while (start <= path.size()) {
        const auto dot = path.find('.', start);
        const auto key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (!node->is_object()) return nullptr;
        const auto it = node->find(key);
        if (it == node->end()) return nullptr;
        node = &*it;
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    return node;
}

inline std::uint64_t as_uint(const json& v, const std::string& path)
{
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
    throw UsageError("config field '" + path + "': expected a nonnegative integer");
}

inline double as_real(const json& v, const std::string& path)
{
    if (!v.is_number()) throw UsageError("config field '" + path + "': expected a number");
    return v.get<double>();
}

inline std::optional<std::uint64_t> opt_uint(const json& root, const std::string& path)
{
    const json* v = find_path(root, path);
    if (!v || v->is_null()) return std::nullopt;
    return as_uint(*v, path);
}

inline std::optional<double> opt_real(const json& root, const std::string& path)
{
    const json* v = find_path(root, path);
    if (!v || v->is_null()) return std::nullopt;
    return as_real(*v, path);
}

inline std::optional<std::string> opt_string(const json& root, const std::string& path)
{
    const json* v = find_path(root, path);
    if (!v || v->is_null()) return std::nullopt;
    if (!v->is_string()) throw UsageError("config field '" + path + "': expected a string");
    return v->get<std::string>();
}

inline std::optional<bool> opt_bool(const json& root, const std::string& path)
{
    const json* v = find_path(root, path);
    if (!v || v->is_null()) return std::nullopt;
    if (!v->is_boolean()) throw UsageError("config field '" + path + "': expected true or false");
    return v->get<bool>();
}

inline int small_int(std::uint64_t v, const std::string& path, std::uint64_t max = 1u << 20)
{
    if (v > max) throw UsageError("config field '" + path + "': value " + std::to_string(v) + " is too large");
    return static_cast<int>(v);
}

} // namespace detail

// ---------------------------------------------------------------------------
// Code descriptors

struct CodeDescriptor {
    std::string family;  // gold | simplex | even_weight | random
    int m = 0;           // gold, simplex
    int k0 = 1;          // gold
    int n = 0;           // even_weight, random
    int k = 0;           // random
    std::uint32_t q = 2; // random
    std::uint64_t seed = 0;

    json to_json() const
    {
        json j{{"family", family}};
        if (family == "gold") j["m"] = m, j["k0"] = k0;
        else if (family == "simplex") j["m"] = m;
        else if (family == "even_weight") j["n"] = n;
        else j["n"] = n, j["k"] = k, j["q"] = q, j["seed"] = seed;
        return j;
    }
};

inline CodeDescriptor parse_code(const json& root, const std::string& path)
{
    const json* node = detail::find_path(root, path);
    if (!node || !node->is_object()) throw UsageError("config field '" + path + "': expected a code descriptor object");
    CodeDescriptor d;
    const auto family = detail::opt_string(*node, "family");
    if (!family) throw UsageError("config field '" + path + ".family' is required");
    d.family = *family;
    auto need = [&](const char* key) -> std::uint64_t {
        const auto v = detail::opt_uint(*node, key);
        if (!v) throw UsageError("config field '" + path + "." + key + "' is required for family " + d.family);
        return *v;
    };
    if (d.family == "gold") {
        d.m = detail::small_int(need("m"), path + ".m");
        d.k0 = detail::small_int(detail::opt_uint(*node, "k0").value_or(1), path + ".k0");
    } else if (d.family == "simplex") {
        d.m = detail::small_int(need("m"), path + ".m");
    } else if (d.family == "even_weight") {
        d.n = detail::small_int(need("n"), path + ".n");
    } else if (d.family == "random") {
        d.n = detail::small_int(need("n"), path + ".n");
        d.k = detail::small_int(need("k"), path + ".k");
        d.q = static_cast<std::uint32_t>(detail::small_int(detail::opt_uint(*node, "q").value_or(2), path + ".q"));
        d.seed = detail::opt_uint(*node, "seed").value_or(0);
    } else {
        throw UsageError("config field '" + path + ".family': unknown family '" + d.family +
                         "' (expected gold, simplex, even_weight, random)");
    }
    return d;
}

inline codes::LinearCode build_code(const CodeDescriptor& d)
{
    if (d.family == "gold") return codes::build_gold(d.m, d.k0);
    if (d.family == "simplex") return codes::build_simplex(d.m);
    if (d.family == "even_weight") return codes::build_even_weight(d.n);
    if (d.family == "random") return codes::build_random_code(d.n, d.k, d.q, d.seed);
    throw UsageError("unknown code family '" + d.family + "'");
}

// ---------------------------------------------------------------------------
// Experiment configuration

struct ReferenceParams {
    std::size_t N_big = 1024;
    std::size_t trials = 64;
    std::uint64_t seed = 0;
    std::string path; // load a previously written table instead of sampling
};

struct SweepParams {
    std::string family = "gold";
    std::vector<int> m;
    int k0 = 1;
};

struct ExperimentConfig {
    Kind kind = Kind::esd;
    std::optional<CodeDescriptor> code_a;
    std::optional<CodeDescriptor> code_b;
    std::optional<std::uint64_t> N_a, N_b;
    std::optional<double> y_a, y_b;
    std::uint64_t trials = 32;
    int l_max = 4;
    std::uint64_t seed = 1;
    std::string out = "out";
    unsigned threads = 1;
    bool oracle = false;
    ReferenceParams reference;
    SweepParams sweep;

    /// Resolved configuration without execution-only fields (out, threads).
    json to_json() const
    {
        json j{{"kind", kind_name(kind)}, {"trials", trials}, {"l_max", l_max}, {"seed", seed}, {"oracle", oracle}};
        if (code_a) j["code_a"] = code_a->to_json();
        if (code_b) j["code_b"] = code_b->to_json();
        if (N_a) j["N_a"] = *N_a;
        if (N_b) j["N_b"] = *N_b;
        if (y_a) j["y_a"] = *y_a;
        if (y_b) j["y_b"] = *y_b;
        j["reference"] = {{"N_big", reference.N_big}, {"trials", reference.trials}, {"seed", reference.seed}};
        if (!reference.path.empty()) j["reference"]["path"] = reference.path;
        if (kind == Kind::sweep) j["sweep"] = {{"family", sweep.family}, {"m", sweep.m}, {"k0", sweep.k0}};
        return j;
    }
};

/// Reads a config document. `kind_override`, when nonempty, replaces the "kind" field.
inline ExperimentConfig parse_config(const json& root, const std::string& kind_override = {})
{
    using namespace detail;
    if (!root.is_object()) throw UsageError("config must be a JSON object");
    ExperimentConfig c;
    const auto kind = kind_override.empty() ? opt_string(root, "kind") : std::optional(kind_override);
    if (!kind) throw UsageError("config field 'kind' is required");
    c.kind = parse_kind(*kind);

    if (find_path(root, "code_a")) c.code_a = parse_code(root, "code_a");
    if (find_path(root, "code_b")) c.code_b = parse_code(root, "code_b");
    else c.code_b = c.code_a;
    c.N_a = opt_uint(root, "N_a");
    c.N_b = opt_uint(root, "N_b");
    c.y_a = opt_real(root, "y_a");
    c.y_b = opt_real(root, "y_b");
    c.trials = opt_uint(root, "trials").value_or(c.trials);
    c.l_max = small_int(opt_uint(root, "l_max").value_or(static_cast<std::uint64_t>(c.l_max)), "l_max", 64);
    c.seed = opt_uint(root, "seed").value_or(c.seed);
    c.out = opt_string(root, "out").value_or(c.out);
    c.threads = static_cast<unsigned>(small_int(opt_uint(root, "threads").value_or(c.threads), "threads", 4096));
    c.oracle = opt_bool(root, "oracle").value_or(c.oracle);

    c.reference.N_big = opt_uint(root, "reference.N_big").value_or(c.reference.N_big);
    c.reference.trials = opt_uint(root, "reference.trials").value_or(c.reference.trials);
    // Default reference seed: a fixed child of the master seed, disjoint from trial seeds.
    c.reference.seed = opt_uint(root, "reference.seed").value_or(hash_combine(c.seed, 0x5245464552454E43ULL));
    c.reference.path = opt_string(root, "reference.path").value_or("");

    if (c.kind == Kind::sweep) {
        c.sweep.family = opt_string(root, "sweep.family").value_or(c.sweep.family);
        if (c.sweep.family != "gold" && c.sweep.family != "simplex")
            throw UsageError("config field 'sweep.family': expected gold or simplex");
        c.sweep.k0 = small_int(opt_uint(root, "sweep.k0").value_or(1), "sweep.k0");
        const json* ms = find_path(root, "sweep.m");
        if (!ms || !ms->is_array()) throw UsageError("config field 'sweep.m': expected an array of degrees");
        for (std::size_t i = 0; i < ms->size(); ++i) {
            const std::string p = "sweep.m[" + std::to_string(i) + "]";
            c.sweep.m.push_back(small_int(as_uint((*ms)[i], p), p, 20));
        }
        if (c.sweep.m.size() < 2) throw UsageError("config field 'sweep.m': a sweep needs at least 2 points");
        for (const char* key : {"y_a", "y_b"}) {
            const auto y = opt_real(root, key);
            if (!y) throw UsageError(std::string("config field '") + key + "' is required for a sweep");
            if (!(*y > 0.0) || *y == 1.0)
                throw UsageError(std::string("config field '") + key + "': a sweep needs y in (0,1) or (1,inf)");
        }
    } else if (c.kind == Kind::reference && !c.code_a) {
        if (!c.y_a || !c.y_b) throw UsageError("config needs 'code_a' or both 'y_a' and 'y_b'");
    } else if (!c.code_a) {
        throw UsageError("config field 'code_a' is required");
    }
    if (c.kind == Kind::esd || c.kind == Kind::moments) {
        if (!c.N_a && !c.y_a) throw UsageError("config needs 'N_a' or 'y_a'");
        if (!c.N_b && !c.y_b) throw UsageError("config needs 'N_b' or 'y_b'");
        if (c.trials == 0) throw UsageError("config field 'trials' must be >= 1");
    }
    return c;
}

inline std::uint64_t rows_for_ratio(int n, std::optional<std::uint64_t> N, std::optional<double> y, const char* field)
{
    if (N) {
        if (*N == 0) throw UsageError(std::string("config field '") + field + "' must be >= 1");
        return *N;
    }
    if (!(y.value() > 0.0)) throw UsageError(std::string("config ratio for '") + field + "' must be > 0");
    const auto rows = std::llround(static_cast<double>(n) / *y);
    if (rows < 1) throw UsageError(std::string("config ratio for '") + field + "' rounds to zero rows");
    return static_cast<std::uint64_t>(rows);
}

// ---------------------------------------------------------------------------
// Artifacts

struct Artifact {
    std::string name;
    std::string content;
};

struct ArtifactSet {
    std::vector<Artifact> files;
    json summary; // headline numbers, also written to summary.json

    void add(std::string name, std::string content) { files.push_back({std::move(name), std::move(content)}); }

    const std::string& get(const std::string& name) const
    {
        for (const auto& f : files)
            if (f.name == name) return f.content;
        throw UsageError("no artifact named " + name);
    }
};

inline std::string sha256_hex(const std::string& data)
{
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw NumericError("SHA-256 computation failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 0xF];
    }
    return out;
}

inline std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

/// Adds summary.json and manifest.json (SHA-256 of every other file, sorted by name).
inline void finalize(ArtifactSet& set)
{
    set.add("summary.json", dump_json(set.summary));
    std::vector<const Artifact*> sorted;
    for (const auto& f : set.files) sorted.push_back(&f);
    std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->name < b->name; });
    json files = json::array();
    for (const auto* f : sorted) files.push_back({{"path", f->name}, {"sha256", sha256_hex(f->content)}, {"bytes", f->content.size()}});
    set.add("manifest.json", dump_json({{"files", files}}));
}

inline void write_artifacts(const ArtifactSet& set, const std::filesystem::path& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ResourceError("cannot create output directory " + dir.string() + ": " + ec.message());
    for (const auto& f : set.files) {
        std::ofstream out(dir / f.name, std::ios::binary | std::ios::trunc);
        out.write(f.content.data(), static_cast<std::streamsize>(f.content.size()));
        if (!out) throw ResourceError("cannot write " + (dir / f.name).string());
    }
}

// ---------------------------------------------------------------------------
// Shared pieces

inline reference::ReferenceTable load_or_build_reference(const ExperimentConfig& c, double y_a, double y_b)
{
    if (!c.reference.path.empty()) {
        std::ifstream in(c.reference.path);
        if (!in) throw UsageError("config field 'reference.path': cannot open " + c.reference.path);
        auto table = reference::parse_reference_csv(in);
        if (std::abs(table.y_a - y_a) > 1e-12 || std::abs(table.y_b - y_b) > 1e-12)
            throw UsageError("config field 'reference.path': table ratios do not match the experiment");
        return table;
    }
    return reference::reference_cdf(y_a, y_b, c.reference.N_big, c.reference.trials, c.reference.seed, c.threads);
}

struct DistanceSample {
    std::vector<double> eigenvalues;
    double distance = 0.0;
};

/// Per-trial ESDs of the code product and their Kolmogorov distances to `ref`.
inline std::vector<DistanceSample> distance_trials(const codes::LinearCode& code_a, const codes::LinearCode& code_b,
                                                   std::uint64_t N_a, std::uint64_t N_b, std::uint64_t trials,
                                                   const SeedSpec& seed, const reference::TabulatedCdf& ref,
                                                   unsigned threads)
{
    std::vector<DistanceSample> out(trials);
    parallel_for(trials, threads, [&](std::size_t t) {
        const auto a = ensemble::sample_phi(code_a, N_a, seed.child(t, MatrixRole::a));
        const auto b = ensemble::sample_phi(code_b, N_b, seed.child(t, MatrixRole::b));
        auto eigs = spectra::hermitian_eigenvalues(spectra::gram_product(a, b));
        const auto esd = spectra::make_esd(eigs);
        out[t] = {std::move(eigs), spectra::kolmogorov_distance(esd, ref)};
    });
    return out;
}

struct MeanStderr {
    double mean = 0.0;
    double standard_error = 0.0;
};

inline MeanStderr mean_stderr(const std::vector<double>& xs)
{
    if (xs.empty()) throw UsageError("mean of an empty sample");
    long double s = 0.0L;
    for (double x : xs) s += x;
    const long double mean = s / static_cast<long double>(xs.size());
    if (xs.size() < 2) return {static_cast<double>(mean), 0.0};
    long double ss = 0.0L;
    for (double x : xs) ss += (x - mean) * (x - mean);
    const long double var = ss / static_cast<long double>(xs.size() - 1);
    return {static_cast<double>(mean), static_cast<double>(std::sqrt(var / static_cast<long double>(xs.size())))};
}

inline std::string reference_plot_script(const std::string& title)
{
    std::ostringstream out;
    out << "# gnuplot script: empirical spectral distribution vs reference\n"
        << "set datafile separator ','\n"
        << "set key autotitle columnhead left top\n"
        << "set xlabel 'x'\n"
        << "set ylabel 'F(x)'\n"
        << "set title '" << title << "'\n"
        << "plot 'esd.csv' using 1:2 with steps title 'ESD', \\\n"
        << "     'reference.csv' using 1:2 with lines title 'reference'\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// Experiments

inline ArtifactSet run_dual_distance(const ExperimentConfig& c)
{
    ArtifactSet set;
    json report = json::array();
    std::vector<CodeDescriptor> ds{*c.code_a};
    if (c.code_b && c.code_b->to_json() != c.code_a->to_json()) ds.push_back(*c.code_b);
    for (const auto& d : ds) {
        const auto code = build_code(d);
        report.push_back({{"code", code.label()}, {"n", code.n()}, {"k", code.k()}, {"q", code.q()},
                          {"dual_distance", codes::dual_distance(code)}});
    }
    set.add("dual_distance.json", dump_json(report));
    set.summary = report.size() == 1 ? report[0] : report;
    return set;
}

inline ArtifactSet run_moments(const ExperimentConfig& c)
{
    const auto code_a = build_code(*c.code_a);
    const auto code_b = build_code(*c.code_b);
    const auto N_a = rows_for_ratio(code_a.n(), c.N_a, c.y_a, "N_a");
    const auto N_b = rows_for_ratio(code_b.n(), c.N_b, c.y_b, "N_b");
    auto report = moments::empirical_moment_mc(code_a, code_b, N_a, N_b, c.l_max, c.trials, c.seed, c.threads);
    if (c.oracle) moments::attach_oracle(report, code_a, code_b);
    ArtifactSet set;
    set.add("moments.csv", moments::moment_report_csv(report));
    json rows = json::array();
    for (const auto& r : report.rows) {
        json row{{"l", r.l}, {"empirical_mean", r.empirical_mean}, {"stderr", r.standard_error},
                 {"main_term", r.main_term}, {"error_bound", r.error_bound.value},
                 {"bound_binding", r.error_bound.binding}};
        if (r.oracle) row["oracle"] = r.oracle->str();
        rows.push_back(row);
    }
    set.summary = {{"n", report.n}, {"N_a", N_a}, {"N_b", N_b}, {"y_a", report.y_a()}, {"y_b", report.y_b()},
                   {"trials", c.trials}, {"rows", rows}};
    return set;
}

inline ArtifactSet run_reference(const ExperimentConfig& c)
{
    double y_a = 0.0, y_b = 0.0;
    if (c.y_a && c.y_b) {
        y_a = *c.y_a;
        y_b = *c.y_b;
    } else {
        const auto code_a = build_code(*c.code_a);
        y_a = static_cast<double>(code_a.n()) / static_cast<double>(rows_for_ratio(code_a.n(), c.N_a, c.y_a, "N_a"));
        y_b = static_cast<double>(code_a.n()) / static_cast<double>(rows_for_ratio(code_a.n(), c.N_b, c.y_b, "N_b"));
    }
    const auto table = reference::reference_cdf(y_a, y_b, c.reference.N_big, c.reference.trials, c.reference.seed,
                                                c.threads);
    ArtifactSet set;
    set.add("reference.csv", reference::reference_csv(table));
    json moments_check = json::array();
    for (int l = 1; l <= std::max(2, c.l_max); ++l)
        moments_check.push_back({{"l", l}, {"table", table.cdf.moment(l)},
                                 {"main_term", moments::freeconv_moment(l, y_a, y_b)}});
    set.summary = {{"y_a", y_a}, {"y_b", y_b}, {"N_big", table.N_big}, {"n", table.n}, {"N_b", table.N_b},
                   {"trials", table.trials}, {"seed", table.seed}, {"rho", table.cdf.resolution()},
                   {"atom", table.cdf.atom()}, {"moments", moments_check}};
    return set;
}

inline ArtifactSet run_esd(const ExperimentConfig& c)
{
    const auto code_a = build_code(*c.code_a);
    const auto code_b = build_code(*c.code_b);
    const auto N_a = rows_for_ratio(code_a.n(), c.N_a, c.y_a, "N_a");
    const auto N_b = rows_for_ratio(code_b.n(), c.N_b, c.y_b, "N_b");
    const double y_a = static_cast<double>(code_a.n()) / static_cast<double>(N_a);
    const double y_b = static_cast<double>(code_a.n()) / static_cast<double>(N_b);
    const auto ref = load_or_build_reference(c, y_a, y_b);
    const auto samples = distance_trials(code_a, code_b, N_a, N_b, c.trials, SeedSpec{c.seed}, ref.cdf, c.threads);

    std::vector<double> pooled, distances;
    for (const auto& s : samples) {
        pooled.insert(pooled.end(), s.eigenvalues.begin(), s.eigenvalues.end());
        distances.push_back(s.distance);
    }
    const auto esd = spectra::make_esd(std::move(pooled));
    std::ostringstream esd_csv;
    esd_csv << "z,F\n";
    for (double z : esd.breakpoints()) esd_csv << format_real(z) << ',' << format_real(esd.right(z)) << '\n';

    std::ostringstream dist_csv;
    dist_csv << "trial,kolmogorov_distance\n";
    for (std::size_t t = 0; t < distances.size(); ++t) dist_csv << t << ',' << format_real(distances[t]) << '\n';

    const auto stats = mean_stderr(distances);
    const double pooled_distance = spectra::kolmogorov_distance(esd, ref.cdf);
    json kolmogorov{{"code_a", code_a.label()}, {"code_b", code_b.label()}, {"n", code_a.n()}, {"N_a", N_a},
                    {"N_b", N_b}, {"y_a", y_a}, {"y_b", y_b}, {"trials", c.trials},
                    {"mean_distance", stats.mean}, {"stderr", stats.standard_error},
                    {"pooled_distance", pooled_distance}, {"reference_rho", ref.cdf.resolution()}};

    ArtifactSet set;
    set.add("esd.csv", esd_csv.str());
    set.add("distances.csv", dist_csv.str());
    set.add("reference.csv", reference::reference_csv(ref));
    set.add("kolmogorov.json", dump_json(kolmogorov));
    set.add("esd.plt", reference_plot_script(code_a.label() + " x " + code_b.label()));
    set.summary = kolmogorov;
    return set;
}

struct SweepPoint {
    int m = 0;
    int n = 0;
    std::uint64_t N_a = 0;
    std::uint64_t N_b = 0;
    double distance = 0.0;
    double standard_error = 0.0;
    double fitted_bound = 0.0;
};

struct SweepFit {
    double C = 0.0;
    /// Least-squares slope of (fitted_bound - distance) against log n.
    double residual_trend = 0.0;
};

/// Fits D ~ C log log n / log n through the origin, then the residual trend.
inline SweepFit fit_sweep(std::vector<SweepPoint>& points)
{
    if (points.size() < 2) throw UsageError("a sweep fit needs at least 2 points");
    auto rate = [](int n) {
        const double ln = std::log(static_cast<double>(n));
        return std::log(ln) / ln;
    };
    double num = 0.0, den = 0.0;
    for (const auto& p : points) {
        if (p.n < 3) throw UsageError("sweep code length must be >= 3 for the log log n rate");
        num += p.distance * rate(p.n);
        den += rate(p.n) * rate(p.n);
    }
    SweepFit fit;
    fit.C = num / den;
    double sx = 0.0, sr = 0.0;
    for (auto& p : points) {
        p.fitted_bound = fit.C * rate(p.n);
        sx += std::log(static_cast<double>(p.n));
        sr += p.fitted_bound - p.distance;
    }
    const double k = static_cast<double>(points.size());
    const double mx = sx / k, mr = sr / k;
    double sxx = 0.0, sxr = 0.0;
    for (const auto& p : points) {
        const double dx = std::log(static_cast<double>(p.n)) - mx;
        sxx += dx * dx;
        sxr += dx * (p.fitted_bound - p.distance - mr);
    }
    fit.residual_trend = sxx > 0.0 ? sxr / sxx : 0.0;
    return fit;
}

/// Monotone decrease within noise: D_{i+1} < D_i + 2 sqrt(se_i^2 + se_{i+1}^2).
inline bool monotone_within_stderr(const std::vector<SweepPoint>& points)
{
    for (std::size_t i = 1; i < points.size(); ++i) {
        const auto& a = points[i - 1];
        const auto& b = points[i];
        if (!(b.distance < a.distance + 2.0 * std::hypot(a.standard_error, b.standard_error))) return false;
    }
    return true;
}

inline std::string sweep_csv(const std::vector<SweepPoint>& points)
{
    std::ostringstream out;
    out << "m,n,N_a,N_b,kolmogorov_distance,stderr,fitted_bound\n";
    for (const auto& p : points)
        out << p.m << ',' << p.n << ',' << p.N_a << ',' << p.N_b << ',' << format_real(p.distance) << ','
            << format_real(p.standard_error) << ',' << format_real(p.fitted_bound) << '\n';
    return out.str();
}

struct SweepResult {
    std::vector<SweepPoint> points;
    SweepFit fit;
};

inline void check_sweep_config(const ExperimentConfig& c)
{
    if (c.sweep.m.size() < 2) throw UsageError("a sweep needs at least 2 points");
    if (!c.y_a || !c.y_b) throw UsageError("a sweep needs y_a and y_b");
    for (double y : {*c.y_a, *c.y_b})
        if (!(y > 0.0) || y == 1.0) throw UsageError("a sweep needs y_a, y_b in (0,1) or (1,inf)");
}

/// Monte Carlo distances to `ref` for each sweep degree, plus the rate fit.
inline SweepResult sweep_points(const ExperimentConfig& c, const reference::TabulatedCdf& ref)
{
    check_sweep_config(c);
    const SeedSpec master{c.seed};
    SweepResult r;
    for (std::size_t i = 0; i < c.sweep.m.size(); ++i) {
        const int m = c.sweep.m[i];
        const auto code = c.sweep.family == "gold" ? codes::build_gold(m, c.sweep.k0) : codes::build_simplex(m);
        SweepPoint p;
        p.m = m;
        p.n = code.n();
        p.N_a = rows_for_ratio(p.n, std::nullopt, c.y_a, "y_a");
        p.N_b = rows_for_ratio(p.n, std::nullopt, c.y_b, "y_b");
        const auto samples =
            distance_trials(code, code, p.N_a, p.N_b, c.trials, SeedSpec{master.child(i)}, ref, c.threads);
        std::vector<double> d;
        for (const auto& s : samples) d.push_back(s.distance);
        const auto stats = mean_stderr(d);
        p.distance = stats.mean;
        p.standard_error = stats.standard_error;
        r.points.push_back(p);
    }
    r.fit = fit_sweep(r.points);
    return r;
}

inline ArtifactSet sweep_convergence(const ExperimentConfig& c)
{
    check_sweep_config(c);
    const auto ref = load_or_build_reference(c, *c.y_a, *c.y_b);
    const auto result = sweep_points(c, ref.cdf);
    ArtifactSet set;
    set.add("sweep.csv", sweep_csv(result.points));
    set.add("reference.csv", reference::reference_csv(ref));
    json fit_json{{"family", c.sweep.family}, {"y_a", *c.y_a}, {"y_b", *c.y_b}, {"trials", c.trials},
                  {"C", result.fit.C}, {"residual_trend", result.fit.residual_trend},
                  {"monotone_within_2_stderr", monotone_within_stderr(result.points)},
                  {"reference_rho", ref.cdf.resolution()}};
    set.add("fit.json", dump_json(fit_json));
    set.summary = fit_json;
    return set;
}

/// Runs one experiment and returns its artifacts (config.json, data files,
/// summary.json and manifest.json); nothing is written to disk.
inline ArtifactSet run_experiment(const ExperimentConfig& c)
{
    ArtifactSet set;
    switch (c.kind) {
    case Kind::esd: set = run_esd(c); break;
    case Kind::moments: set = run_moments(c); break;
    case Kind::sweep: set = sweep_convergence(c); break;
    case Kind::dual_distance: set = run_dual_distance(c); break;
    case Kind::reference: set = run_reference(c); break;
    }
    set.add("config.json", dump_json(c.to_json()));
    finalize(set);
    return set;
}

// ---------------------------------------------------------------------------
// Command-line overrides

/// Sets root[path] (dotted) to `value`, parsed as JSON when possible and as a
/// string otherwise.
inline void apply_override(json& root, const std::string& path, const std::string& value)
{
    if (path.empty()) throw UsageError("empty override key");
    json parsed = json::parse(value, nullptr, false);
    if (parsed.is_discarded()) parsed = value;
    json* node = &root;
    std::size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        const auto key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (key.empty()) throw UsageError("malformed override key '" + path + "'");
        if (!node->is_object()) throw UsageError("override '" + path + "': parent is not an object");
        if (dot == std::string::npos) {
            (*node)[key] = parsed;
            return;
        }
        node = &(*node)[key];
        if (node->is_null()) *node = json::object();
        start = dot + 1;
    }
}

} // namespace spectracode::experiment
