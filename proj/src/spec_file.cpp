#include <cdsolve/spec_file.hpp>

#include <cdsolve/io.hpp>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace cdsolve {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct Ctx {
    std::string origin;
    fs::path base;

    [[noreturn]] void fail(const std::string& key, const std::string& msg) const
    {
        throw SpecError(origin + ": key '" + key + "': " + msg);
    }

    std::string resolve(const std::string& key, const std::string& file) const
    {
        fs::path p(file);
        if (p.is_relative()) p = base / p;
        if (!fs::exists(p)) fail(key, "file '" + p.string() + "' not found");
        return p.string();
    }
};

// A vector that may still need broadcasting from a scalar.
struct VecValue {
    std::vector<double> values;
    bool scalar = false;

    std::vector<double> expand(std::size_t n) const { return scalar ? std::vector<double>(n, values[0]) : values; }
};

VecValue read_vec(const Ctx& ctx, const std::string& key, const json& j)
{
    VecValue v;
    try {
        if (j.is_number()) {
            v.values = {j.get<double>()};
            v.scalar = true;
        } else if (j.is_array()) {
            for (const auto& e : j) {
                if (!e.is_number()) ctx.fail(key, "expected an array of numbers");
                v.values.push_back(e.get<double>());
            }
        } else if (j.is_string()) {
            v.values = read_vector(ctx.resolve(key, j.get<std::string>()));
        } else if (j.is_object() && j.contains("file")) {
            v.values = read_vector(ctx.resolve(key, j.at("file").get<std::string>()));
        } else {
            ctx.fail(key, "expected a number, an array of numbers or a file name");
        }
    } catch (const IoError& e) {
        ctx.fail(key, e.what());
    }
    return v;
}

std::vector<index_t> read_indices(const Ctx& ctx, const std::string& key, const json& j)
{
    if (!j.is_array()) ctx.fail(key, "expected an array of nonnegative integers");
    std::vector<index_t> out;
    for (const auto& e : j) {
        if (!e.is_number_integer() || e.get<long long>() < 0) ctx.fail(key, "expected an array of nonnegative integers");
        out.push_back(e.get<index_t>());
    }
    return out;
}

std::vector<std::string> read_atoms(const Ctx& ctx, const std::string& key, const json& j)
{
    std::vector<std::string> out;
    auto one = [&](const json& e) {
        if (e.is_string()) {
            out.push_back(e.get<std::string>());
        } else if (e.is_object() && e.contains("atom") && e.contains("count")) {
            if (!e.at("atom").is_string() || !e.at("count").is_number_integer() || e.at("count").get<long long>() < 0)
                ctx.fail(key, "expected {\"atom\": name, \"count\": n}");
            out.insert(out.end(), e.at("count").get<std::size_t>(), e.at("atom").get<std::string>());
        } else {
            ctx.fail(key, "expected atom names or {\"atom\": name, \"count\": n}");
        }
    };
    if (j.is_array()) {
        for (const auto& e : j) one(e);
    } else {
        one(j);
    }
    return out;
}

struct MatValue {
    MatrixInput m;
    std::optional<std::vector<double>> labels;
};

MatValue read_mat(const Ctx& ctx, const std::string& key, const json& j)
{
    MatValue out;
    try {
        std::string file;
        std::optional<MatrixFormat> fmt;
        bool transpose = false;
        if (j.is_string()) {
            file = j.get<std::string>();
        } else if (j.is_object() && j.contains("file")) {
            file = j.at("file").get<std::string>();
            if (j.contains("format")) {
                fmt = parse_matrix_format(j.at("format").get<std::string>());
                if (!fmt) ctx.fail(key, "unknown matrix format '" + j.at("format").get<std::string>() + "'");
            }
            transpose = j.value("transpose", false);
        } else if (j.is_object() && j.contains("dense")) {
            const auto& rows = j.at("dense");
            if (!rows.is_array()) ctx.fail(key, "'dense' must be an array of rows");
            std::vector<double> data;
            std::size_t cols = 0;
            for (std::size_t r = 0; r < rows.size(); ++r) {
                if (!rows[r].is_array()) ctx.fail(key, "'dense' must be an array of rows");
                if (r == 0) cols = rows[r].size();
                if (rows[r].size() != cols) ctx.fail(key, "row " + std::to_string(r) + " has the wrong length");
                for (const auto& e : rows[r]) data.push_back(e.get<double>());
            }
            out.m = MatrixInput::from_dense(rows.size(), cols, std::move(data));
            transpose = j.value("transpose", false);
            if (transpose) out.m = MatrixInput::from_sparse(out.m.to_sparse().transpose());
            return out;
        } else {
            ctx.fail(key, "expected a file name, {\"file\": ...} or {\"dense\": [[...]]}");
        }
        const std::string path = ctx.resolve(key, file);
        const MatrixFormat f = fmt.value_or(guess_matrix_format(path));
        SparseColMatrix m;
        if (f == MatrixFormat::Libsvm) {
            auto d = read_libsvm(path);
            m = std::move(d.A);
            out.labels = std::move(d.labels);
        } else {
            m = read_matrix(path, f);
        }
        if (transpose) m = m.transpose();
        out.m = MatrixInput::from_sparse(std::move(m));
    } catch (const IoError& e) {
        ctx.fail(key, e.what());
    } catch (const json::exception& e) {
        ctx.fail(key, e.what());
    }
    return out;
}

template <class T>
T get_num(const Ctx& ctx, const std::string& key, const json& j)
{
    if (!j.is_number()) ctx.fail(key, "expected a number");
    if constexpr (std::is_integral_v<T>) {
        if (!j.is_number_integer() || j.get<long long>() < 0) ctx.fail(key, "expected a nonnegative integer");
    }
    return j.get<T>();
}

SolveOptions read_options(const Ctx& ctx, const json& j)
{
    SolveOptions o;
    if (!j.is_object()) ctx.fail("options", "expected an object");
    static const std::set<std::string> known{"algo", "tol", "tolerance", "max_iter", "max_time",
                                             "print_period", "sampling", "seed", "safety", "sigma",
                                             "screening", "screening_period", "gamma1", "restart",
                                             "refresh_period", "verbose"};
    for (const auto& [k, v] : j.items()) {
        const std::string key = "options." + k;
        if (!known.count(k)) ctx.fail(key, "unknown option");
        if (k == "algo") {
            auto a = v.is_string() ? parse_algorithm(v.get<std::string>()) : std::nullopt;
            if (!a) ctx.fail(key, "expected \"pdcd\" or \"smartcd\"");
            o.algo = *a;
        } else if (k == "tol" || k == "tolerance") {
            o.tolerance = get_num<double>(ctx, key, v);
        } else if (k == "max_iter") {
            o.max_iter = get_num<std::uint64_t>(ctx, key, v);
        } else if (k == "max_time") {
            o.max_time = get_num<double>(ctx, key, v);
        } else if (k == "print_period") {
            o.print_period = get_num<std::uint64_t>(ctx, key, v);
        } else if (k == "sampling") {
            auto s = v.is_string() ? parse_sampling(v.get<std::string>()) : std::nullopt;
            if (!s) ctx.fail(key, "expected \"uniform\" or \"kink_half\"");
            o.sampling = *s;
        } else if (k == "seed") {
            o.seed = get_num<std::uint64_t>(ctx, key, v);
        } else if (k == "safety") {
            o.safety = get_num<double>(ctx, key, v);
        } else if (k == "sigma") {
            o.sigma = read_vec(ctx, key, v).values;
        } else if (k == "screening") {
            if (v.is_boolean()) {
                o.screening = v.get<bool>();
            } else if (v.is_string() && (v == "on" || v == "off")) {
                o.screening = v == "on";
            } else {
                ctx.fail(key, "expected true/false or \"on\"/\"off\"");
            }
        } else if (k == "screening_period") {
            o.screening_period = get_num<std::uint64_t>(ctx, key, v);
        } else if (k == "gamma1") {
            o.gamma1 = get_num<double>(ctx, key, v);
        } else if (k == "refresh_period") {
            o.refresh_period = get_num<std::uint64_t>(ctx, key, v);
        } else if (k == "verbose") {
            o.verbose = v.get<bool>();
        } else if (k == "restart") {
            if (!v.is_object()) ctx.fail(key, "expected {\"kind\": ..., \"period\": ...}");
            const std::string kind = v.value("kind", "doubling");
            if (kind == "doubling") {
                o.restart.kind = RestartPolicy::Kind::Doubling;
            } else if (kind == "fixed") {
                o.restart.kind = RestartPolicy::Kind::FixedPeriod;
            } else {
                ctx.fail(key, "kind must be \"doubling\" or \"fixed\"");
            }
            if (v.contains("period")) o.restart.period = get_num<std::uint64_t>(ctx, key + ".period", v.at("period"));
        }
    }
    return o;
}

}  // namespace

ProblemSpec parse_spec(const std::string& text, const std::string& base_dir, const std::string& origin)
{
    Ctx ctx{origin, fs::path(base_dir)};
    json j;
    try {
        j = json::parse(text, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw SpecError(origin + ": invalid JSON: " + e.what());
    }
    if (!j.is_object()) throw SpecError(origin + ": top level must be an object");

    static const std::set<std::string> known{"N", "blocks", "blocks_f", "blocks_h", "f", "g", "h", "cf", "cg",
                                             "ch", "Af", "Ah", "Q", "bf", "bg", "bh", "Dg", "x_init", "y_init",
                                             "options", "description"};
    for (const auto& [k, v] : j.items())
        if (!known.count(k)) ctx.fail(k, "unknown key");

    ProblemSpec spec;
    auto& in = spec.inputs;
    std::optional<std::vector<double>> af_labels;
    if (j.contains("Af")) {
        auto mv = read_mat(ctx, "Af", j["Af"]);
        in.Af = std::move(mv.m);
        af_labels = std::move(mv.labels);
    }
    if (j.contains("Ah")) in.Ah = read_mat(ctx, "Ah", j["Ah"]).m;
    if (j.contains("Q")) in.Q = read_mat(ctx, "Q", j["Q"]).m;

    if (j.contains("N")) {
        in.N = get_num<index_t>(ctx, "N", j["N"]);
    } else if (in.Af) {
        in.N = in.Af->cols;
    } else if (in.Ah) {
        in.N = in.Ah->cols;
    } else if (in.Q) {
        in.N = in.Q->cols;
    } else {
        ctx.fail("N", "missing and not inferable from a matrix");
    }

    for (const char* k : {"blocks", "blocks_f", "blocks_h"}) {
        if (!j.contains(k)) continue;
        auto idx = read_indices(ctx, k, j[k]);
        if (std::string(k) == "blocks") in.blocks = std::move(idx);
        else if (std::string(k) == "blocks_f") in.blocks_f = std::move(idx);
        else in.blocks_h = std::move(idx);
    }
    if (j.contains("f")) in.f = read_atoms(ctx, "f", j["f"]);
    if (j.contains("g")) in.g = read_atoms(ctx, "g", j["g"]);
    if (j.contains("h")) in.h = read_atoms(ctx, "h", j["h"]);

    const index_t n_blocks = in.blocks ? (in.blocks->empty() ? 0 : in.blocks->size() - 1) : in.N;
    const index_t rows_f = in.Af ? in.Af->rows : 0;
    const index_t rows_h = in.Ah ? in.Ah->rows : 0;

    auto vec = [&](const char* key, std::size_t n, std::optional<std::vector<double>>& dst) {
        if (!j.contains(key)) return;
        dst = read_vec(ctx, key, j[key]).expand(n);
    };
    vec("cf", in.f.size(), in.cf);
    vec("cg", in.g.size(), in.cg);
    vec("ch", in.h.size(), in.ch);
    vec("bg", in.N, in.bg);
    vec("bh", rows_h, in.bh);
    vec("Dg", n_blocks, in.Dg);
    vec("x_init", in.N, in.x_init);
    vec("y_init", 0, in.y_init);
    if (j.contains("bf")) {
        if (j["bf"].is_string() && j["bf"] == "labels") {
            if (!af_labels) ctx.fail("bf", "\"labels\" requires Af to be a libsvm file");
            in.bf = af_labels;
        } else {
            vec("bf", rows_f, in.bf);
        }
    }
    if (j.contains("options")) spec.options = read_options(ctx, j["options"]);
    return spec;
}

ProblemSpec load_spec(const std::string& path)
{
    std::ifstream f(path);
    if (!f) throw SpecError(path + ": cannot open specification file");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_spec(ss.str(), fs::path(path).parent_path().string(), path);
}

Problem load_problem(const std::string& path) { return build_problem(load_spec(path).inputs); }

}  // namespace cdsolve
