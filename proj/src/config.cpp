#include "threshold/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace thr::config {

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ValidationError("config " + (path.empty() ? std::string("<root>") : path) + ": " + what);
}

}  // namespace

Json load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("config: cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ValidationError("config " + path.string() + ": " + e.what());
    }
}

const Json& require(const Json& j, const std::string& key, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) fail(join(path, key), "missing required key");
    return *it;
}

double number(const Json& j, const std::string& key, const std::string& path) {
    const Json& v = require(j, key, path);
    if (!v.is_number()) fail(join(path, key), "expected a number");
    return v.get<double>();
}

double number_or(const Json& j, const std::string& key, double fallback, const std::string& path) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    return number(j, key, path);
}

int integer(const Json& j, const std::string& key, const std::string& path) {
    const Json& v = require(j, key, path);
    if (!v.is_number_integer()) fail(join(path, key), "expected an integer");
    return v.get<int>();
}

int integer_or(const Json& j, const std::string& key, int fallback, const std::string& path) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    return integer(j, key, path);
}

std::string text_or(const Json& j, const std::string& key, const std::string& fallback, const std::string& path) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    const Json& v = j.at(key);
    if (!v.is_string()) fail(join(path, key), "expected a string");
    return v.get<std::string>();
}

std::vector<double> numbers(const Json& j, const std::string& key, const std::string& path) {
    const Json& v = require(j, key, path);
    if (!v.is_array()) fail(join(path, key), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number()) fail(join(path, key) + "[" + std::to_string(i) + "]", "expected a number");
        out.push_back(v[i].get<double>());
    }
    return out;
}

MatR matrix(const Json& j, const std::string& path) {
    if (!j.is_array() || j.empty() || !j[0].is_array()) fail(path, "expected a nonempty matrix (array of rows)");
    const std::size_t rows = j.size(), cols = j[0].size();
    MatR M(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array() || j[r].size() != cols) fail(path + "[" + std::to_string(r) + "]", "ragged matrix row");
        for (std::size_t c = 0; c < cols; ++c) {
            if (!j[r][c].is_number())
                fail(path + "[" + std::to_string(r) + "][" + std::to_string(c) + "]", "expected a number");
            M(r, c) = j[r][c].get<double>();
        }
    }
    return M;
}

RadialGrid parse_grid(const Json& j, const std::string& path) {
    if (j.is_null()) return RadialGrid::default_grid();
    const std::string type = text_or(j, "type", "log", path);
    RadialGrid g;
    if (type == "log" || type == "uniform") {
        const int n = integer_or(j, "n", 400, path);
        const double rmin = number_or(j, "rmin", 1e-3, path), rmax = number_or(j, "rmax", 60.0, path);
        if (n < 4) fail(join(path, "n"), "need at least 4 nodes");
        if (!(rmin > 0.0) || !(rmax > rmin)) fail(path, "need 0 < rmin < rmax");
        g = type == "log" ? RadialGrid::log_spaced(n, rmin, rmax) : RadialGrid::uniform(n, rmin, rmax);
    } else if (type == "panels") {
        std::vector<double> breaks = j.contains("breaks") ? numbers(j, "breaks", path) : std::vector<double>{0.0};
        const double rmax = number_or(j, "rmax", 30.0, path);
        const double h = number_or(j, "h", 0.25, path);
        const double growth = number_or(j, "growth", 1.3, path);
        const int order = integer_or(j, "order", 16, path);
        if (!(h > 0.0) || !(growth >= 1.0) || order < 2) fail(path, "need h > 0, growth >= 1, order >= 2");
        if (breaks.empty() || breaks.back() >= rmax) fail(join(path, "breaks"), "breaks must lie below rmax");
        g = RadialGrid::panels(breaks, rmax, h, growth, order);
    } else {
        fail(join(path, "type"), "unknown grid type '" + type + "' (log, uniform, panels)");
    }
    g.weight_s = number_or(j, "weight_s", 1.0, path);
    if (!(g.weight_s > 0.5)) fail(join(path, "weight_s"), "weight exponent must exceed 1/2");
    return g;
}

std::function<double(double)> parse_profile(const Json& j, const std::string& path) {
    const std::string p = text_or(j, "profile", "", path);
    if (p == "square_well") {
        const double V0 = number(j, "depth", path), a = number(j, "radius", path);
        if (!(a > 0.0)) fail(join(path, "radius"), "must be > 0");
        return [V0, a](double r) { return r < a ? -V0 : 0.0; };
    }
    if (p == "gaussian") {
        const double V0 = number(j, "depth", path), b = number(j, "width", path);
        if (!(b > 0.0)) fail(join(path, "width"), "must be > 0");
        return [V0, b](double r) { return -V0 * std::exp(-(r / b) * (r / b)); };
    }
    if (p == "exponential") {
        const double V0 = number(j, "depth", path), b = number(j, "range", path);
        if (!(b > 0.0)) fail(join(path, "range"), "must be > 0");
        return [V0, b](double r) { return -V0 * std::exp(-r / b); };
    }
    fail(join(path, "profile"), "unknown profile '" + p + "' (square_well, gaussian, exponential)");
}

namespace {

std::vector<MatR> parse_local_terms(const Json& arr, const RadialGrid& grid, int m, const std::string& path) {
    if (!arr.is_array()) fail(path, "expected an array of potential terms");
    std::vector<MatR> W(grid.size(), MatR::Zero(m, m));
    for (std::size_t t = 0; t < arr.size(); ++t) {
        const std::string p = path + "[" + std::to_string(t) + "]";
        auto f = parse_profile(arr[t], p);
        MatR C = arr[t].contains("matrix") ? matrix(arr[t]["matrix"], join(p, "matrix")) : MatR::Identity(m, m);
        if (C.rows() != m || C.cols() != m) fail(join(p, "matrix"), "must be m x m");
        if ((C - C.transpose()).norm() > 0.0) fail(join(p, "matrix"), "must be symmetric");
        for (int i = 0; i < grid.size(); ++i) W[i] += f(grid.r()[i]) * C;
    }
    return W;
}

}  // namespace

EffectiveOperator parse_operator(const Json& j, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
    const RadialGrid grid = parse_grid(j.contains("grid") ? j["grid"] : Json(), join(path, "grid"));
    const int m = integer_or(j, "channels", 1, path);
    if (m < 1 || m > 8) fail(join(path, "channels"), "must lie in [1, 8]");
    EffectiveOperator op;
    op.grid = grid;
    op.m = m;
    if (j.contains("separable")) {
        const Json& arr = j["separable"];
        const std::string sp = join(path, "separable");
        if (!arr.is_array() || arr.empty()) fail(sp, "expected a nonempty array of profiles");
        const int n = grid.size();
        MatC G = MatC::Zero(n * m, arr.size());
        for (std::size_t t = 0; t < arr.size(); ++t) {
            const std::string p = sp + "[" + std::to_string(t) + "]";
            const int power = integer_or(arr[t], "power", 1, p);
            const double width = number_or(arr[t], "width", 1.0, p);
            const int ch = integer_or(arr[t], "channel", 0, p);
            if (power < 1) fail(join(p, "power"), "must be >= 1");
            if (!(width > 0.0)) fail(join(p, "width"), "must be > 0");
            if (ch < 0 || ch >= m) fail(join(p, "channel"), "out of range");
            VecC g = VecC::Zero(n * m), helper = VecC::Zero(n * m);
            for (int i = 0; i < n; ++i) {
                const double r = grid.r()[i], e = std::exp(-(r / width) * (r / width));
                g[ch * n + i] = std::pow(r, power) * e;
                helper[ch * n + i] = r * e;
            }
            if (arr[t].value("orthogonal_to_r", false)) {
                if (power == 1) fail(join(p, "power"), "orthogonal_to_r needs power >= 2");
                g = orthogonalize_to_r(grid, g, helper);
            }
            G.col(t) = g;
        }
        EffectiveOperator sep = separable_operator(grid, G, m);
        op.profiles = sep.profiles;
        op.coupling = sep.coupling;
    }
    if (j.contains("local")) op.W = parse_local_terms(j["local"], grid, m, join(path, "local"));
    if (j.contains("U1")) op.U1 = parse_local_terms(j["U1"], grid, m, join(path, "U1"));
    const std::string dc = text_or(j, "decay_class", "fast", path);
    if (dc == "fast")
        op.decay = DecayClass::Fast;
    else if (dc == "coulomb_attractive")
        op.decay = DecayClass::CoulombAttractive;
    else if (dc == "coulomb_repulsive")
        op.decay = DecayClass::CoulombRepulsive;
    else if (dc == "critical")
        op.decay = DecayClass::Critical;
    else
        fail(join(path, "decay_class"), "unknown decay class '" + dc + "'");
    op.rho0 = number_or(j, "rho0", 3.0, path);
    if (j.contains("eigen_decay_t")) op.eigen_decay_t = number(j, "eigen_decay_t", path);
    if (j.contains("coupling")) {
        const Json& c = j["coupling"];
        if (c.is_string() && c.get<std::string>() == "critical")
            op = scaled(op, critical_coupling(op));
        else if (c.is_number())
            op = scaled(op, c.get<double>());
        else
            fail(join(path, "coupling"), "expected a number or \"critical\"");
    }
    op.validate();
    return op;
}

ParticleSystem parse_system(const Json& j, const std::string& path) {
    ParticleSystem s;
    s.masses = numbers(j, "masses", path);
    s.charges = numbers(j, "charges", path);
    s.dim = integer_or(j, "dim", 3, path);
    if (j.contains("nuclei")) {
        const Json& arr = j["nuclei"];
        const std::string np = join(path, "nuclei");
        if (!arr.is_array()) fail(np, "expected an array");
        std::vector<Nucleus> nuc;
        for (std::size_t k = 0; k < arr.size(); ++k) {
            const std::string p = np + "[" + std::to_string(k) + "]";
            const std::vector<double> pos = numbers(arr[k], "position", p);
            Nucleus n;
            n.position = Eigen::Map<const VecR>(pos.data(), pos.size());
            n.charge = number(arr[k], "charge", p);
            nuc.push_back(n);
        }
        s.nuclei = nuc;
    }
    try {
        s.validate();
    } catch (const ValidationError& e) {
        fail(path, e.what());
    }
    return s;
}

namespace {

std::vector<int> int_list(const Json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array of particle indices");
    std::vector<int> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number_integer()) fail(path + "[" + std::to_string(i) + "]", "expected an integer");
        out.push_back(j[i].get<int>());
    }
    return out;
}

std::vector<OrbitalTerm> parse_orbital(const Json& j, const std::string& path) {
    std::vector<OrbitalTerm> out;
    if (!j.is_array() || j.empty()) fail(path, "expected a nonempty array of orbital terms");
    for (std::size_t t = 0; t < j.size(); ++t) {
        const std::string p = path + "[" + std::to_string(t) + "]";
        OrbitalTerm o;
        o.n = integer_or(j[t], "n", 1, p);
        o.l = integer_or(j[t], "l", 0, p);
        o.m = integer_or(j[t], "m", 0, p);
        o.coefficient = number_or(j[t], "c", 1.0, p);
        if (o.l < 0 || std::abs(o.m) > o.l) fail(p, "need l >= 0 and |m| <= l");
        out.push_back(o);
    }
    return out;
}

}  // namespace

BoundState parse_bound_state(const Json& j, const std::string& path, const std::filesystem::path& base) {
    BoundState s;
    const std::string type = text_or(j, "type", "point", path);
    if (j.contains("particles")) s.particles = int_list(j["particles"], join(path, "particles"));
    if (type == "point") {
        s.kind = BoundState::Kind::Point;
    } else if (type == "hydrogenic") {
        s.kind = BoundState::Kind::Hydrogenic;
        s.bohr_radius = number_or(j, "bohr_radius", 1.0, path);
        s.orbital = parse_orbital(require(j, "orbital", path), join(path, "orbital"));
        for (const auto& o : s.orbital)
            if (o.l >= o.n) fail(join(path, "orbital"), "hydrogenic terms need l < n");
    } else if (type == "tabulated") {
        s.kind = BoundState::Kind::Tabulated;
        s.orbital = parse_orbital(require(j, "orbital", path), join(path, "orbital"));
        if (j.contains("table")) {
            const std::filesystem::path file = base / require(j, "table", path).get<std::string>();
            std::ifstream in(file);
            if (!in) fail(join(path, "table"), "cannot open " + file.string());
            std::string line;
            s.table_R.assign(s.orbital.size(), {});
            while (std::getline(in, line)) {
                if (line.empty() || line[0] == '#' || std::isalpha(static_cast<unsigned char>(line[0]))) continue;
                std::replace(line.begin(), line.end(), ',', ' ');
                std::istringstream ls(line);
                double r;
                ls >> r;
                s.table_r.push_back(r);
                for (auto& col : s.table_R) {
                    double v;
                    if (!(ls >> v)) fail(join(path, "table"), "row has fewer columns than orbital terms");
                    col.push_back(v);
                }
            }
        } else {
            s.table_r = numbers(j, "r", path);
            const Json& R = require(j, "R", path);
            if (!R.is_array()) fail(join(path, "R"), "expected an array of columns");
            for (std::size_t c = 0; c < R.size(); ++c) {
                const std::string cp = join(path, "R") + "[" + std::to_string(c) + "]";
                if (!R[c].is_array()) fail(cp, "expected an array of numbers");
                std::vector<double> col;
                for (const auto& v : R[c]) {
                    if (!v.is_number()) fail(cp, "expected an array of numbers");
                    col.push_back(v.get<double>());
                }
                s.table_R.push_back(col);
            }
        }
    } else if (type == "moments") {
        s.kind = BoundState::Kind::Moments;
        const std::vector<double> d = numbers(j, "dipole", path);
        if (d.size() != 3) fail(join(path, "dipole"), "expected three components");
        s.dipole = Eigen::Vector3d(d[0], d[1], d[2]);
    } else {
        fail(join(path, "type"), "unknown bound-state type '" + type + "' (point, hydrogenic, tabulated, moments)");
    }
    return s;
}

std::vector<ChannelSpec> parse_channels(const Json& j, const std::string& path, const std::filesystem::path& base) {
    if (!j.is_array()) fail(path, "expected an array of channels");
    std::vector<ChannelSpec> out;
    for (std::size_t k = 0; k < j.size(); ++k) {
        const std::string p = path + "[" + std::to_string(k) + "]";
        ChannelSpec ch;
        const Json& cl = require(j[k], "clusters", p);
        if (!cl.is_array() || cl.size() != 2) fail(join(p, "clusters"), "expected exactly two clusters");
        ch.cluster1 = int_list(cl[0], join(p, "clusters") + "[0]");
        ch.cluster2 = int_list(cl[1], join(p, "clusters") + "[1]");
        ch.lambda0 = number(j[k], "lambda0", p);
        const Json& bs = require(j[k], "bound_state", p);
        for (int c = 0; c < 2; ++c) {
            const std::string key = c == 0 ? "cluster1" : "cluster2";
            auto& states = c == 0 ? ch.states1 : ch.states2;
            const auto& members = c == 0 ? ch.cluster1 : ch.cluster2;
            const std::string bp = join(join(p, "bound_state"), key);
            if (!bs.contains(key)) {
                BoundState pt;
                pt.particles = members;
                states.push_back(pt);
                continue;
            }
            const Json& arr = bs[key];
            const Json list = arr.is_array() ? arr : Json::array({arr});
            for (std::size_t s = 0; s < list.size(); ++s) {
                BoundState st = parse_bound_state(list[s], bp + "[" + std::to_string(s) + "]", base);
                if (st.particles.empty()) st.particles = members;
                states.push_back(st);
            }
        }
        out.push_back(ch);
    }
    return out;
}

AngularOperator parse_angular(const Json& j, const std::string& path) {
    const int n = integer_or(j, "n", 3, path);
    const int m = integer_or(j, "m", 1, path);
    if (m < 1) fail(join(path, "m"), "must be >= 1");
    if (n < 2) fail(join(path, "n"), "must be >= 2");
    if (!j.contains("q")) return AngularOperator::free(n, m);
    const Json& q = j["q"];
    const std::string qp = join(path, "q");
    if (q.contains("constant")) {
        MatR c = matrix(q["constant"], join(qp, "constant"));
        if (c.rows() != m || c.cols() != m) fail(join(qp, "constant"), "must be m x m");
        return AngularOperator::constant(n, c.cast<cdouble>());
    }
    AngularOperator op;
    op.n = n;
    op.m = m;
    op.L = integer(q, "L", qp);
    const Json& coeffs = require(q, "coefficients", qp);
    if (!coeffs.is_array() || static_cast<int>(coeffs.size()) != (op.L + 1) * (op.L + 1))
        fail(join(qp, "coefficients"), "expected (L+1)^2 matrices");
    for (std::size_t c = 0; c < coeffs.size(); ++c) {
        MatR M = matrix(coeffs[c], join(qp, "coefficients") + "[" + std::to_string(c) + "]");
        if (M.rows() != m || M.cols() != m) fail(join(qp, "coefficients"), "matrices must be m x m");
        op.coeffs.push_back(M.cast<cdouble>());
    }
    try {
        op.validate();
    } catch (const ValidationError& e) {
        fail(path, e.what());
    }
    return op;
}

}  // namespace thr::config
