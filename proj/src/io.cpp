#include "gt/io.hpp"

#include <fstream>

namespace gt {

namespace {

using nlohmann::json;

// Narrow the library's parse exceptions to the validation category so the CLI
// exit-code map stays honest.
template <typename F>
auto guarded(const char* what, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const json::exception& e) {
        throw validation_error(std::string(what) + ": " + e.what());
    }
}

} // namespace

nlohmann::json matrix_json(const Mat& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols(); ++j)
            row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Mat matrix_from_json(const nlohmann::json& j) {
    return guarded("matrix", [&] {
        if (!j.is_array() || j.empty())
            throw validation_error("matrix must be a non-empty array of rows");
        const std::size_t cols = j.at(0).size();
        if (cols == 0)
            throw validation_error("matrix rows must be non-empty");
        Mat m(j.size(), cols);
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (j.at(i).size() != cols)
                throw validation_error("matrix rows have inconsistent lengths");
            for (std::size_t c = 0; c < cols; ++c)
                m(static_cast<int>(i), static_cast<int>(c)) = j.at(i).at(c).get<double>();
        }
        require_finite(m, "matrix");
        return m;
    });
}

nlohmann::json config_json(const CameraConfig& cfg) {
    json j;
    j["n"] = cfg.n;
    j["m"] = cfg.m;
    json cams = json::array();
    for (const Mat& c : cfg.cameras)
        cams.push_back(matrix_json(c));
    j["cameras"] = std::move(cams);
    return j;
}

CameraConfig config_from_json(const nlohmann::json& j) {
    return guarded("config", [&] {
        CameraConfig cfg;
        cfg.n = j.at("n").get<int>();
        cfg.m = j.at("m").get<std::vector<int>>();
        for (const auto& c : j.at("cameras"))
            cfg.cameras.push_back(matrix_from_json(c));
        validate_shape(cfg);
        return cfg;
    });
}

nlohmann::json profile_json(const Profile& p) {
    json j;
    j["n"] = p.n;
    j["m"] = p.m;
    j["alpha"] = p.alpha;
    return j;
}

Profile profile_from_json(const nlohmann::json& j) {
    return guarded("profile", [&] {
        Profile p;
        p.n = j.at("n").get<int>();
        p.m = j.at("m").get<std::vector<int>>();
        p.alpha = j.at("alpha").get<std::vector<int>>();
        validate(p);
        return p;
    });
}

nlohmann::json tensor_json(const GrassmannTensor& t) {
    json j;
    j["profile"] = profile_json(t.profile);
    json entries = json::array();
    for (int i = 0; i < t.entries.size(); ++i)
        entries.push_back(t.entries(i));
    j["entries"] = std::move(entries);
    return j;
}

GrassmannTensor tensor_from_json(const nlohmann::json& j) {
    return guarded("tensor", [&] {
        GrassmannTensor t;
        t.profile = profile_from_json(j.at("profile"));
        const auto values = j.at("entries").get<std::vector<double>>();
        const long long expect = make_layout(t.profile).size();
        if (static_cast<long long>(values.size()) != expect)
            throw validation_error("tensor has " + std::to_string(values.size()) +
                                   " entries, profile needs " + std::to_string(expect));
        t.entries = Eigen::Map<const Vec>(values.data(), values.size());
        require_finite(t.entries, "tensor entries");
        return t;
    });
}

nlohmann::json correspondences_json(const CorrespondenceSet& cs) {
    json j;
    j["profile"] = profile_json(cs.profile);
    json tuples = json::array();
    for (const auto& t : cs.tuples) {
        json forms = json::array();
        for (const Mat& f : t.forms)
            forms.push_back(matrix_json(f));
        tuples.push_back(json{{"forms", std::move(forms)}});
    }
    j["tuples"] = std::move(tuples);
    return j;
}

CorrespondenceSet correspondences_from_json(const nlohmann::json& j) {
    return guarded("correspondences", [&] {
        CorrespondenceSet cs;
        cs.profile = profile_from_json(j.at("profile"));
        for (const auto& t : j.at("tuples")) {
            CodimSubspaceTuple tuple;
            for (const auto& f : t.at("forms"))
                tuple.forms.push_back(matrix_from_json(f));
            cs.tuples.push_back(std::move(tuple));
        }
        validate(cs);
        return cs;
    });
}

nlohmann::json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw validation_error("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw validation_error(path + ": " + e.what());
    }
}

void save_json(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out)
        throw validation_error("cannot write " + path);
    out << j.dump(2) << '\n';
    if (!out)
        throw validation_error("write failed for " + path);
}

} // namespace gt
