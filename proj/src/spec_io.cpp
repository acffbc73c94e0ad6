#include "msq/spec_io.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "msq/error.hpp"

namespace msq {
namespace {

using Json = nlohmann::ordered_json;

// Accepts a JSON number, a decimal string, or an exact fraction string "n/d".
double parse_number(const Json& v, const std::string& where) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        const auto slash = s.find('/');
        const char* text = s.c_str();
        char* end = nullptr;
        const double num = std::strtod(text, &end);
        if (slash == std::string::npos) {
            if (end != text + s.size() || s.empty()) {
                fail(ErrorCode::ParseError, where + ": cannot parse number '" + s + "'");
            }
            return num;
        }
        if (end != text + slash) {
            fail(ErrorCode::ParseError, where + ": cannot parse fraction '" + s + "'");
        }
        const char* dtext = text + slash + 1;
        const double den = std::strtod(dtext, &end);
        if (end != text + s.size() || den == 0.0) {
            fail(ErrorCode::ParseError, where + ": cannot parse fraction '" + s + "'");
        }
        return num / den;
    }
    fail(ErrorCode::ParseError, where + ": expected a number or fraction string");
}

const Json& require(const Json& obj, const char* key, const std::string& where) {
    const auto it = obj.find(key);
    if (it == obj.end()) {
        fail(ErrorCode::ParseError, where + ": missing required key '" + key + "'");
    }
    return *it;
}

}  // namespace

JobType parse_job_spec(const std::string& text, const std::string& origin) {
    Json root;
    try {
        root = Json::parse(text);
    } catch (const std::exception& e) {
        fail(ErrorCode::ParseError, origin + ": " + e.what());
    }
    if (!root.is_object()) fail(ErrorCode::ParseError, origin + ": top level must be an object");

    JobDesc desc;
    desc.name = require(root, "name", origin).get<std::string>();
    desc.initial = require(root, "initial", origin).get<std::string>();

    const Json& stages = require(root, "stages", origin);
    if (!stages.is_object()) fail(ErrorCode::ParseError, origin + ": 'stages' must be an object");
    for (const auto& [stage_name, body] : stages.items()) {
        const std::string where = origin + ", stage '" + stage_name + "'";
        if (!body.is_object()) fail(ErrorCode::ParseError, where + ": must be an object");

        StageDesc sd;
        sd.name = stage_name;
        const bool has_pmf = body.contains("pmf");
        const bool is_zero = body.contains("zero") && body["zero"].get<bool>();
        if (has_pmf == is_zero) {
            fail(ErrorCode::ParseError, where + ": needs exactly one of 'pmf' or 'zero': true");
        }
        if (has_pmf) {
            const Json& pmf = body["pmf"];
            if (!pmf.is_array() || pmf.empty()) {
                fail(ErrorCode::ParseError, where + ": 'pmf' must be a nonempty array");
            }
            std::vector<double> sizes;
            std::vector<double> probs;
            for (const Json& pair : pmf) {
                if (!pair.is_array() || pair.size() != 2) {
                    fail(ErrorCode::ParseError, where + ": pmf entries are [size, probability]");
                }
                sizes.push_back(parse_number(pair[0], where + " pmf size"));
                probs.push_back(parse_number(pair[1], where + " pmf probability"));
            }
            try {
                sd.dist.emplace(std::move(sizes), std::move(probs));
            } catch (const Error& e) {
                fail(e.code(), where + ": " + e.what());
            }
        }

        const Json& transitions = require(body, "transitions", where);
        if (!transitions.is_array() || transitions.empty()) {
            fail(ErrorCode::ParseError, where + ": 'transitions' must be a nonempty array");
        }
        for (const Json& pair : transitions) {
            if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string()) {
                fail(ErrorCode::ParseError, where + ": transitions are [target, probability]");
            }
            sd.transitions.emplace_back(pair[0].get<std::string>(),
                                        parse_number(pair[1], where + " transition probability"));
        }
        desc.stages.push_back(std::move(sd));
    }
    return JobType(desc);
}

JobType load_job_spec(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::ParseError, "cannot open job spec file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_job_spec(buf.str(), path);
}

std::string job_spec_to_json(const JobType& job) {
    const JobDesc desc = job.to_desc();
    Json root;
    root["name"] = desc.name;
    root["initial"] = desc.initial;
    Json stages = Json::object();
    for (const StageDesc& sd : desc.stages) {
        Json body;
        if (!sd.dist) {
            body["zero"] = true;
        } else {
            Json pmf = Json::array();
            for (std::size_t i = 0; i < sd.dist->support_size(); ++i) {
                pmf.push_back(Json::array({sd.dist->sizes()[i], sd.dist->probs()[i]}));
            }
            body["pmf"] = std::move(pmf);
        }
        Json transitions = Json::array();
        for (const auto& [target, prob] : sd.transitions) {
            transitions.push_back(Json::array({target, prob}));
        }
        body["transitions"] = std::move(transitions);
        stages[sd.name] = std::move(body);
    }
    root["stages"] = std::move(stages);
    return root.dump(2) + "\n";
}

void write_job_spec(const JobType& job, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::ParseError, "cannot open output file '" + path + "'");
    out << job_spec_to_json(job);
    if (!out) fail(ErrorCode::ParseError, "failed writing '" + path + "'");
}

}  // namespace msq
