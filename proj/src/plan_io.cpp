#include "seqprop/plan_io.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace seqprop {

using json = nlohmann::ordered_json;

std::string tool_id() { return "seqprop 0.1.0"; }

std::string serialize_plan(const SamplingPlan& plan, const Provenance& prov) {
    const DesignParams& p = plan.params;
    json doc;
    doc["schema_version"] = 1;
    json jp;
    jp["eps"] = p.eps.text();
    jp["delta"] = p.delta.text();
    jp["rho"] = p.rho;
    jp["zeta"] = p.zeta;
    jp["stages"] = p.stages;
    jp["family"] = rule_family_name(p.family);
    jp["policy"] = schedule_policy_name(p.policy);
    if (!p.explicit_sizes.empty()) jp["explicit_sizes"] = p.explicit_sizes;
    if (p.family == RuleFamily::revised_wald ||
        (p.family == RuleFamily::inclusion && p.inclusion_family == CiTag::revised_wald)) {
        jp["rw_shift"] = p.rw_shift;
    }
    if (p.wald_min_start) jp["wald_min_start"] = true;
    if (p.family == RuleFamily::inclusion) jp["inclusion_family"] = ci_tag_name(p.inclusion_family);
    doc["params"] = jp;
    doc["sizes"] = plan.sizes;
    json cont = json::array();
    for (const auto& stage : plan.cont) {
        json iv = json::array();
        for (const KInterval& k : stage) iv.push_back(json::array({k.lo, k.hi}));
        cont.push_back(iv);
    }
    doc["continuation"] = cont;
    doc["n_min"] = plan.n_min;
    doc["n_max"] = plan.n_max;
    doc["min_clamped"] = plan.min_clamped;
    doc["symmetric"] = plan.symmetric;
    json pv;
    pv["tool"] = prov.tool.empty() ? tool_id() : prov.tool;
    if (prov.tuning) {
        pv["tuning"] = {{"zeta_star", prov.tuning->zeta_star},
                        {"rel_tol", prov.tuning->rel_tol},
                        {"trace_hash", prov.tuning->trace_hash}};
    }
    if (prov.verification) {
        pv["verification"] = {{"verdict", prov.verification->verdict},
                              {"method", prov.verification->method},
                              {"eta", prov.verification->eta},
                              {"note", prov.verification->note}};
    }
    doc["provenance"] = pv;
    return doc.dump(2) + "\n";
}

LoadedPlan parse_plan(const std::string& json_text) {
    json doc = json::parse(json_text);
    if (!doc.contains("schema_version") || doc["schema_version"].get<int>() != 1) {
        throw std::runtime_error("unsupported plan file schema version");
    }
    const json& jp = doc.at("params");
    DesignParams p;
    p.eps = Dec::parse(jp.at("eps").get<std::string>());
    p.delta = Dec::parse(jp.at("delta").get<std::string>());
    p.rho = jp.at("rho").get<double>();
    p.zeta = jp.at("zeta").get<double>();
    p.stages = jp.at("stages").get<int>();
    p.family = rule_family_from_name(jp.at("family").get<std::string>());
    p.policy = schedule_policy_from_name(jp.at("policy").get<std::string>());
    if (jp.contains("explicit_sizes")) p.explicit_sizes = jp["explicit_sizes"].get<std::vector<long>>();
    if (jp.contains("rw_shift")) p.rw_shift = jp["rw_shift"].get<double>();
    if (jp.contains("wald_min_start")) p.wald_min_start = jp["wald_min_start"].get<bool>();
    if (jp.contains("inclusion_family")) {
        p.inclusion_family = ci_tag_from_name(jp["inclusion_family"].get<std::string>());
    }

    std::vector<long> sizes = doc.at("sizes").get<std::vector<long>>();
    std::vector<std::vector<KInterval>> cont;
    for (const json& stage : doc.at("continuation")) {
        std::vector<KInterval> iv;
        for (const json& pair : stage) {
            if (!pair.is_array() || pair.size() != 2) {
                throw std::runtime_error("malformed continuation interval");
            }
            iv.push_back(KInterval{pair[0].get<long>(), pair[1].get<long>()});
        }
        cont.push_back(std::move(iv));
    }

    LoadedPlan out{SamplingPlan::from_parts(std::move(p), std::move(sizes), std::move(cont)), {}};
    if (doc.contains("symmetric") && doc["symmetric"].get<bool>() != out.plan.symmetric) {
        throw std::runtime_error("plan file symmetry flag contradicts its continuation sets");
    }
    if (doc.contains("n_min")) out.plan.n_min = doc["n_min"].get<long>();
    if (doc.contains("n_max")) out.plan.n_max = doc["n_max"].get<long>();
    if (doc.contains("min_clamped")) out.plan.min_clamped = doc["min_clamped"].get<bool>();

    if (doc.contains("provenance")) {
        const json& pv = doc["provenance"];
        if (pv.contains("tool")) out.provenance.tool = pv["tool"].get<std::string>();
        if (pv.contains("tuning")) {
            const json& t = pv["tuning"];
            out.provenance.tuning = TuningRecord{t.at("zeta_star").get<double>(),
                                                 t.at("rel_tol").get<double>(),
                                                 t.at("trace_hash").get<std::uint64_t>()};
        }
        if (pv.contains("verification")) {
            const json& v = pv["verification"];
            VerificationRecord r;
            r.verdict = v.at("verdict").get<std::string>();
            r.method = v.at("method").get<std::string>();
            r.eta = v.at("eta").get<double>();
            if (v.contains("note")) r.note = v["note"].get<std::string>();
            out.provenance.verification = r;
        }
    }
    return out;
}

LoadedPlan load_plan(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open plan file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_plan(buf.str());
}

void save_plan(const std::string& path, const SamplingPlan& plan, const Provenance& prov) {
    std::string body = serialize_plan(plan, prov);
    int fd = ::open(path.c_str(), O_WRONLY | O_CREAT, 0644);
    if (fd < 0) throw std::runtime_error("cannot open plan file for writing: " + path + ": " +
                                         std::strerror(errno));
    if (::flock(fd, LOCK_EX) != 0) {
        ::close(fd);
        throw std::runtime_error("cannot lock plan file: " + path);
    }
    bool ok = ::ftruncate(fd, 0) == 0;
    const char* data = body.data();
    size_t left = body.size();
    while (ok && left > 0) {
        ssize_t w = ::write(fd, data, left);
        if (w < 0) {
            if (errno == EINTR) continue;
            ok = false;
            break;
        }
        data += w;
        left -= static_cast<size_t>(w);
    }
    ::flock(fd, LOCK_UN);
    ::close(fd);
    if (!ok) throw std::runtime_error("failed writing plan file: " + path);
}

}  // namespace seqprop
