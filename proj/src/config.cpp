#include "qigl/config.hpp"

#include "qigl/imaging.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace qigl {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t");
    return s.substr(begin, end - begin + 1);
}

bool parse_bool(const std::string& value, bool& out) {
    if (value == "true" || value == "on" || value == "1") {
        out = true;
        return true;
    }
    if (value == "false" || value == "off" || value == "0") {
        out = false;
        return true;
    }
    return false;
}

template <typename T>
bool parse_number(const std::string& value, T& out) {
    const char* first = value.data();
    const char* last = value.data() + value.size();
    auto result = std::from_chars(first, last, out);
    return result.ec == std::errc() && result.ptr == last;
}

// from_chars for double handles "1e-8" etc.; strtod would accept trailing junk.
bool parse_number(const std::string& value, double& out) {
    const char* first = value.data();
    const char* last = value.data() + value.size();
    auto result = std::from_chars(first, last, out);
    return result.ec == std::errc() && result.ptr == last;
}

using Setter = std::function<bool(RunConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"dataset", [](RunConfig& c, const std::string& v) { c.dataset = v; return true; }},
        {"synth_kind",
         [](RunConfig& c, const std::string& v) {
             parse_synth_kind(v);  // throws on bad kind
             c.synth_kind = v;
             return true;
         }},
        {"synth_n", [](RunConfig& c, const std::string& v) { return parse_number(v, c.synth_n); }},
        {"synth_size", [](RunConfig& c, const std::string& v) { return parse_number(v, c.synth_size); }},
        {"synth_jitter", [](RunConfig& c, const std::string& v) { return parse_number(v, c.synth_jitter); }},
        {"exclude", [](RunConfig& c, const std::string& v) { c.exclude = v; return true; }},
        {"out", [](RunConfig& c, const std::string& v) { c.out = v; return true; }},
        {"checkpoint_every", [](RunConfig& c, const std::string& v) { return parse_number(v, c.checkpoint_every); }},
        {"emit_images", [](RunConfig& c, const std::string& v) { return parse_number(v, c.emit_images); }},
        {"sub_generators", [](RunConfig& c, const std::string& v) { return parse_number(v, c.sub_generators); }},
        {"qubits", [](RunConfig& c, const std::string& v) { return parse_number(v, c.qubits); }},
        {"layers", [](RunConfig& c, const std::string& v) { return parse_number(v, c.layers); }},
        {"pca_components", [](RunConfig& c, const std::string& v) { return parse_number(v, c.pca_components); }},
        {"variance_eta", [](RunConfig& c, const std::string& v) { return parse_number(v, c.variance_eta); }},
        {"epochs", [](RunConfig& c, const std::string& v) { return parse_number(v, c.epochs); }},
        {"batch_size", [](RunConfig& c, const std::string& v) { return parse_number(v, c.batch_size); }},
        {"lr_generator", [](RunConfig& c, const std::string& v) { return parse_number(v, c.lr_generator); }},
        {"lr_critic", [](RunConfig& c, const std::string& v) { return parse_number(v, c.lr_critic); }},
        {"adam_beta1", [](RunConfig& c, const std::string& v) { return parse_number(v, c.adam_beta1); }},
        {"adam_beta2", [](RunConfig& c, const std::string& v) { return parse_number(v, c.adam_beta2); }},
        {"adam_eps", [](RunConfig& c, const std::string& v) { return parse_number(v, c.adam_eps); }},
        {"clip_c", [](RunConfig& c, const std::string& v) { return parse_number(v, c.clip_c); }},
        {"critic_steps", [](RunConfig& c, const std::string& v) { return parse_number(v, c.critic_steps); }},
        {"loss",
         [](RunConfig& c, const std::string& v) {
             if (v != "wasserstein" && v != "bce") return false;
             c.loss = v;
             return true;
         }},
        {"assignment",
         [](RunConfig& c, const std::string& v) {
             if (v != "balanced" && v != "conventional") return false;
             c.assignment = v;
             return true;
         }},
        {"he", [](RunConfig& c, const std::string& v) { return parse_bool(v, c.he); }},
        {"seed", [](RunConfig& c, const std::string& v) { return parse_number(v, c.seed); }},
        {"eval_samples", [](RunConfig& c, const std::string& v) { return parse_number(v, c.eval_samples); }},
        {"log_timing", [](RunConfig& c, const std::string& v) { return parse_bool(v, c.log_timing); }},
    };
    return table;
}

}  // namespace

TrainConfig RunConfig::train_config() const {
    TrainConfig t;
    t.epochs = epochs;
    t.batch_size = batch_size;
    t.lr_generator = lr_generator;
    t.lr_critic = lr_critic;
    t.adam_beta1 = adam_beta1;
    t.adam_beta2 = adam_beta2;
    t.adam_eps = adam_eps;
    t.clip_c = clip_c;
    t.critic_steps_per_gen_step = critic_steps;
    t.loss_mode = loss_mode();
    t.assignment_mode = assignment_mode();
    t.he_enabled = he;
    t.seed = seed;
    return t;
}

LossMode RunConfig::loss_mode() const {
    return loss == "bce" ? LossMode::Bce : LossMode::Wasserstein;
}

AssignmentMode RunConfig::assignment_mode() const {
    return assignment == "conventional" ? AssignmentMode::Conventional
                                        : AssignmentMode::Balanced;
}

void RunConfig::validate() const {
    train_config().validate();
    if (sub_generators < 1) throw ConfigError("sub_generators must be >= 1");
    if (qubits < 1 || qubits > 24) throw ConfigError("qubits must be in [1, 24]");
    if (layers < 1) throw ConfigError("layers must be >= 1");
    if (pca_components != feature_count()) {
        throw ConfigError("pca_components (" + std::to_string(pca_components) +
                          ") must equal sub_generators * qubits (" +
                          std::to_string(feature_count()) + ")");
    }
    if (!(variance_eta > 0.0 && variance_eta <= 1.0)) {
        throw ConfigError("variance_eta must be in (0, 1]");
    }
    if (dataset.empty()) {
        parse_synth_kind(synth_kind);
        if (synth_n < 2) throw ConfigError("synth_n must be >= 2");
        if (synth_size < 2) throw ConfigError("synth_size must be >= 2");
        if (synth_jitter < 0.0) throw ConfigError("synth_jitter must be >= 0");
    }
    if (checkpoint_every < 1) throw ConfigError("checkpoint_every must be >= 1");
    if (emit_images < 0) throw ConfigError("emit_images must be >= 0");
    if (eval_samples < 2) throw ConfigError("eval_samples must be >= 2");
}

RunConfig parse_config_text(const std::string& text) {
    RunConfig config;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        const auto it = setters().find(key);
        if (it == setters().end()) {
            throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
        bool ok = false;
        try {
            ok = it->second(config, value);
        } catch (const ArgumentError& err) {
            throw ConfigError("line " + std::to_string(line_no) + ": field '" + key + "': " +
                              err.what());
        }
        if (!ok) {
            throw ConfigError("line " + std::to_string(line_no) + ": bad value '" + value +
                              "' for field '" + key + "'");
        }
    }
    try {
        config.validate();
    } catch (const std::exception& err) {
        throw ConfigError(std::string("config validation: ") + err.what());
    }
    return config;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

std::string canonical_config_text(const RunConfig& config) {
    std::ostringstream out;
    out << "dataset = " << config.dataset << "\n";
    out << "synth_kind = " << config.synth_kind << "\n";
    out << "synth_n = " << config.synth_n << "\n";
    out << "synth_size = " << config.synth_size << "\n";
    out << "synth_jitter = " << format_double(config.synth_jitter) << "\n";
    out << "exclude = " << config.exclude << "\n";
    out << "out = " << config.out << "\n";
    out << "checkpoint_every = " << config.checkpoint_every << "\n";
    out << "emit_images = " << config.emit_images << "\n";
    out << "sub_generators = " << config.sub_generators << "\n";
    out << "qubits = " << config.qubits << "\n";
    out << "layers = " << config.layers << "\n";
    out << "pca_components = " << config.pca_components << "\n";
    out << "variance_eta = " << format_double(config.variance_eta) << "\n";
    out << "epochs = " << config.epochs << "\n";
    out << "batch_size = " << config.batch_size << "\n";
    out << "lr_generator = " << format_double(config.lr_generator) << "\n";
    out << "lr_critic = " << format_double(config.lr_critic) << "\n";
    out << "adam_beta1 = " << format_double(config.adam_beta1) << "\n";
    out << "adam_beta2 = " << format_double(config.adam_beta2) << "\n";
    out << "adam_eps = " << format_double(config.adam_eps) << "\n";
    out << "clip_c = " << format_double(config.clip_c) << "\n";
    out << "critic_steps = " << config.critic_steps << "\n";
    out << "loss = " << config.loss << "\n";
    out << "assignment = " << config.assignment << "\n";
    out << "he = " << (config.he ? "true" : "false") << "\n";
    out << "seed = " << config.seed << "\n";
    out << "eval_samples = " << config.eval_samples << "\n";
    out << "log_timing = " << (config.log_timing ? "true" : "false") << "\n";
    return out.str();
}

std::string config_hash(const RunConfig& config) {
    return hex64(fnv1a64(canonical_config_text(config)));
}

}  // namespace qigl
