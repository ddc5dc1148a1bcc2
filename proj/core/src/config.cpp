#include "frame/config.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <variant>

#include "frame/io.hpp"
#include "frame/tensor.hpp"

namespace frame {

namespace {

using Field = std::variant<std::int64_t RunConfig::*, double RunConfig::*, bool RunConfig::*,
                           std::string RunConfig::*>;

const std::map<std::string, Field>& field_table() {
    static const std::map<std::string, Field> table = {
        {"image_size", &RunConfig::image_size},
        {"patch_size", &RunConfig::patch_size},
        {"embed_dim", &RunConfig::embed_dim},
        {"depth", &RunConfig::depth},
        {"heads", &RunConfig::heads},
        {"mlp_ratio", &RunConfig::mlp_ratio},
        {"clip_dim", &RunConfig::clip_dim},
        {"dino_dim", &RunConfig::dino_dim},
        {"spatial_head_depth", &RunConfig::spatial_head_depth},
        {"memory_frames", &RunConfig::memory_frames},
        {"memory_dim", &RunConfig::memory_dim},
        {"spatial_delta", &RunConfig::spatial_delta},
        {"semantic_delta", &RunConfig::semantic_delta},
        {"lambda1", &RunConfig::lambda1},
        {"lambda2", &RunConfig::lambda2},
        {"alpha1", &RunConfig::alpha1},
        {"alpha2", &RunConfig::alpha2},
        {"alpha3", &RunConfig::alpha3},
        {"alpha4", &RunConfig::alpha4},
        {"mean_scaling", &RunConfig::mean_scaling},
        {"scale_decay", &RunConfig::scale_decay},
        {"loss_dropout", &RunConfig::loss_dropout},
        {"grad_balance", &RunConfig::grad_balance},
        {"base_lr", &RunConfig::base_lr},
        {"weight_decay", &RunConfig::weight_decay},
        {"warmup_steps", &RunConfig::warmup_steps},
        {"restart_period", &RunConfig::restart_period},
        {"min_lr", &RunConfig::min_lr},
        {"steps", &RunConfig::steps},
        {"teacher_seed", &RunConfig::teacher_seed},
        {"teacher_depth", &RunConfig::teacher_depth},
        {"teacher_dim", &RunConfig::teacher_dim},
        {"data", &RunConfig::data},
        {"features", &RunConfig::features},
        {"checkpoint", &RunConfig::checkpoint},
        {"out", &RunConfig::out},
        {"topk", &RunConfig::topk},
        {"temperature", &RunConfig::temperature},
        {"context_frames", &RunConfig::context_frames},
        {"locality_radius", &RunConfig::locality_radius},
        {"probe_epochs", &RunConfig::probe_epochs},
        {"probe_lr", &RunConfig::probe_lr},
        {"max_delta", &RunConfig::max_delta},
        {"use_memory", &RunConfig::use_memory},
        {"clips", &RunConfig::clips},
        {"clip_frames", &RunConfig::clip_frames},
        {"max_objects", &RunConfig::max_objects},
        {"seed", &RunConfig::seed},
        {"threads", &RunConfig::threads},
        {"deterministic", &RunConfig::deterministic},
        {"plots", &RunConfig::plots},
        {"precision", &RunConfig::precision},
    };
    return table;
}

std::int64_t parse_i64(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const std::int64_t v = std::stoll(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: " + key + " expects an integer, got '" + value + "'");
    }
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: " + key + " expects a number, got '" + value + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError("config: " + key + " expects true or false, got '" + value + "'");
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

} // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
    const auto& table = field_table();
    auto it = table.find(key);
    if (it == table.end()) throw ConfigError("config: unknown key '" + key + "'");
    std::visit(
        [&](auto member) {
            using M = std::decay_t<decltype(this->*member)>;
            if constexpr (std::is_same_v<M, std::int64_t>) {
                this->*member = parse_i64(key, value);
            } else if constexpr (std::is_same_v<M, double>) {
                this->*member = parse_double(key, value);
            } else if constexpr (std::is_same_v<M, bool>) {
                this->*member = parse_bool(key, value);
            } else {
                this->*member = value;
            }
        },
        it->second);
}

void RunConfig::load_file(const std::filesystem::path& path) {
    std::istringstream is(io::read_text_file(path));
    std::string line;
    std::int64_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config: " + path.string() + ":" + std::to_string(lineno) +
                              ": expected key=value");
        }
        set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
}

void RunConfig::validate() const {
    if (precision != "f32" && precision != "f64") {
        throw ConfigError("config: precision must be f32 or f64, got '" + precision + "'");
    }
    if (loss_dropout) throw ConfigError("config: loss_dropout is not supported");
    if (grad_balance) throw ConfigError("config: grad_balance is not supported");
    if (memory_frames < 0) throw ConfigError("config: memory_frames must be >= 0");
    if (threads < 1) throw ConfigError("config: threads must be >= 1");
    if (steps < 1) throw ConfigError("config: steps must be >= 1");
    if (clips < 1 || clip_frames < 1) throw ConfigError("config: clips and clip_frames must be >= 1");
    if (spatial_delta < 0 || semantic_delta < 0) throw ConfigError("config: deltas must be >= 0");
}

std::string RunConfig::echo() const {
    std::ostringstream os;
    for (const auto& [key, field] : field_table()) {
        os << key << '=';
        std::visit(
            [&](auto member) {
                using M = std::decay_t<decltype(this->*member)>;
                if constexpr (std::is_same_v<M, std::int64_t>) {
                    os << this->*member;
                } else if constexpr (std::is_same_v<M, double>) {
                    os << io::format_real(this->*member);
                } else if constexpr (std::is_same_v<M, bool>) {
                    os << (this->*member ? "true" : "false");
                } else {
                    os << this->*member;
                }
            },
            field);
        os << '\n';
    }
    return os.str();
}

} // namespace frame
