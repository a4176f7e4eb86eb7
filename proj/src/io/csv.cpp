#include "vbakf/error.hpp"
#include "vbakf/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#ifndef VBAKF_VERSION
#define VBAKF_VERSION "unknown"
#endif

namespace vbakf::io {

namespace {

std::vector<std::string> vector_columns(const std::string& name, std::size_t d) {
    if (d == 1) return {name};
    std::vector<std::string> out;
    for (std::size_t i = 0; i < d; ++i) out.push_back(name + "_" + std::to_string(i));
    return out;
}

std::vector<std::string> matrix_columns(const std::string& name, std::size_t rows, std::size_t cols) {
    if (rows == 1 && cols == 1) return {name};
    std::vector<std::string> out;
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) out.push_back(name + "_" + std::to_string(r) + "_" + std::to_string(c));
    }
    return out;
}

// Accumulates one CSV document row by row.
class CsvWriter {
public:
    explicit CsvWriter(const Provenance& p) { out_ = provenance_line(p); }

    void header(const std::vector<std::vector<std::string>>& groups) {
        for (const auto& group : groups) {
            for (const auto& name : group) field(name);
        }
        end_row();
    }

    void field(std::string_view text) {
        if (!first_) out_ += ',';
        out_ += text;
        first_ = false;
    }
    void field(double v) { field(std::string_view(format_double(v))); }
    void field(std::size_t v) { field(std::string_view(std::to_string(v))); }
    void empty_fields(std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) field(std::string_view());
    }
    void fields(std::span<const double> values) {
        for (double v : values) field(v);
    }
    void optional_fields(const std::optional<Vector>& v, std::size_t n) {
        if (v) {
            fields(v->values());
        } else {
            empty_fields(n);
        }
    }
    void end_row() {
        out_ += '\n';
        first_ = true;
    }

    std::string take() { return std::move(out_); }

private:
    std::string out_;
    bool first_ = true;
};

std::vector<std::string> split(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.emplace_back(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::size_t parse_index(std::string_view text, const char* what) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
        throw IoError(std::string("malformed ") + what + " '" + std::string(text) + "'");
    }
    return v;
}

} // namespace

std::string format_double(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) throw IoError("format_double: buffer too small");
    return {buf, ptr};
}

double parse_double(std::string_view text) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
        throw IoError("malformed number '" + std::string(text) + "'");
    }
    return v;
}

std::string provenance_line(const Provenance& p) {
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(p.config_hash));
    return "# vbakf " VBAKF_VERSION " preset=" + p.preset + " seed=" + std::to_string(p.seed) + " config=" + hash +
           "\n";
}

std::string series_csv(const std::vector<RunResult>& results, std::size_t d_x, std::size_t d_y, const Provenance& p) {
    CsvWriter w(p);
    w.header({{"sweep_value", "rep", "k"},
              vector_columns("x_true", d_x),
              vector_columns("xhat_vb", d_x),
              matrix_columns("p_vb", d_x, d_x),
              vector_columns("xhat_oracle", d_x),
              vector_columns("xhat_static", d_x),
              matrix_columns("eq_plugin", d_x, d_x),
              matrix_columns("er_plugin", d_y, d_y),
              {"dropout_est", "corruption_est"}});
    for (const RunResult& run : results) {
        for (const StepRecord& r : run.records) {
            if (run.sweep_value) {
                w.field(*run.sweep_value);
            } else {
                w.empty_fields(1);
            }
            w.field(run.rep);
            w.field(r.k);
            w.fields(r.x_true.values());
            w.fields(r.xhat_vb.values());
            w.fields(r.p_vb.values());
            w.optional_fields(r.xhat_oracle, d_x);
            w.optional_fields(r.xhat_static, d_x);
            w.fields(r.eq_plugin.values());
            w.fields(r.er_plugin.values());
            w.field(r.dropout_est);
            w.field(r.corruption_est);
            w.end_row();
        }
    }
    return w.take();
}

std::string summary_csv(const SummaryTable& table, const Provenance& p) {
    CsvWriter w(p);
    w.header({{"sweep_value", "metric", "mean", "sd", "p10", "p90"}});
    for (const SummaryRow& row : table) {
        if (row.sweep_value) {
            w.field(*row.sweep_value);
        } else {
            w.empty_fields(1);
        }
        w.field(std::string_view(row.metric));
        w.field(row.mean);
        w.field(row.sd);
        w.field(row.p10);
        w.field(row.p90);
        w.end_row();
    }
    return w.take();
}

std::string summary_markdown(const SummaryTable& table, std::string_view name, const Provenance& p) {
    std::string out = "<!-- " + provenance_line(p).substr(2);
    out.back() = ' ';
    out += "-->\n\n## " + std::string(name) + "\n\n";
    out += "| sweep_value | metric | mean | sd | p10 | p90 |\n";
    out += "|---:|:---|---:|---:|---:|---:|\n";
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.4g", v);
        return std::string(buf);
    };
    for (const SummaryRow& row : table) {
        out += "| " + (row.sweep_value ? format_double(*row.sweep_value) : std::string("-")) + " | " + row.metric +
               " | " + num(row.mean) + " | " + num(row.sd) + " | " + num(row.p10) + " | " + num(row.p90) + " |\n";
    }
    return out;
}

std::string dataset_csv(const SensorDataset& dataset, const Provenance& p) {
    const ObservationSet& obs = dataset.observations();
    CsvWriter w(p);
    w.header({{"k", "sensor_id", "gamma"}, vector_columns("y", obs.d_y())});
    for (std::size_t k = 0; k < obs.horizon(); ++k) {
        for (std::size_t i = 0; i < obs.n_sensors(); ++i) {
            w.field(k);
            w.field(i);
            w.field(std::string_view(obs.received(k, i) ? "1" : "0"));
            w.optional_fields(obs.y(k, i), obs.d_y());
            w.end_row();
        }
    }
    return w.take();
}

std::string truth_csv(const SensorDataset& dataset, const Provenance& p) {
    CsvWriter w(p);
    w.header({{"k"}, vector_columns("x", dataset.config().d_x)});
    for (std::size_t k = 0; k < dataset.x_true().size(); ++k) {
        w.field(k);
        w.fields(dataset.x_true()[k].values());
        w.end_row();
    }
    return w.take();
}

std::string labels_csv(const SensorDataset& dataset, const Provenance& p) {
    const std::size_t n = dataset.config().n_sensors;
    CsvWriter w(p);
    w.header({{"k", "sensor_id", "clean"}});
    for (std::size_t k = 0; k < dataset.config().horizon; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            w.field(k);
            w.field(i);
            w.field(static_cast<std::size_t>(dataset.evaluation_clean_mask()[k * n + i]));
            w.end_row();
        }
    }
    return w.take();
}

std::string filter_csv(const std::vector<VbPosterior>& posteriors, const Provenance& p) {
    const std::size_t d_x = posteriors.empty() ? 1 : posteriors.front().belief.dim();
    const std::size_t d_y = posteriors.empty() ? 1 : posteriors.front().r_post.dim();
    CsvWriter w(p);
    w.header({{"k"},
              vector_columns("xhat_vb", d_x),
              matrix_columns("p_vb", d_x, d_x),
              matrix_columns("eq_plugin", d_x, d_x),
              matrix_columns("er_plugin", d_y, d_y),
              {"dropout_est", "corruption_est"}});
    for (std::size_t k = 0; k < posteriors.size(); ++k) {
        const VbPosterior& post = posteriors[k];
        w.field(k);
        w.fields(post.belief.mean.values());
        w.fields(post.belief.cov.values());
        w.fields(iw_mean(post.q_post).values());
        w.fields(iw_mean(post.r_post).values());
        w.field(post.dropout_rate_est);
        w.field(post.corruption_rate_est);
        w.end_row();
    }
    return w.take();
}

std::size_t CsvTable::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    throw IoError("csv: missing column '" + std::string(name) + "'");
}

CsvTable parse_csv(std::string_view text) {
    CsvTable table;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (table.header.empty() && table.rows.empty() && !line.empty() && line.front() == '#') {
            table.comments.emplace_back(line.substr(1));
            continue;
        }
        if (line.empty()) continue;
        if (table.header.empty()) {
            table.header = split(line);
            continue;
        }
        table.rows.push_back(split(line));
        if (table.rows.back().size() != table.header.size()) {
            throw IoError("csv line " + std::to_string(line_no) + ": expected " + std::to_string(table.header.size()) +
                          " fields, got " + std::to_string(table.rows.back().size()));
        }
    }
    if (table.header.empty()) throw IoError("csv: no header row");
    return table;
}

ObservationSet parse_dataset_csv(std::string_view text, const ScenarioConfig& config) {
    const CsvTable table = parse_csv(text);
    const std::size_t col_k = table.column("k");
    const std::size_t col_sensor = table.column("sensor_id");
    const std::size_t col_gamma = table.column("gamma");
    std::vector<std::size_t> col_y;
    for (const auto& name : vector_columns("y", config.d_y)) col_y.push_back(table.column(name));

    ObservationSet obs(config.n_sensors, config.horizon, config.d_y);
    std::vector<std::uint8_t> seen(config.n_sensors * config.horizon, 0);
    for (const auto& row : table.rows) {
        const std::size_t k = parse_index(row[col_k], "time index");
        const std::size_t i = parse_index(row[col_sensor], "sensor index");
        if (k >= config.horizon || i >= config.n_sensors) {
            throw IoError("dataset row (k=" + std::to_string(k) + ", sensor=" + std::to_string(i) +
                          ") is outside the scenario");
        }
        if (seen[k * config.n_sensors + i]++) {
            throw IoError("dataset row (k=" + std::to_string(k) + ", sensor=" + std::to_string(i) + ") repeats");
        }
        const std::string& gamma = row[col_gamma];
        if (gamma != "0" && gamma != "1") throw IoError("gamma must be 0 or 1, got '" + gamma + "'");
        std::size_t present = 0;
        for (std::size_t c : col_y) present += row[c].empty() ? 0 : 1;
        if (present != (gamma == "1" ? col_y.size() : 0)) {
            throw IoError("dataset row (k=" + std::to_string(k) + ", sensor=" + std::to_string(i) +
                          "): y fields must be present exactly when gamma = 1");
        }
        if (gamma == "0") continue;
        Vector y(config.d_y);
        for (std::size_t j = 0; j < col_y.size(); ++j) y[j] = parse_double(row[col_y[j]]);
        obs.set(k, i, std::move(y));
    }
    return obs;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("error reading '" + path.string() + "'");
    return buf.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            out.close();
            std::error_code ignored;
            std::filesystem::remove(tmp, ignored);
            throw IoError("error writing '" + tmp.string() + "'");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::error_code ignored;
        std::filesystem::remove(tmp, ignored);
        throw IoError("cannot move '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
    }
}

} // namespace vbakf::io
