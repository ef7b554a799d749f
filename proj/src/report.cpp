#include "ttr/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ttr {

namespace {

const char* const kHeader = "run_id,seed,test_task,episode,phase,instant_regret,cumulative_regret";
const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

template <typename T>
T parse_number(const std::string& s, Index line) {
    std::istringstream is(s);
    T v{};
    if (!(is >> v) || !is.eof()) throw FormatError("trace CSV line " + std::to_string(line) + ": bad number '" + s + "'");
    return v;
}

std::string fmt(double v, int precision = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    return buf;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::vector<TraceSeries> parse_trace_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kHeader) throw FormatError("trace CSV: unexpected header");
    std::vector<TraceSeries> out;
    Index lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto cells = split_row(line);
        if (cells.size() != 7) throw FormatError("trace CSV line " + std::to_string(lineno) + ": expected 7 columns");
        if (out.empty() || out.back().run_id != cells[0]) {
            TraceSeries s;
            s.run_id = cells[0];
            s.seed = parse_number<std::uint64_t>(cells[1], lineno);
            s.test_task = parse_number<Index>(cells[2], lineno);
            out.push_back(std::move(s));
        }
        auto& rows = out.back().trace.rows;
        TraceRow row;
        row.episode = parse_number<Index>(cells[3], lineno);
        if (row.episode != rows.size() + 1)
            throw FormatError("trace CSV line " + std::to_string(lineno) + ": episodes out of order");
        try {
            row.phase = phase_from_name(cells[4]);
        } catch (const std::exception&) {
            throw FormatError("trace CSV line " + std::to_string(lineno) + ": unknown phase '" + cells[4] + "'");
        }
        row.instant_regret = parse_number<double>(cells[5], lineno);
        row.cumulative_regret = parse_number<double>(cells[6], lineno);
        rows.push_back(row);
    }
    return out;
}

std::vector<TraceSeries> read_trace_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_trace_csv(ss.str());
}

ReportGroup summarize_group(const std::string& label, const std::vector<TraceSeries>& series) {
    ReportGroup g;
    g.label = label;
    g.runs = series.size();
    if (series.empty()) return g;
    std::vector<RegretTrace> traces;
    double sum = 0.0, identify = 0.0;
    for (const auto& s : series) {
        traces.push_back(s.trace);
        sum += s.trace.total();
        identify += static_cast<double>(s.trace.count(Phase::identify) + s.trace.count(Phase::truncated));
        if (s.trace.count(Phase::truncated) > 0) ++g.truncated_runs;
    }
    g.curves = aggregate(traces);
    g.horizon = g.curves.mean.size();
    const double k = static_cast<double>(series.size());
    g.mean_regret = sum / k;
    double sq = 0.0;
    for (const auto& s : series) sq += (s.trace.total() - g.mean_regret) * (s.trace.total() - g.mean_regret);
    g.std_regret = std::sqrt(sq / k);
    g.mean_identify_episodes = identify / k;
    return g;
}

std::string markdown_table(const std::vector<ReportGroup>& groups) {
    std::string out = "| trace | runs | H | mean regret | std regret | mean identify episodes | truncated runs |\n"
                      "|---|---:|---:|---:|---:|---:|---:|\n";
    for (const auto& g : groups)
        out += "| " + g.label + " | " + std::to_string(g.runs) + " | " + std::to_string(g.horizon) + " | " +
               fmt(g.mean_regret) + " | " + fmt(g.std_regret) + " | " + fmt(g.mean_identify_episodes, 1) + " | " +
               std::to_string(g.truncated_runs) + " |\n";
    return out;
}

std::string regret_svg(const std::vector<ReportGroup>& groups, int width, int height) {
    const double left = 70, right = 20, top = 30, bottom = 50;
    const double pw = width - left - right, ph = height - top - bottom;
    Index horizon = 1;
    double ymax = 0.0;
    for (const auto& g : groups)
        for (Index h = 0; h < g.curves.mean.size(); ++h) {
            horizon = std::max(horizon, g.curves.mean.size());
            ymax = std::max(ymax, g.curves.mean[h] + g.curves.stddev[h]);
        }
    if (ymax <= 0.0) ymax = 1.0;
    auto X = [&](double episode) { return left + pw * episode / static_cast<double>(horizon); };
    auto Y = [&](double v) { return top + ph * (1.0 - v / ymax); };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\"" << top + ph
       << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph
       << "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double v = ymax * k / 4.0, e = static_cast<double>(horizon) * k / 4.0;
        os << "<text x=\"" << left - 6 << "\" y=\"" << Y(v) + 4 << "\" text-anchor=\"end\">" << fmt(v, 2)
           << "</text>\n";
        os << "<text x=\"" << X(e) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">"
           << static_cast<Index>(e) << "</text>\n";
    }
    os << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 10 << "\" text-anchor=\"middle\">episode</text>\n";
    os << "<text x=\"16\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
       << top + ph / 2 << ")\">cumulative regret</text>\n";

    for (Index gi = 0; gi < groups.size(); ++gi) {
        const auto& g = groups[gi];
        const char* colour = kPalette[gi % std::size(kPalette)];
        const Index H = g.curves.mean.size();
        if (H == 0) continue;
        const Index stride = std::max<Index>(1, H / 400);
        std::vector<Index> idx;
        for (Index h = 0; h < H; h += stride) idx.push_back(h);
        if (idx.back() != H - 1) idx.push_back(H - 1);

        os << "<polygon fill=\"" << colour << "\" fill-opacity=\"0.15\" stroke=\"none\" points=\"";
        for (Index h : idx) os << fmt(X(h + 1), 2) << ',' << fmt(Y(g.curves.mean[h] + g.curves.stddev[h]), 2) << ' ';
        for (auto it = idx.rbegin(); it != idx.rend(); ++it)
            os << fmt(X(*it + 1), 2) << ','
               << fmt(Y(std::max(0.0, g.curves.mean[*it] - g.curves.stddev[*it])), 2) << ' ';
        os << "\"/>\n";
        os << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
        for (Index h : idx) os << fmt(X(h + 1), 2) << ',' << fmt(Y(g.curves.mean[h]), 2) << ' ';
        os << "\"/>\n";
        const double ly = top + 14.0 * static_cast<double>(gi + 1);
        os << "<line x1=\"" << left + 10 << "\" y1=\"" << ly - 4 << "\" x2=\"" << left + 30 << "\" y2=\"" << ly - 4
           << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n";
        os << "<text x=\"" << left + 36 << "\" y=\"" << ly << "\">" << xml_escape(g.label) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace ttr
