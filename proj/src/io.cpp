#include "ivt/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace ivt {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(trim(item));
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

long parse_count(const std::string& s, long line_no) {
    long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        // accept integral values written as reals, e.g. "3.0"
        double d = 0.0;
        const auto r2 = std::from_chars(s.data(), s.data() + s.size(), d);
        if (r2.ec != std::errc() || r2.ptr != s.data() + s.size() || d != std::floor(d)) {
            throw DomainError("line " + std::to_string(line_no) + ": count is not an integer: " + s);
        }
        v = static_cast<long>(d);
    }
    return v;
}

double parse_real(const std::string& s, long line_no) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw DomainError("line " + std::to_string(line_no) + ": not a number: " + s);
    }
    return v;
}

}  // namespace

CountSeries read_series_csv(std::istream& in, std::optional<double> delta) {
    std::string line;
    long line_no = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty()) {
            header = split(trim(line), ',');
            break;
        }
    }
    int t_col = -1;
    int x_col = -1;
    for (int i = 0; i < static_cast<int>(header.size()); ++i) {
        if (header[i] == "t") t_col = i;
        if (header[i] == "x") x_col = i;
    }
    if (x_col < 0) throw DomainError("CSV header must contain a column named x");
    std::vector<double> times;
    CountSeries series;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string row = trim(line);
        if (row.empty()) continue;
        const auto cells = split(row, ',');
        if (cells.size() != header.size()) throw DomainError("line " + std::to_string(line_no) + ": wrong number of fields");
        series.values.push_back(parse_count(cells[static_cast<std::size_t>(x_col)], line_no));
        if (t_col >= 0) times.push_back(parse_real(cells[static_cast<std::size_t>(t_col)], line_no));
    }
    if (series.values.empty()) throw DomainError("CSV contains no observations");
    if (t_col >= 0 && times.size() >= 2) {
        const double step = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
        if (!(step > 0.0)) throw DomainError("time column must be increasing");
        for (std::size_t i = 1; i < times.size(); ++i) {
            const double gap = times[i] - times[i - 1];
            if (std::abs(gap - step) > 1e-9 * step) {
                throw DomainError("time column is not equidistant (row " + std::to_string(i + 1) + ")");
            }
        }
        if (delta && std::abs(*delta - step) > 1e-9 * step) {
            throw DomainError("given delta does not match the spacing of the time column");
        }
        series.delta = delta ? *delta : step;
        series.origin = times.front();
    } else {
        if (!delta) {
            if (t_col >= 0) throw DomainError("a single row cannot define delta; pass it explicitly");
            throw DomainError("CSV without a time column needs an explicit delta");
        }
        series.delta = *delta;
        series.origin = t_col >= 0 ? times.front() : *delta;
    }
    if (!(series.delta > 0.0)) throw DomainError("delta must be positive");
    return series;
}

CountSeries read_series_csv_file(const std::string& path, std::optional<double> delta) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open input file " + path);
    return read_series_csv(in, delta);
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void write_series_csv(const CountSeries& x, std::ostream& out) {
    out << "t,x\n";
    for (long i = 0; i < x.size(); ++i) {
        out << format_double(x.origin + static_cast<double>(i) * x.delta) << ',' << x.values[static_cast<std::size_t>(i)]
            << '\n';
    }
}

Eigen::VectorXd parse_theta(Family family, const std::string& text) {
    const auto names = parameter_names(family);
    Eigen::VectorXd theta = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(names.size()), NAN);
    for (const auto& item : split(text, ',')) {
        if (item.empty()) continue;
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw DomainError("theta entries must look like name=value: " + item);
        const std::string name = trim(item.substr(0, eq));
        const auto it = std::find(names.begin(), names.end(), name);
        if (it == names.end()) throw DomainError("unknown parameter " + name + " for family " + family.tag());
        theta(it - names.begin()) = parse_real(trim(item.substr(eq + 1)), 0);
    }
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (std::isnan(theta(static_cast<Eigen::Index>(i)))) throw DomainError("missing parameter " + names[i]);
    }
    validate(family, theta);
    return theta;
}

nlohmann::ordered_json fit_to_json(const FitResult& fit, const std::string& estimator, const Inference* inference) {
    nlohmann::ordered_json doc;
    const auto names = parameter_names(fit.family);
    doc["family"] = fit.family.tag();
    doc["delta"] = fit.delta;
    doc["n"] = fit.n;
    doc["K"] = fit.K;
    doc["estimator"] = estimator;
    nlohmann::ordered_json theta = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < names.size(); ++i) theta[names[i]] = fit.theta(static_cast<Eigen::Index>(i));
    doc["theta"] = theta;
    nlohmann::ordered_json se = nlohmann::ordered_json::object();
    std::vector<std::string> diagnostics = fit.diagnostics;
    if (inference) {
        const auto& sw = inference->sandwich;
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (sw.se) se[names[i]] = (*sw.se)(static_cast<Eigen::Index>(i));
            else se[names[i]] = nullptr;
        }
        doc["se"] = se;
        if (!sw.se) doc["se_reason"] = sw.se_reason;
        doc["method"] = sw.method;
        diagnostics.insert(diagnostics.end(), sw.diagnostics.begin(), sw.diagnostics.end());
    } else {
        for (const auto& name : names) se[name] = nullptr;
        doc["se"] = se;
        doc["method"] = nullptr;
    }
    doc["CL"] = std::isfinite(fit.cl) ? nlohmann::ordered_json(fit.cl) : nlohmann::ordered_json(nullptr);
    if (inference) {
        doc["CLAIC"] = inference->criteria.claic;
        doc["CLBIC"] = inference->criteria.clbic;
    } else {
        doc["CLAIC"] = nullptr;
        doc["CLBIC"] = nullptr;
    }
    doc["converged"] = fit.converged;
    doc["iterations"] = fit.iterations;
    doc["gradient_norm"] = std::isfinite(fit.gradient_norm) ? nlohmann::ordered_json(fit.gradient_norm)
                                                            : nlohmann::ordered_json(nullptr);
    doc["init"] = fit.init_source;
    if (fit.multistart_spread) doc["multistart_spread"] = *fit.multistart_spread;
    doc["diagnostics"] = diagnostics;
    return doc;
}

FittedModel fitted_model_from_json(const nlohmann::json& doc) {
    FittedModel m;
    try {
        m.family = parse_family(doc.at("family").get<std::string>());
        m.delta = doc.at("delta").get<double>();
        const auto names = parameter_names(m.family);
        m.theta.resize(static_cast<Eigen::Index>(names.size()));
        for (std::size_t i = 0; i < names.size(); ++i) {
            m.theta(static_cast<Eigen::Index>(i)) = doc.at("theta").at(names[i]).get<double>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw DomainError(std::string("model document is missing fields: ") + e.what());
    }
    validate(m.family, m.theta);
    return m;
}

}  // namespace ivt
