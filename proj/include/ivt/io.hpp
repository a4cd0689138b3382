#pragma once

#include "ivt/evaluate.hpp"
#include "ivt/inference.hpp"

#include <json.hpp>

#include <iosfwd>
#include <optional>
#include <string>

namespace ivt {

/// Reads a series from CSV with a header of either `x` or `t,x`. With a time
/// column the spacing must be uniform to 1e-9 relative and defines delta;
/// otherwise delta must be given.
[[nodiscard]] CountSeries read_series_csv(std::istream& in, std::optional<double> delta);
[[nodiscard]] CountSeries read_series_csv_file(const std::string& path, std::optional<double> delta);

/// Header `t,x` with t = origin + (i - 1) delta.
void write_series_csv(const CountSeries& x, std::ostream& out);

/// Shortest decimal text that reads back to the same double.
[[nodiscard]] std::string format_double(double v);

/// Parses "name=value,name=value" into the parameter vector of a family.
[[nodiscard]] Eigen::VectorXd parse_theta(Family family, const std::string& text);

[[nodiscard]] nlohmann::ordered_json fit_to_json(const FitResult& fit, const std::string& estimator,
                                                 const Inference* inference);

struct FittedModel {
    Family family;
    Eigen::VectorXd theta;
    double delta{1.0};
};

/// Reads the family, theta and delta fields of a fit document.
[[nodiscard]] FittedModel fitted_model_from_json(const nlohmann::json& doc);

}  // namespace ivt
