/*
 * Copyright 2026 The drlab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>

#include "drlab/errors.hpp"
#include "drlab/io.hpp"
#include "drlab/text.hpp"

namespace drlab::io
{

namespace
{
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double v)
{
    return std::isnan(v) ? std::string{} : text::full_precision(v);
}

nlohmann::json jnum(double v)
{
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

double jget(const nlohmann::json& j, const char* key)
{
    const auto& v = j.at(key);
    return v.is_null() ? kNaN : v.get<double>();
}

std::string strip_cr(std::string line)
{
    if (!line.empty() && line.back() == '\r')
    {
        line.pop_back();
    }
    return line;
}
}  // namespace

void write_records_csv(std::ostream& out, std::span<const ReplicationRecord> records)
{
    out << kRecordsHeader << '\n';
    for (const auto& r : records)
    {
        out << r.scenario_id << ',' << r.n << ',' << r.rep << ',' << num(r.psi_hat) << ',' << num(r.se) << ','
            << num(r.ci_lo) << ',' << num(r.ci_hi) << ',' << (r.covered ? 1 : 0) << ',' << num(r.theta_err) << ','
            << num(r.taylor_term) << ',' << (r.converged ? 1 : 0) << '\n';
    }
}

std::vector<ReplicationRecord> read_records_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line) || strip_cr(line) != kRecordsHeader)
    {
        throw DataError("records CSV: line 1: header does not match the record schema");
    }
    std::vector<ReplicationRecord> out;
    std::size_t line_no = 1;
    while (std::getline(in, line))
    {
        ++line_no;
        line = strip_cr(line);
        if (line.empty())
        {
            continue;
        }
        const auto f = text::split(line, ',');
        auto fail = [&](const std::string& what) {
            throw DataError("records CSV: line " + std::to_string(line_no) + ": " + what);
        };
        if (f.size() != 11)
        {
            fail("expected 11 fields");
        }
        auto real = [&](std::string_view s) {
            if (s.empty())
            {
                return kNaN;
            }
            const auto v = text::parse_double(s);
            if (!v)
            {
                fail("bad number '" + std::string(s) + "'");
            }
            return *v;
        };
        auto count = [&](std::string_view s) {
            const auto v = text::parse_uint(s);
            if (!v)
            {
                fail("bad count '" + std::string(s) + "'");
            }
            return static_cast<std::size_t>(*v);
        };
        auto flag = [&](std::string_view s) {
            if (s != "0" && s != "1")
            {
                fail("flag must be 0 or 1");
            }
            return s == "1";
        };
        ReplicationRecord r;
        r.scenario_id = std::string(f[0]);
        r.n = count(f[1]);
        r.rep = count(f[2]);
        r.psi_hat = real(f[3]);
        r.se = real(f[4]);
        r.ci_lo = real(f[5]);
        r.ci_hi = real(f[6]);
        r.covered = flag(f[7]);
        r.theta_err = real(f[8]);
        r.taylor_term = real(f[9]);
        r.converged = flag(f[10]);
        out.push_back(std::move(r));
    }
    return out;
}

nlohmann::json to_json(const SummaryRow& row)
{
    return {
        {"n", row.n},
        {"reps", row.reps},
        {"used", row.used},
        {"failures", row.failures},
        {"mean_psi", jnum(row.mean_psi)},
        {"mean_bias", jnum(row.mean_bias)},
        {"bias_mcse", jnum(row.bias_mcse)},
        {"emp_sd", jnum(row.emp_sd)},
        {"mean_se", jnum(row.mean_se)},
        {"se_sd_ratio", jnum(row.se_sd_ratio)},
        {"coverage", jnum(row.coverage)},
        {"coverage_mcse", jnum(row.coverage_mcse)},
        {"sqrt_n_abs_bias", jnum(row.sqrt_n_abs_bias)},
        {"taylor_median", jnum(row.taylor_median)},
        {"taylor_q90", jnum(row.taylor_q90)},
        {"nuisance_rmse", jnum(row.nuisance_rmse)},
    };
}

nlohmann::json to_json(const SimSummary& s)
{
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : s.rows)
    {
        rows.push_back(to_json(r));
    }
    nlohmann::json j = {
        {"scenario_id", s.scenario_id},
        {"moment", s.moment},
        {"nuisance", s.nuisance},
        {"psi_star", s.psi_star},
        {"ci_level", s.ci_level},
        {"alpha", s.alpha ? nlohmann::json(*s.alpha) : nlohmann::json(nullptr)},
        {"rows", rows},
    };
    return j;
}

SummaryRow summary_row_from_json(const nlohmann::json& j)
{
    SummaryRow r;
    r.n = j.at("n").get<std::size_t>();
    r.reps = j.at("reps").get<std::size_t>();
    r.used = j.at("used").get<std::size_t>();
    r.failures = j.at("failures").get<std::size_t>();
    r.mean_psi = jget(j, "mean_psi");
    r.mean_bias = jget(j, "mean_bias");
    r.bias_mcse = jget(j, "bias_mcse");
    r.emp_sd = jget(j, "emp_sd");
    r.mean_se = jget(j, "mean_se");
    r.se_sd_ratio = jget(j, "se_sd_ratio");
    r.coverage = jget(j, "coverage");
    r.coverage_mcse = jget(j, "coverage_mcse");
    r.sqrt_n_abs_bias = jget(j, "sqrt_n_abs_bias");
    r.taylor_median = jget(j, "taylor_median");
    r.taylor_q90 = jget(j, "taylor_q90");
    r.nuisance_rmse = jget(j, "nuisance_rmse");
    return r;
}

SimSummary summary_from_json(const nlohmann::json& j)
{
    SimSummary s;
    s.scenario_id = j.at("scenario_id").get<std::string>();
    s.moment = j.at("moment").get<std::string>();
    s.nuisance = j.at("nuisance").get<std::string>();
    s.psi_star = j.at("psi_star").get<double>();
    s.ci_level = j.at("ci_level").get<double>();
    if (j.contains("alpha") && !j.at("alpha").is_null())
    {
        s.alpha = j.at("alpha").get<double>();
    }
    for (const auto& r : j.at("rows"))
    {
        s.rows.push_back(summary_row_from_json(r));
    }
    return s;
}

Dataset read_observations_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line))
    {
        throw DataError("observations CSV: line 1: missing header");
    }
    const std::string header = strip_cr(line);
    const auto names = text::split(header, ',');
    std::optional<std::size_t> col_a, col_y, col_x0;
    std::vector<std::pair<long long, std::size_t>> xcols;  // (covariate number, field)
    for (std::size_t f = 0; f < names.size(); ++f)
    {
        const auto name = text::trim(names[f]);
        if (name == "a")
        {
            col_a = f;
        }
        else if (name == "y")
        {
            col_y = f;
        }
        else if (name.size() > 1 && name.front() == 'x' && text::parse_uint(name.substr(1)))
        {
            const auto idx = static_cast<long long>(*text::parse_uint(name.substr(1)));
            if (idx == 0)
            {
                col_x0 = f;
            }
            else
            {
                xcols.emplace_back(idx, f);
            }
        }
        else
        {
            throw DataError("observations CSV: line 1: unexpected column '" + std::string(name) + "'");
        }
    }
    if (!col_a || !col_y)
    {
        throw DataError("observations CSV: line 1: header needs columns a and y");
    }
    std::sort(xcols.begin(), xcols.end());

    std::vector<Observation> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line))
    {
        ++line_no;
        line = strip_cr(line);
        if (text::trim(line).empty())
        {
            continue;
        }
        const auto fields = text::split(line, ',');
        auto fail = [&](const std::string& what) {
            throw DataError("observations CSV: data row " + std::to_string(rows.size() + 1) + " (line "
                            + std::to_string(line_no) + "): " + what);
        };
        if (fields.size() != names.size())
        {
            fail("expected " + std::to_string(names.size()) + " fields, got " + std::to_string(fields.size()));
        }
        auto value = [&](std::size_t f) {
            const auto v = text::parse_double(fields[f]);
            if (!v || !std::isfinite(*v))
            {
                fail("field '" + std::string(text::trim(names[f])) + "' is not a finite number");
            }
            return *v;
        };
        Observation obs;
        obs.x.push_back(1.0);
        if (col_x0 && value(*col_x0) != 1.0)
        {
            fail("x0 must equal 1 (intercept)");
        }
        for (const auto& [idx, f] : xcols)
        {
            obs.x.push_back(value(f));
        }
        const double a = value(*col_a);
        if (a != 0.0 && a != 1.0)
        {
            fail("a must be 0 or 1");
        }
        obs.a = static_cast<int>(a);
        obs.y = value(*col_y);
        rows.push_back(std::move(obs));
    }
    if (rows.empty())
    {
        throw DataError("observations CSV: no data rows");
    }
    return Dataset::from_rows(rows);
}

void write_observations_csv(std::ostream& out, const Dataset& data)
{
    for (std::size_t j = 1; j < data.num_covariates(); ++j)
    {
        out << 'x' << j << ',';
    }
    out << "a,y\n";
    for (std::size_t i = 0; i < data.size(); ++i)
    {
        for (std::size_t j = 1; j < data.num_covariates(); ++j)
        {
            out << text::full_precision(data.x(i, j)) << ',';
        }
        out << static_cast<int>(data.treatment()[i]) << ',' << text::full_precision(data.outcome()[i]) << '\n';
    }
}

}  // namespace drlab::io
