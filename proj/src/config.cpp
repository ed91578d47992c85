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

#include "drlab/config.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "drlab/errors.hpp"
#include "drlab/text.hpp"

namespace drlab
{

namespace
{

using Entries = std::vector<std::pair<std::string, std::string>>;

double to_double(const std::string& key, std::string_view value)
{
    const auto v = text::parse_double(value);
    if (!v)
    {
        throw ConfigError(key, "expected a number, got '" + std::string(value) + "'");
    }
    return *v;
}

std::vector<double> to_doubles(const std::string& key, std::string_view value, std::size_t expected)
{
    std::vector<double> out;
    for (auto part : text::split(value, ','))
    {
        out.push_back(to_double(key, part));
    }
    if (expected != 0 && out.size() != expected)
    {
        throw ConfigError(key, "expected " + std::to_string(expected) + " values, got " + std::to_string(out.size()));
    }
    return out;
}

std::size_t to_count(const std::string& key, std::string_view value)
{
    const auto v = text::parse_uint(value);
    if (!v)
    {
        throw ConfigError(key, "expected a non-negative integer, got '" + std::string(value) + "'");
    }
    return static_cast<std::size_t>(*v);
}

void apply(ScenarioConfig& cfg, const std::string& key, std::string_view value)
{
    if (key == "moment")
    {
        cfg.moment = std::string(value);
    }
    else if (key == "nuisance")
    {
        try
        {
            cfg.nuisance = NuisanceStrategy::parse(value);
        }
        catch (const ConfigError& e)
        {
            if (e.key() == "nuisance")
            {
                throw;
            }
            throw ConfigError("nuisance." + e.key(), e.detail());
        }
    }
    else if (key == "n")
    {
        cfg.n_grid.clear();
        for (auto part : text::split(value, ','))
        {
            cfg.n_grid.push_back(to_count(key, part));
        }
    }
    else if (key == "reps")
    {
        cfg.reps = to_count(key, value);
    }
    else if (key == "ci_level")
    {
        cfg.ci_level = to_double(key, value);
    }
    else if (key == "probe_taylor")
    {
        if (value == "true")
        {
            cfg.probe_taylor = true;
        }
        else if (value == "false")
        {
            cfg.probe_taylor = false;
        }
        else
        {
            throw ConfigError(key, "expected true or false");
        }
    }
    else if (key == "base_seed")
    {
        const auto v = text::parse_uint(value);
        if (!v)
        {
            throw ConfigError(key, "expected an unsigned 64-bit integer");
        }
        cfg.base_seed = *v;
    }
    else if (key == "dgp.gamma")
    {
        const auto v = to_doubles(key, value, 2);
        cfg.dgp.gamma = {v[0], v[1]};
    }
    else if (key == "dgp.beta")
    {
        const auto v = to_doubles(key, value, 2);
        cfg.dgp.beta = {v[0], v[1]};
    }
    else if (key == "dgp.tau")
    {
        cfg.dgp.tau = to_double(key, value);
    }
    else if (key == "dgp.sigma")
    {
        cfg.dgp.sigma = to_double(key, value);
    }
    else
    {
        throw ConfigError(key, "unknown key");
    }
}

}  // namespace

SimulationConfig parse_config(std::string_view src)
{
    Entries defaults;
    std::vector<std::pair<std::string, Entries>> sections;
    std::set<std::string> seen;

    std::size_t line_no = 0;
    for (auto raw : text::split(src, '\n'))
    {
        ++line_no;
        auto line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos)
        {
            line = line.substr(0, hash);
        }
        line = text::trim(line);
        if (line.empty())
        {
            continue;
        }
        if (line.front() == '[')
        {
            if (line.back() != ']')
            {
                throw ConfigError("scenario", "line " + std::to_string(line_no) + ": unterminated section header");
            }
            const auto inner = text::trim(line.substr(1, line.size() - 2));
            if (inner.substr(0, 8) != "scenario" || inner.size() <= 8 || (inner[8] != ' ' && inner[8] != '\t'))
            {
                throw ConfigError("scenario", "line " + std::to_string(line_no) + ": expected [scenario <id>]");
            }
            std::string id(text::trim(inner.substr(8)));
            if (!seen.insert(id).second)
            {
                throw ConfigError("scenario", "duplicate scenario id '" + id + "'");
            }
            sections.emplace_back(std::move(id), Entries{});
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
        {
            throw ConfigError(std::string(line), "line " + std::to_string(line_no) + ": expected key = value");
        }
        std::string key(text::trim(line.substr(0, eq)));
        std::string value(text::trim(line.substr(eq + 1)));
        if (key.empty())
        {
            throw ConfigError("", "line " + std::to_string(line_no) + ": empty key");
        }
        (sections.empty() ? defaults : sections.back().second).emplace_back(std::move(key), std::move(value));
    }

    if (sections.empty())
    {
        throw ConfigError("scenario", "config declares no [scenario <id>] section");
    }

    SimulationConfig out;
    for (auto& [id, entries] : sections)
    {
        ScenarioConfig cfg;
        cfg.id = id;
        for (const auto& [k, v] : defaults)
        {
            apply(cfg, k, v);
        }
        for (const auto& [k, v] : entries)
        {
            apply(cfg, k, v);
        }
        cfg.validate();
        out.scenarios.push_back(std::move(cfg));
    }
    return out;
}

SimulationConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw ConfigError("config", "cannot open '" + path.string() + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string SimulationConfig::canonical() const
{
    std::string s;
    for (const auto& c : scenarios)
    {
        s += "[scenario " + c.id + "]\n";
        s += "moment=" + c.moment + "\n";
        s += "nuisance=" + c.nuisance.to_string() + "\n";
        s += "n=";
        for (std::size_t i = 0; i < c.n_grid.size(); ++i)
        {
            s += (i ? "," : "") + std::to_string(c.n_grid[i]);
        }
        s += "\nreps=" + std::to_string(c.reps) + "\n";
        s += "ci_level=" + text::shortest(c.ci_level) + "\n";
        s += std::string("probe_taylor=") + (c.probe_taylor ? "true" : "false") + "\n";
        s += "base_seed=" + std::to_string(c.base_seed) + "\n";
        s += "dgp.gamma=" + text::shortest(c.dgp.gamma[0]) + "," + text::shortest(c.dgp.gamma[1]) + "\n";
        s += "dgp.beta=" + text::shortest(c.dgp.beta[0]) + "," + text::shortest(c.dgp.beta[1]) + "\n";
        s += "dgp.tau=" + text::shortest(c.dgp.tau) + "\n";
        s += "dgp.sigma=" + text::shortest(c.dgp.sigma) + "\n";
    }
    return s;
}

std::string SimulationConfig::hash() const
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : canonical())
    {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace drlab
