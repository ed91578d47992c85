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

#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "drlab/dataset.hpp"
#include "drlab/simlab.hpp"

namespace drlab::io
{

/// Exact column order of the replication CSV.
inline constexpr std::string_view kRecordsHeader =
    "scenario_id,n,rep,psi_hat,se,ci_lo,ci_hi,covered,theta_err,taylor_term,converged";

/// Numbers with 17 significant digits; NaN fields are empty.
void write_records_csv(std::ostream& out, std::span<const ReplicationRecord> records);
/// Throws DataError naming the 1-based line of a malformed row.
std::vector<ReplicationRecord> read_records_csv(std::istream& in);

nlohmann::json to_json(const SummaryRow& row);
nlohmann::json to_json(const SimSummary& summary);
SummaryRow summary_row_from_json(const nlohmann::json& j);
SimSummary summary_from_json(const nlohmann::json& j);

/// Observation table with header columns a, y and covariates named x<digits>.
/// The intercept is added unless an all-ones x0 column is present. Throws
/// DataError naming the 1-based line number of a malformed row.
Dataset read_observations_csv(std::istream& in);
void write_observations_csv(std::ostream& out, const Dataset& data);

}  // namespace drlab::io
