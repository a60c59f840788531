// SPDX-License-Identifier: Apache-2.0
// Loads the bundled New Jersey fixture through the ingestion pipeline.
#pragma once

#include "tensordec/epi.hpp"

#include <fstream>

namespace njfix {

inline const std::vector<std::string>& counties() {
  static const std::vector<std::string> names = {
      "Atlantic",  "Bergen", "Burlington", "Camden",   "Cape May", "Cumberland", "Essex",
      "Gloucester", "Hudson", "Hunterdon",  "Mercer",   "Middlesex", "Monmouth",  "Morris",
      "Ocean",     "Passaic", "Salem",      "Somerset", "Sussex",   "Union",      "Warren"};
  return names;
}

inline std::string cases_path() { return std::string(TENSORDEC_DATA_DIR) + "/nj_cases.csv"; }
inline std::string population_path() { return std::string(TENSORDEC_DATA_DIR) + "/nj_population.csv"; }

inline std::vector<long long> populations() {
  std::ifstream in(population_path());
  if (!in) throw std::runtime_error("missing fixture " + population_path());
  std::string line;
  std::getline(in, line);  // header
  std::vector<long long> pops;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.rfind(',');
    pops.push_back(std::stoll(line.substr(comma + 1)));
  }
  return pops;
}

// Raw counts dataset over the full 91-week window.
inline tensordec::epi::EpiDataset dataset() {
  using namespace tensordec::epi;
  std::ifstream f(cases_path());
  if (!f) throw std::runtime_error("missing fixture " + cases_path());
  const auto ing = ingest_cases(f, counties(), Date{2020, 4, 1}, Date{2021, 12, 28});
  if (!ing.skipped_regions.empty()) throw std::runtime_error("fixture is missing counties");
  std::vector<std::vector<double>> weekly;
  for (const auto& s : ing.series) weekly.push_back(cumulative_to_weekly(s, Date{2020, 4, 1}).totals);
  return build_tensor(counties(), weekly, populations(), 13, 7, Date{2020, 4, 1});
}

inline tensordec::epi::EpiDataset normalized_dataset() {
  return tensordec::epi::normalize_by_population(dataset());
}

}  // namespace njfix
