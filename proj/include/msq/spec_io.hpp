#pragma once

#include <string>

#include "msq/job_type.hpp"

namespace msq {

// Job description files are JSON:
//   {
//     "name": "repair",
//     "initial": "D",
//     "stages": {
//       "D":    {"pmf": [[1, 1]], "transitions": [["easy", "2/3"], ["hard", "1/3"]]},
//       "easy": {"pmf": [[4, 1]], "transitions": [["DONE", 1]]},
//       "hard": {"pmf": [[12, 1]], "transitions": [["DONE", 1]]}
//     }
//   }
// A stage carries either "pmf" ([size, probability] pairs) or "zero": true.
// "DONE" names the final stage.  Numbers may be written as JSON numbers or
// as exact fraction strings "n/d".

JobType parse_job_spec(const std::string& text, const std::string& origin);
JobType load_job_spec(const std::string& path);

std::string job_spec_to_json(const JobType& job);
void write_job_spec(const JobType& job, const std::string& path);

}  // namespace msq
