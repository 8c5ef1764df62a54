#pragma once

#include <string>

namespace fracpois {

// Outcome of comparing two independently computed values.  Statistical checks
// put the standardized deviation in lhs against rhs = 0, with tol in standard errors.
struct CheckReport {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    double abs_err = 0.0;
    double rel_err = 0.0;  // relative to rhs, the reference value
    double tol = 0.0;
    bool pass = false;
    std::string detail;  // free text, e.g. parameters or a refinement history

    // pass iff abs_err <= tol or rel_err <= tol
    static CheckReport compare(std::string name, double lhs, double rhs, double tol,
                               std::string detail = {});
};

}  // namespace fracpois
