#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace dcbsim {

struct SimError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// sim-kernel
struct PastEventError : SimError { using SimError::SimError; };
struct UnknownLinkError : SimError { using SimError::SimError; };

// cloud model
struct NoFreeSlotError : SimError { using SimError::SimError; };
struct UnknownImageError : SimError { using SimError::SimError; };
struct IllegalStateError : SimError { using SimError::SimError; };
struct UnknownSiteError : SimError { using SimError::SimError; };

// job system
struct UnknownSampleError : SimError { using SimError::SimError; };
struct DuplicateIdError : SimError { using SimError::SimError; };

// scheduler
struct NoCapacityError : SimError { using SimError::SimError; };

// fault injection
struct BadParamsError : SimError { using SimError::SimError; };
struct UnknownHandleError : SimError { using SimError::SimError; };

// scenario / IO
struct ParseError : SimError { using SimError::SimError; };
struct IoError : SimError { using SimError::SimError; };

// Carries every violation found, not just the first.
class ValidationError : public SimError {
public:
    explicit ValidationError(std::vector<std::string> issues)
        : SimError(join(issues)), issues_(std::move(issues)) {}

    const std::vector<std::string>& issues() const { return issues_; }

private:
    static std::string join(const std::vector<std::string>& issues) {
        std::string out = "scenario validation failed:";
        for (const auto& i : issues) {
            out += "\n  - " + i;
        }
        return out;
    }

    std::vector<std::string> issues_;
};

} // namespace dcbsim
