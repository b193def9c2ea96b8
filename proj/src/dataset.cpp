#include "nrcid/dataset.hpp"
#include "nrcid/errors.hpp"

#include <string>

namespace nrcid {

void Dataset::validate() const {
    if (inputs.rows() == 0 || targets.rows() == 0) {
        throw DataError("dataset '" + name + "' is empty");
    }
    if (inputs.rows() != targets.rows()) {
        throw DataError("dataset '" + name + "' has " + std::to_string(inputs.rows()) + " input rows but " +
                        std::to_string(targets.rows()) + " target rows");
    }
    if (!inputs.all_finite() || !targets.all_finite()) {
        throw DataError("dataset '" + name + "' contains non-finite values");
    }
}

} // namespace nrcid
