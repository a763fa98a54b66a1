// Apache License, Version 2.0, refer to LICENSE.txt
// JSON conversions shared by the serialization code; not installed.

#pragma once

#include <json.hpp>

#include "itf/kernels.hpp"
#include "itf/stick.hpp"

namespace itf::detail {

using nlohmann::json;

json atom_to_json(const Atom& a);
Atom atom_from_json(const json& j);
json prior_to_json(const KernelPrior& p);
KernelPrior prior_from_json(const json& j);
json stick_to_json(const StickMeasure& m);
StickMeasure stick_from_json(const json& j);

}  // namespace itf::detail
