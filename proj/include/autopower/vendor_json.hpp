#pragma once

// nlohmann/json ships in vendor/; every module includes it through here.
#include "json.hpp"
