#pragma once

#include "digit_forensics/csv.hpp"
#include "digit_forensics/dataset.hpp"
#include "digit_forensics/digits.hpp"
#include "digit_forensics/error.hpp"
#include "digit_forensics/harness.hpp"
#include "digit_forensics/ks.hpp"
#include "digit_forensics/operators.hpp"
#include "digit_forensics/output.hpp"
#include "digit_forensics/random.hpp"
#include "digit_forensics/reference.hpp"
#include "digit_forensics/reference_cache.hpp"
#include "digit_forensics/reference_provider.hpp"
#include "digit_forensics/report.hpp"
#include "digit_forensics/scoring.hpp"
