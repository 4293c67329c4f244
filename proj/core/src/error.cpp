#include "fpd/error.hpp"
