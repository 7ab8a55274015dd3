#include "dlab/error.hpp"
