#include "inspire/errors.hpp"
