#include "isomono.hpp"
