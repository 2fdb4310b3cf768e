#pragma once
#include "matkit.hpp"
