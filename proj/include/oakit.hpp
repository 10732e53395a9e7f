#pragma once

#include "oakit/cutgen.hpp"
#include "oakit/errors.hpp"
#include "oakit/expr.hpp"
#include "oakit/io.hpp"
#include "oakit/log.hpp"
#include "oakit/lp.hpp"
#include "oakit/milp.hpp"
#include "oakit/model.hpp"
#include "oakit/nlp.hpp"
#include "oakit/oa.hpp"
#include "oakit/svg.hpp"
