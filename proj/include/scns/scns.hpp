#pragma once

#include "scns/error.hpp"
#include "scns/field.hpp"
#include "scns/stencil.hpp"
#include "scns/linsolve.hpp"
#include "scns/pressure.hpp"
#include "scns/bench.hpp"
#include "scns/ns.hpp"
#include "scns/io.hpp"
#include "scns/cli.hpp"
